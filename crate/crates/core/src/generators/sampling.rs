//! Approaches that draw from an explicit distribution over the instance space.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{finish, mean_std, require_rows, GeneratorConfig, SIGMA_FLOOR};
use crate::ball::minimal_enclosing_ball;
use crate::data::Dataset;
use crate::dist::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};
use crate::neighbors::knn_of_row;

/// Largest grid `invHist` is willing to build.
pub const MAX_HIST_CELLS: u64 = 10_000_000;

/// Per-attribute data bounds widened by `expansion * range` on both sides.
pub fn expanded_bounds(data: &Dataset, expansion: f64) -> Vec<(f64, f64)> {
    data.bounds()
        .into_iter()
        .map(|(lo, hi)| {
            let pad = expansion * (hi - lo);
            (lo - pad, hi + pad)
        })
        .collect()
}

pub(crate) fn sample_box<R: Rng + ?Sized>(bounds: &[(f64, f64)], rng: &mut R, out: &mut Vec<f64>) {
    for &(lo, hi) in bounds {
        let u: f64 = rng.random();
        out.push(lo + u * (hi - lo));
    }
}

/// Uniform draw from the ball around `center`: Gaussian direction, radius `R * U^(1/d)`.
pub(crate) fn sample_ball<R: Rng + ?Sized>(center: &[f64], radius: f64, rng: &mut R, out: &mut Vec<f64>) {
    let d = center.len();
    let dir = loop {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            break dir.into_iter().map(|v| v / norm).collect::<Vec<_>>();
        }
    };
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / d as f64);
    out.extend(center.iter().zip(&dir).map(|(c, v)| c + r * v));
}

pub fn gen_unif_box<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "unifBox")?;
    if !(cfg.bounds_expansion >= 0.0) {
        return Err(Error::InvalidParameter("bounds expansion must be nonnegative".into()));
    }
    let bounds = expanded_bounds(data, cfg.bounds_expansion);
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * data.dim());
    for _ in 0..n_art {
        sample_box(&bounds, rng, &mut values);
    }
    finish(data, values)
}

/// Latin hypercube over the data's bounding box: each attribute's range is cut
/// into `n_art` equal strata and every stratum receives exactly one value.
pub fn gen_lhs<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "lhs")?;
    let n_art = cfg.n_art_for(data);
    if n_art == 0 {
        return Err(Error::InvalidParameter("lhs needs n_art >= 1".into()));
    }
    let d = data.dim();
    let bounds = data.bounds();
    let mut values = vec![0.0; n_art * d];
    let mut strata: Vec<usize> = (0..n_art).collect();
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        strata.shuffle(rng);
        for (i, &s) in strata.iter().enumerate() {
            let u: f64 = rng.random();
            let t = ((s as f64 + u) / n_art as f64).min(1.0);
            values[i * d + j] = lo + t * (hi - lo);
        }
    }
    finish(data, values)
}

pub fn gen_unif_sphere<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "unifSphere")?;
    let ball = minimal_enclosing_ball(data, cfg.ball_rel_tol)?;
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * data.dim());
    for _ in 0..n_art {
        sample_ball(&ball.center, ball.radius, rng, &mut values);
    }
    finish(data, values)
}

/// Mean distance of every row to its `k` nearest other rows.
pub(crate) fn average_knn_distances(data: &Dataset, k: usize) -> Result<Vec<f64>> {
    (0..data.len())
        .map(|i| {
            let nn = knn_of_row(data, i, k)?;
            Ok(nn.iter().map(|n| n.distance).sum::<f64>() / k as f64)
        })
        .collect()
}

/// Picks a genuine center uniformly, then a uniform point in the ball whose
/// radius is that center's mean k-NN distance.
pub fn gen_mani_samp<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    if cfg.k == 0 {
        return Err(Error::InvalidParameter("maniSamp needs k >= 1".into()));
    }
    require_rows(data, cfg.k + 1, "maniSamp")?;
    let radii = average_knn_distances(data, cfg.k)?;
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * data.dim());
    for _ in 0..n_art {
        let c = rng.random_range(0..data.len());
        sample_ball(data.row(c), radii[c], rng, &mut values);
    }
    finish(data, values)
}

pub fn gen_dens_aprox<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 2, "densAprox")?;
    let (mean, std) = mean_std(data);
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * data.dim());
    for _ in 0..n_art {
        for (m, s) in mean.iter().zip(&std) {
            let z: f64 = rng.sample(StandardNormal);
            values.push(m + s.max(SIGMA_FLOOR) * z);
        }
    }
    finish(data, values)
}

/// Draws `|z| > 3` from the standard normal restricted to its two tails.
pub(crate) fn sample_tail_z<R: Rng + ?Sized>(rng: &mut R) -> Result<f64> {
    let tail_mass = normal_cdf(-3.0);
    loop {
        let u = rng.random::<f64>() * tail_mass;
        if u <= 0.0 {
            continue;
        }
        let z = normal_quantile(u)?;
        if z < -3.0 {
            return Ok(if rng.random::<bool>() { -z } else { z });
        }
    }
}

pub fn gen_gauss_tail<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 2, "gaussTail")?;
    let (mean, std) = mean_std(data);
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * data.dim());
    for _ in 0..n_art {
        for (m, s) in mean.iter().zip(&std) {
            values.push(m + s.max(SIGMA_FLOOR) * sample_tail_z(rng)?);
        }
    }
    finish(data, values)
}

/// Equi-width grid histogram with sparse cell counts, sampled inversely to density.
#[derive(Debug, Clone)]
pub struct InverseHistogram {
    bounds: Vec<(f64, f64)>,
    bins: usize,
    counts: BTreeMap<u64, usize>,
    max_count: usize,
    cells: u64,
}

impl InverseHistogram {
    /// Grid over the data bounds widened by `expansion * range` on each side.
    pub fn fit(data: &Dataset, bins: usize, expansion: f64) -> Result<Self> {
        Self::with_bounds(data, bins, expanded_bounds(data, expansion))
    }

    pub fn with_bounds(data: &Dataset, bins: usize, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        if bounds.len() != data.dim() {
            return Err(Error::DimensionMismatch { expected: data.dim(), actual: bounds.len() });
        }
        let cells = u32::try_from(data.dim())
            .ok()
            .and_then(|d| (bins as u64).checked_pow(d))
            .filter(|&c| c <= MAX_HIST_CELLS)
            .ok_or_else(|| Error::Generation("dimensionality too high for invHist".into()))?;
        let mut hist = Self { bounds, bins, counts: BTreeMap::new(), max_count: 0, cells };
        for row in data.rows() {
            let cell = hist.cell_of(row);
            *hist.counts.entry(cell).or_default() += 1;
        }
        hist.max_count = hist.counts.values().copied().max().unwrap_or(0);
        Ok(hist)
    }

    pub fn cell_count(&self) -> u64 {
        self.cells
    }

    /// Flat index of the cell containing `x`; values outside the grid land in the edge cells.
    pub fn cell_of(&self, x: &[f64]) -> u64 {
        let mut cell = 0u64;
        let mut stride = 1u64;
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            let idx = if hi > lo {
                let t = ((v - lo) / (hi - lo) * self.bins as f64).floor();
                t.clamp(0.0, (self.bins - 1) as f64) as u64
            } else {
                0
            };
            cell += idx * stride;
            stride *= self.bins as u64;
        }
        cell
    }

    pub fn count(&self, cell: u64) -> usize {
        self.counts.get(&cell).copied().unwrap_or(0)
    }

    /// Unnormalized sampling weight `1 - count / max_count`.
    pub fn weight(&self, cell: u64) -> f64 {
        if self.max_count == 0 {
            return 1.0;
        }
        1.0 - self.count(cell) as f64 / self.max_count as f64
    }

    fn occupied_weight(&self) -> f64 {
        self.counts.keys().map(|&c| self.weight(c)).sum()
    }

    fn empty_cells(&self) -> u64 {
        self.cells - self.counts.len() as u64
    }

    pub fn total_weight(&self) -> f64 {
        self.occupied_weight() + self.empty_cells() as f64
    }

    pub fn probability(&self, cell: u64) -> f64 {
        self.weight(cell) / self.total_weight()
    }

    pub fn sample_cell<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let occupied = self.occupied_weight();
        let total = occupied + self.empty_cells() as f64;
        if total <= 0.0 {
            return Err(Error::Generation("inverse histogram has no free mass".into()));
        }
        let r = rng.random::<f64>() * total;
        if r < occupied {
            let mut acc = 0.0;
            let mut last = None;
            for &cell in self.counts.keys() {
                let w = self.weight(cell);
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                last = Some(cell);
                if r < acc {
                    return Ok(cell);
                }
            }
            if let Some(cell) = last {
                return Ok(cell);
            }
        }
        let empty = self.empty_cells();
        if empty == 0 {
            return Err(Error::Generation("inverse histogram has no free mass".into()));
        }
        // j-th empty cell in index order, found by skipping over occupied ones
        let mut cell = (((r - occupied).max(0.0)) as u64).min(empty - 1);
        for &taken in self.counts.keys() {
            if taken <= cell {
                cell += 1;
            } else {
                break;
            }
        }
        Ok(cell)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) -> Result<()> {
        let mut cell = self.sample_cell(rng)?;
        for &(lo, hi) in &self.bounds {
            let idx = cell % self.bins as u64;
            cell /= self.bins as u64;
            let width = (hi - lo) / self.bins as f64;
            let u: f64 = rng.random();
            out.push(lo + (idx as f64 + u) * width);
        }
        Ok(())
    }
}

pub fn gen_inv_hist<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "invHist")?;
    let hist = InverseHistogram::fit(data, cfg.hist_bins, cfg.hist_expansion)?;
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * data.dim());
    for _ in 0..n_art {
        hist.sample(rng, &mut values)?;
    }
    finish(data, values)
}

#[cfg(test)]
mod tests {
    use super::super::{generate, Approach};
    use super::*;
    use crate::rng::RngStream;

    fn rng(seed: u64) -> crate::rng::StreamRng {
        RngStream::new(seed, 7).rng()
    }

    fn cloud(n: usize, d: usize, seed: u64) -> Dataset {
        let mut r = rng(seed);
        let rows = (0..n).map(|_| (0..d).map(|_| r.random::<f64>()).collect()).collect();
        Dataset::from_points(rows).unwrap()
    }

    #[test]
    fn unif_box_interval_matches_expansion() {
        let data = Dataset::from_points(vec![vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(expanded_bounds(&data, 0.1), vec![(-0.1, 1.1)]);
        let cfg = GeneratorConfig::new(Approach::UnifBox).with_n_art(10_000);
        let out = generate(&data, &cfg, &mut rng(1)).unwrap();
        assert_eq!(out.len(), 10_000);
        assert!(out.values().iter().all(|v| (-0.1..=1.1).contains(v)));
        // mean of U(-0.1, 1.1) is 0.5 with standard error 1.2 / sqrt(12 * 10^4)
        let mean = out.values().iter().sum::<f64>() / 1e4;
        let se = 1.2 / (12.0f64 * 1e4).sqrt();
        assert!((mean - 0.5).abs() < 3.0 * se, "{mean}");
        assert!(out.labels().iter().all(|l| *l == crate::Label::Outlier));
    }

    #[test]
    fn unif_box_without_expansion_stays_in_box() {
        let data = cloud(40, 3, 2);
        let mut cfg = GeneratorConfig::new(Approach::UnifBox);
        cfg.bounds_expansion = 0.0;
        let out = generate(&data, &cfg, &mut rng(3)).unwrap();
        let b = data.bounds();
        for row in out.rows() {
            for (v, (lo, hi)) in row.iter().zip(&b) {
                assert!(lo <= v && v <= hi);
            }
        }
    }

    #[test]
    fn lhs_one_point_per_stratum() {
        let data = cloud(30, 2, 4);
        for n_art in [1, 3, 17, 50] {
            let cfg = GeneratorConfig::new(Approach::Lhs).with_n_art(n_art);
            let out = generate(&data, &cfg, &mut rng(n_art as u64)).unwrap();
            assert_eq!(out.len(), n_art);
            for (j, (lo, hi)) in data.bounds().into_iter().enumerate() {
                let mut seen = vec![0; n_art];
                for v in out.column(j) {
                    let s = (((v - lo) / (hi - lo)) * n_art as f64).floor() as usize;
                    seen[s.min(n_art - 1)] += 1;
                }
                assert!(seen.iter().all(|&c| c == 1), "{seen:?}");
            }
        }
    }

    #[test]
    fn unif_sphere_of_single_point_is_that_point() {
        let data = Dataset::from_points(vec![vec![0.3, -2.0]]).unwrap();
        let cfg = GeneratorConfig::new(Approach::UnifSphere).with_n_art(20);
        let out = generate(&data, &cfg, &mut rng(5)).unwrap();
        assert!(out.rows().all(|r| r == [0.3, -2.0]));
    }

    #[test]
    fn unif_sphere_inner_half_radius_has_quarter_mass() {
        let data = cloud(60, 2, 6);
        let ball = minimal_enclosing_ball(&data, 1e-3).unwrap();
        let cfg = GeneratorConfig::new(Approach::UnifSphere).with_n_art(10_000);
        let out = generate(&data, &cfg, &mut rng(7)).unwrap();
        let mut inner = 0;
        for row in out.rows() {
            let r = crate::data::dist(row, &ball.center);
            assert!(r <= ball.radius * (1.0 + 1e-3));
            if r <= ball.radius / 2.0 {
                inner += 1;
            }
        }
        let frac = inner as f64 / 1e4;
        // binomial standard error at p = 0.25 is about 0.0043
        assert!((frac - 0.25).abs() < 0.02, "{frac}");
    }

    #[test]
    fn mani_samp_stays_within_center_radius() {
        let data = cloud(50, 3, 8);
        let radii = average_knn_distances(&data, 10).unwrap();
        let cfg = GeneratorConfig::new(Approach::ManiSamp).with_n_art(500);
        let out = generate(&data, &cfg, &mut rng(9)).unwrap();
        for row in out.rows() {
            let ok = (0..data.len()).any(|i| crate::data::dist(row, data.row(i)) <= radii[i] * (1.0 + 1e-12));
            assert!(ok);
        }
        let small = cloud(10, 2, 1);
        assert!(generate(&small, &cfg, &mut rng(1)).is_err());
    }

    #[test]
    fn mani_samp_on_duplicates_returns_genuine_points() {
        let data = Dataset::from_points(vec![vec![1.0, 2.0]; 12]).unwrap();
        let cfg = GeneratorConfig::new(Approach::ManiSamp).with_n_art(30);
        let out = generate(&data, &cfg, &mut rng(10)).unwrap();
        assert!(out.rows().all(|r| r == [1.0, 2.0]));
    }

    #[test]
    fn dens_aprox_mean_within_clt_bound() {
        let rows = (0..1000).map(|i| vec![(i % 2) as f64, 3.0]).collect();
        let data = Dataset::from_points(rows).unwrap();
        let (mean, std) = mean_std(&data);
        assert_eq!(mean, vec![0.5, 3.0]);
        assert!((std[0] - (250.0f64 / 999.0).sqrt()).abs() < 1e-12);
        let cfg = GeneratorConfig::new(Approach::DensAprox).with_n_art(10_000);
        let out = generate(&data, &cfg, &mut rng(11)).unwrap();
        let m0 = out.column(0).sum::<f64>() / 1e4;
        assert!((m0 - 0.5).abs() < 4.0 * std[0] / 100.0);
        assert!(out.column(1).all(|v| (v - 3.0).abs() < 1e-7));
    }

    #[test]
    fn gauss_tail_lies_outside_three_sigma() {
        let rows = (0..200).map(|i| vec![(i as f64 * 0.37).sin(), i as f64]).collect();
        let data = Dataset::from_points(rows).unwrap();
        let (mean, std) = mean_std(&data);
        let cfg = GeneratorConfig::new(Approach::GaussTail).with_n_art(20_000);
        let out = generate(&data, &cfg, &mut rng(12)).unwrap();
        let mut beyond4 = 0;
        let mut right = 0;
        for v in out.column(0) {
            let z = (v - mean[0]) / std[0];
            assert!(z.abs() > 3.0);
            beyond4 += usize::from(z.abs() > 4.0);
            right += usize::from(z > 0.0);
        }
        let expected = normal_cdf(-4.0) / normal_cdf(-3.0);
        let frac = beyond4 as f64 / 20_000.0;
        let se = (expected * (1.0 - expected) / 20_000.0).sqrt();
        assert!((frac - expected).abs() < 4.0 * se, "{frac} vs {expected}");
        assert!((right as f64 / 20_000.0 - 0.5).abs() < 4.0 * 0.5 / 20_000f64.sqrt());
        for row in out.rows() {
            assert!(((row[1] - mean[1]) / std[1]).abs() > 3.0);
        }
    }

    #[test]
    fn inv_hist_probabilities_follow_one_minus_h() {
        let data = Dataset::from_points(vec![vec![0.1]; 4]).unwrap();
        let hist = InverseHistogram::with_bounds(&data, 4, vec![(0.0, 1.0)]).unwrap();
        let probs: Vec<f64> = (0..4).map(|c| hist.probability(c)).collect();
        for (p, e) in probs.iter().zip([0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]) {
            assert!((p - e).abs() < 1e-15);
        }
        let mut r = rng(13);
        let mut seen = [0usize; 4];
        for _ in 0..3000 {
            seen[hist.sample_cell(&mut r).unwrap() as usize] += 1;
        }
        assert_eq!(seen[0], 0);
        assert!(seen[1..].iter().all(|&c| (c as f64 - 1000.0).abs() < 120.0), "{seen:?}");
    }

    #[test]
    fn inv_hist_two_cell_grid_fills_the_empty_cell() {
        let data = Dataset::from_points(vec![vec![0.2], vec![0.3]]).unwrap();
        let hist = InverseHistogram::with_bounds(&data, 2, vec![(0.0, 1.0)]).unwrap();
        let mut r = rng(14);
        for _ in 0..200 {
            let mut out = Vec::new();
            hist.sample(&mut r, &mut out).unwrap();
            assert!((0.5..1.0).contains(&out[0]));
        }
    }

    #[test]
    fn inv_hist_sparse_grid_samples_every_empty_cell_uniformly() {
        let data = Dataset::from_points(vec![vec![0.05, 0.05], vec![0.95, 0.95]]).unwrap();
        let hist = InverseHistogram::with_bounds(&data, 3, vec![(0.0, 1.0), (0.0, 1.0)]).unwrap();
        assert_eq!(hist.cell_count(), 9);
        assert!(hist.probability(4) > hist.probability(0));
        let mut r = rng(15);
        let mut seen = [0usize; 9];
        for _ in 0..7000 {
            seen[hist.sample_cell(&mut r).unwrap() as usize] += 1;
        }
        assert_eq!(seen[0] + seen[8], 0);
        assert!(seen[1..8].iter().all(|&c| (c as f64 - 1000.0).abs() < 130.0), "{seen:?}");
    }

    #[test]
    fn inv_hist_rejects_huge_grids() {
        let data = cloud(5, 8, 16);
        let cfg = GeneratorConfig::new(Approach::InvHist);
        let err = generate(&data, &cfg, &mut rng(1)).unwrap_err();
        assert!(err.to_string().contains("dimensionality too high for invHist"));
        let ok = cloud(5, 7, 16);
        assert!(InverseHistogram::fit(&ok, 10, 0.2).is_ok());
    }

    #[test]
    fn generators_are_deterministic() {
        let data = cloud(40, 3, 17);
        for a in [Approach::UnifBox, Approach::Lhs, Approach::UnifSphere, Approach::ManiSamp, Approach::GaussTail] {
            let cfg = GeneratorConfig::new(a);
            let x = generate(&data, &cfg, &mut rng(18)).unwrap();
            let y = generate(&data, &cfg, &mut rng(18)).unwrap();
            assert_eq!(x, y, "{a}");
        }
    }
}
