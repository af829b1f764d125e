//! Approaches that perturb genuine instances.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{finish, mean_std, require_rows, GeneratorConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::neighbors::{knn_of_row, nearest_distance};

pub const BEPS_THRESHOLD: f64 = 0.1;
const SKEW_MIN_DENOM: f64 = 1e-8;

/// Relative noise `r_i / sum(r)` from standard normal draws; redrawn while the sum is tiny.
pub(crate) fn skew_noise<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let r: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let s: f64 = r.iter().sum();
        if s.abs() >= SKEW_MIN_DENOM {
            return r.into_iter().map(|v| v / s).collect();
        }
    }
}

/// A random genuine row plus `alpha * v_i * noise_i`, where `v` weights the
/// attributes by their share of the total standard deviation.
pub fn gen_skew_based<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 2, "skewBased")?;
    let alpha = cfg.alpha.unwrap_or(2.0);
    let (_, std) = mean_std(data);
    let total: f64 = std.iter().sum();
    if total <= 0.0 {
        return Err(Error::Generation("skewBased needs at least one non-constant attribute".into()));
    }
    let weights: Vec<f64> = std.iter().map(|s| s / total).collect();
    let n_art = cfg.n_art_for(data);
    let d = data.dim();
    let mut values = Vec::with_capacity(n_art * d);
    for _ in 0..n_art {
        let row = data.row(rng.random_range(0..data.len()));
        let noise = skew_noise(d, rng);
        values.extend(row.iter().zip(weights.iter().zip(&noise)).map(|(x, (v, e))| x + alpha * v * e));
    }
    finish(data, values)
}

/// A random genuine row with each value moved uniformly within
/// `[x - eps * x, x + eps * (1 - x)]`. Data must lie in the unit box.
pub fn gen_sur_reg<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "surReg")?;
    let eps = cfg.epsilon.unwrap_or(0.1);
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("surReg epsilon must lie in [0, 1], got {eps}")));
    }
    if data.values().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain("surReg requires unit-box data".into()));
    }
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * data.dim());
    for _ in 0..n_art {
        let row = data.row(rng.random_range(0..data.len()));
        for &x in row {
            let lo = x - eps * x;
            let hi = x + eps * (1.0 - x);
            let u: f64 = rng.random();
            values.push((lo + u * (hi - lo)).clamp(0.0, 1.0));
        }
    }
    finish(data, values)
}

/// Median distance of a genuine row to its nearest other genuine row; 0 for a single row.
pub fn default_infeas_epsilon(data: &Dataset) -> Result<f64> {
    if data.len() < 2 {
        return Ok(0.0);
    }
    let mut d: Vec<f64> = (0..data.len())
        .map(|i| knn_of_row(data, i, 1).map(|nn| nn[0].distance))
        .collect::<Result<_>>()?;
    d.sort_by(f64::total_cmp);
    let m = d.len();
    Ok(if m % 2 == 1 { d[m / 2] } else { 0.5 * (d[m / 2 - 1] + d[m / 2]) })
}

/// Perturbs every genuine row once with `alpha * N(mu, sigma)` noise and keeps
/// proposals at least `epsilon` from all genuine rows, then keeps perturbing
/// accepted outliers until `n_art` are collected.
pub fn gen_infeas_exam<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "infeasExam")?;
    let alpha = cfg.alpha.unwrap_or(0.05);
    let eps = match cfg.epsilon {
        Some(e) => e,
        None => default_infeas_epsilon(data)?,
    };
    let noise = Normal::new(cfg.noise_mean, cfg.noise_std)
        .map_err(|e| Error::InvalidParameter(format!("infeasExam noise: {e}")))?;
    let n_art = cfg.n_art_for(data);
    let d = data.dim();
    let mut accepted: Vec<f64> = Vec::with_capacity(n_art * d);
    let mut proposals = 0usize;
    let mut proposal = vec![0.0; d];

    let mut propose = |base: &[f64], rng: &mut R, accepted: &mut Vec<f64>| {
        for (p, x) in proposal.iter_mut().zip(base) {
            *p = x + noise.sample(rng) * alpha;
        }
        if nearest_distance(data.values(), d, &proposal) >= eps {
            accepted.extend_from_slice(&proposal);
        }
    };

    for row in data.rows() {
        if proposals >= cfg.max_proposals {
            break;
        }
        proposals += 1;
        propose(row, rng, &mut accepted);
    }
    while accepted.len() < n_art * d {
        if proposals >= cfg.max_proposals {
            return Err(Error::Generation("infeasExam did not converge".into()));
        }
        proposals += 1;
        let count = accepted.len() / d;
        let base = if count == 0 {
            data.row(rng.random_range(0..data.len())).to_vec()
        } else {
            let i = rng.random_range(0..count);
            accepted[i * d..(i + 1) * d].to_vec()
        };
        propose(&base, rng, &mut accepted);
    }
    accepted.truncate(n_art * d);
    finish(data, accepted)
}

/// Neighborhood size `ceil(5 log10 n)`.
pub fn beps_k(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    (5.0 * (n as f64).log10()).ceil() as usize
}

/// Boundary rows with their outward direction and mean neighbor distance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryReport {
    /// Neighborhood size actually used (clamped to `n - 1`).
    pub k: usize,
    pub indices: Vec<usize>,
    pub norms: Vec<Vec<f64>>,
    pub mean_neighbor_distance: Vec<f64>,
}

/// Marks a row as boundary when at least 90% of the unit vectors from its
/// neighbors point into the half-space of their sum.
pub fn detect_boundary_beps(data: &Dataset) -> Result<BoundaryReport> {
    require_rows(data, 2, "boundary detection")?;
    let n = data.len();
    let d = data.dim();
    let k = beps_k(n).clamp(1, n - 1);
    let mut report = BoundaryReport { k, indices: Vec::new(), norms: Vec::new(), mean_neighbor_distance: Vec::new() };
    for i in 0..n {
        let x = data.row(i);
        let nn = knn_of_row(data, i, k)?;
        let units: Vec<Vec<f64>> = nn
            .iter()
            .map(|nb| {
                let y = data.row(nb.index);
                if nb.distance > 0.0 {
                    x.iter().zip(y).map(|(a, b)| (a - b) / nb.distance).collect()
                } else {
                    vec![0.0; d]
                }
            })
            .collect();
        let mut norm = vec![0.0; d];
        for u in &units {
            norm.iter_mut().zip(u).for_each(|(s, v)| *s += v);
        }
        if norm.iter().all(|v| *v == 0.0) {
            continue;
        }
        let ahead = units
            .iter()
            .filter(|u| u.iter().zip(&norm).map(|(a, b)| a * b).sum::<f64>() >= 0.0)
            .count();
        let l = ahead as f64 / k as f64;
        if l >= 1.0 - BEPS_THRESHOLD - 1e-12 {
            report.indices.push(i);
            report.norms.push(norm);
            report
                .mean_neighbor_distance
                .push(nn.iter().map(|nb| nb.distance).sum::<f64>() / k as f64);
        }
    }
    Ok(report)
}

/// Shifts every boundary row along its unit norm by the mean
/// boundary-to-neighbor distance.
pub fn gen_neg_shift<R: Rng + ?Sized>(data: &Dataset, _cfg: &GeneratorConfig, _rng: &mut R) -> Result<Dataset> {
    let report = detect_boundary_beps(data)?;
    if report.indices.is_empty() {
        return Err(Error::Generation("negShift found no boundary instances".into()));
    }
    let scale = report.mean_neighbor_distance.iter().sum::<f64>() / report.indices.len() as f64;
    let mut values = Vec::with_capacity(report.indices.len() * data.dim());
    for (&i, norm) in report.indices.iter().zip(&report.norms) {
        let len = norm.iter().map(|v| v * v).sum::<f64>().sqrt();
        values.extend(data.row(i).iter().zip(norm).map(|(x, v)| x + v / len * scale));
    }
    finish(data, values)
}
