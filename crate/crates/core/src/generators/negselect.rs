//! Real-valued negative selection: detectors pushed away from genuine data and each other.

use rand::Rng;

use super::sampling::{expanded_bounds, sample_box};
use super::{finish, require_rows, GeneratorConfig};
use crate::data::{sq_dist, Dataset};
use crate::error::{Error, Result};
use crate::neighbors::k_nearest_neighbors;

#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub position: Vec<f64>,
    pub age: u32,
}

/// Gaussian overlap `exp(-|a - b|^2 / (2 r^2))` of two detectors.
pub fn match_degree(a: &[f64], b: &[f64], radius: f64) -> f64 {
    (-sq_dist(a, b) / (2.0 * radius * radius)).exp()
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) }
}

/// Runs the detector optimization and returns the final detectors.
///
/// Iterations are `0..max_iter`, so `max_iter = 0` returns the initial unifBox draw.
pub fn run_neg_select<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Vec<Detector>> {
    require_rows(data, 1, "negSelect")?;
    let p = &cfg.neg_select;
    if !(p.radius > 0.0) || p.k == 0 {
        return Err(Error::InvalidParameter("negSelect needs radius > 0 and k >= 1".into()));
    }
    let n_art = cfg.n_art_for(data);
    let d = data.dim();
    let k = p.k.min(data.len());
    let bounds = expanded_bounds(data, cfg.bounds_expansion);
    let fresh = |rng: &mut R| {
        let mut v = Vec::with_capacity(d);
        sample_box(&bounds, rng, &mut v);
        Detector { position: v, age: 0 }
    };
    let mut detectors: Vec<Detector> = (0..n_art).map(|_| fresh(rng)).collect();

    for iter in 0..p.max_iter {
        let eta = p.eta0.powf(-(iter as f64) / p.tau);
        for idx in 0..detectors.len() {
            let nn = k_nearest_neighbors(data, &detectors[idx].position, k, None)?;
            let dists: Vec<f64> = nn.iter().map(|n| n.distance).collect();
            if median(&dists) < p.radius {
                if detectors[idx].age > p.max_age {
                    detectors[idx] = fresh(rng);
                    continue;
                }
                let det = &mut detectors[idx];
                det.age += 1;
                let mut dir = vec![0.0; d];
                for n in &nn {
                    let y = data.row(n.index);
                    dir.iter_mut().zip(det.position.iter().zip(y)).for_each(|(s, (a, b))| *s += a - b);
                }
                det.position
                    .iter_mut()
                    .zip(&dir)
                    .for_each(|(x, v)| *x += eta * v / nn.len() as f64);
            } else {
                let me = detectors[idx].position.clone();
                let mut dir = vec![0.0; d];
                let mut weight = 0.0;
                for other in &detectors {
                    let m = match_degree(&me, &other.position, p.radius);
                    weight += m;
                    dir.iter_mut().zip(me.iter().zip(&other.position)).for_each(|(s, (a, b))| *s += m * (a - b));
                }
                let det = &mut detectors[idx];
                det.age = 0;
                det.position
                    .iter_mut()
                    .zip(&dir)
                    .for_each(|(x, v)| *x += eta * v / weight);
            }
        }
    }
    Ok(detectors)
}

/// Final detector centers as artificial outliers.
pub fn gen_neg_select<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    let detectors = run_neg_select(data, cfg, rng)?;
    let values = detectors.into_iter().flat_map(|d| d.position).collect();
    finish(data, values)
}
