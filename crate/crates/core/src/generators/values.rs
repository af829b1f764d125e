//! Approaches that recombine observed attribute values.

use std::collections::HashMap;

use rand::Rng;

use super::{finish, require_rows, GeneratorConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Every value is drawn from the observed values of its own attribute,
/// independently of the other attributes.
pub fn gen_margin_sample<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "marginSample")?;
    let n_art = cfg.n_art_for(data);
    let d = data.dim();
    let mut values = Vec::with_capacity(n_art * d);
    for _ in 0..n_art {
        for j in 0..d {
            values.push(data.row(rng.random_range(0..data.len()))[j]);
        }
    }
    finish(data, values)
}

/// Bookkeeping of a distBased run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DistBasedLog {
    /// `(attribute, value, attempts)` per unique value, in processing order, summed over runs.
    pub attempts: Vec<(usize, f64, usize)>,
    /// Attempts dropped because the replacement pool was empty.
    pub skipped: usize,
}

fn key(v: f64) -> u64 {
    if v == 0.0 { 0.0f64.to_bits() } else { v.to_bits() }
}

pub fn gen_dist_based<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    gen_dist_based_logged(data, cfg, rng).map(|(out, _)| out)
}

/// For each attribute and unique value `val` the loop runs from `count(val)`
/// up to the top frequency inclusive; every pass copies a random genuine row
/// and swaps the attribute for a random unique value other than `val` and the
/// row's own value.
pub fn gen_dist_based_logged<R: Rng + ?Sized>(
    data: &Dataset,
    cfg: &GeneratorConfig,
    rng: &mut R,
) -> Result<(Dataset, DistBasedLog)> {
    require_rows(data, 1, "distBased")?;
    if cfg.dist_based_runs == 0 {
        return Err(Error::InvalidParameter("distBased needs at least one run".into()));
    }
    let d = data.dim();
    let columns: Vec<(Vec<f64>, HashMap<u64, usize>)> = (0..d)
        .map(|j| {
            let mut counts: HashMap<u64, usize> = HashMap::new();
            let mut uniq = Vec::new();
            for v in data.column(j) {
                let c = counts.entry(key(v)).or_default();
                if *c == 0 {
                    uniq.push(v);
                }
                *c += 1;
            }
            uniq.sort_by(f64::total_cmp);
            (uniq, counts)
        })
        .collect();

    let mut log = DistBasedLog::default();
    let mut values = Vec::new();
    for run in 0..cfg.dist_based_runs {
        let mut slot = 0;
        for (j, (uniq, counts)) in columns.iter().enumerate() {
            let count_freq = counts.values().copied().max().unwrap_or(0);
            let position: HashMap<u64, usize> = uniq.iter().enumerate().map(|(p, v)| (key(*v), p)).collect();
            for (vi, &val) in uniq.iter().enumerate() {
                let count_val = counts[&key(val)];
                let attempts = count_freq - count_val + 1;
                if run == 0 {
                    log.attempts.push((j, val, attempts));
                } else {
                    log.attempts[slot].2 += attempts;
                }
                slot += 1;
                for _ in 0..attempts {
                    let row = data.row(rng.random_range(0..data.len()));
                    let xi = position[&key(row[j])];
                    let mut excluded = [vi, xi];
                    excluded.sort_unstable();
                    let excluded: &[usize] = if vi == xi { &excluded[..1] } else { &excluded };
                    let pool = uniq.len() - excluded.len();
                    if pool == 0 {
                        log.skipped += 1;
                        continue;
                    }
                    let mut pick = rng.random_range(0..pool);
                    for &e in excluded {
                        if pick >= e {
                            pick += 1;
                        }
                    }
                    let start = values.len();
                    values.extend_from_slice(row);
                    values[start + j] = uniq[pick];
                }
            }
        }
    }
    Ok((finish(data, values)?, log))
}

/// Copies a random genuine row and pushes two distinct random attributes (one
/// when `d = 2`) to their column minimum or maximum.
pub fn gen_bound_val<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    require_rows(data, 1, "boundVal")?;
    let d = data.dim();
    if d < 2 {
        return Err(Error::Generation("boundVal needs at least 2 attributes".into()));
    }
    let bounds = data.bounds();
    let changed = if d == 2 { 1 } else { 2 };
    let n_art = cfg.n_art_for(data);
    let mut values = Vec::with_capacity(n_art * d);
    for _ in 0..n_art {
        let start = values.len();
        values.extend_from_slice(data.row(rng.random_range(0..data.len())));
        for j in rand::seq::index::sample(rng, d, changed) {
            let (lo, hi) = bounds[j];
            values[start + j] = if rng.random::<bool>() { hi } else { lo };
        }
    }
    finish(data, values)
}
