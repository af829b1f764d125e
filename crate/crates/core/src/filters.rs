//! Filters that select interesting artificial outliers after generation.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{Classifier, Trainer};
use crate::data::{dist, sq_dist, Dataset};
use crate::dist::normal_sf;
use crate::error::{Error, Result};
use crate::generators::default_infeas_epsilon;
use crate::neighbors::nearest_distance;

pub const DEFAULT_MAX_LOOPS: usize = 50;
pub const COMMITTEE_SUBSAMPLE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FilterKind {
    ClassifierLoop,
    QueryByCommittee,
    Thinning,
    Kdmax,
    DistanceThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeepMode {
    #[serde(rename = "keep-outlier")]
    Outlier,
    #[serde(rename = "keep-normal")]
    Normal,
}

impl FilterKind {
    pub const ALL: [FilterKind; 5] = [
        FilterKind::ClassifierLoop,
        FilterKind::QueryByCommittee,
        FilterKind::Thinning,
        FilterKind::Kdmax,
        FilterKind::DistanceThreshold,
    ];

    pub fn id(self) -> &'static str {
        match self {
            FilterKind::ClassifierLoop => "classifierLoop",
            FilterKind::QueryByCommittee => "queryByCommittee",
            FilterKind::Thinning => "thinning",
            FilterKind::Kdmax => "kdmax",
            FilterKind::DistanceThreshold => "distanceThreshold",
        }
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown filter `{s}`")))
    }
}

impl std::str::FromStr for KeepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keep-outlier" => Ok(KeepMode::Outlier),
            "keep-normal" => Ok(KeepMode::Normal),
            _ => Err(Error::Config(format!("unknown keep mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub kind: FilterKind,
    pub max_rem: usize,
    pub committee_size: usize,
    pub target_count: Option<usize>,
    pub k: usize,
    pub dmax: Option<f64>,
    pub keep_mode: KeepMode,
    /// Distance threshold; `None` uses the median nearest-neighbor distance of the genuine rows.
    pub epsilon: Option<f64>,
    pub max_loops: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self::new(FilterKind::DistanceThreshold)
    }
}

impl FilterConfig {
    pub fn new(kind: FilterKind) -> Self {
        Self {
            kind,
            max_rem: 0,
            committee_size: 5,
            target_count: None,
            k: 10,
            dmax: None,
            keep_mode: KeepMode::Outlier,
            epsilon: None,
            max_loops: DEFAULT_MAX_LOOPS,
        }
    }
}

/// Outcome of the classifier loop.
#[derive(Debug, Clone)]
pub struct LoopOutcome {
    pub arts: Dataset,
    /// Replacements made in each pass.
    pub replaced: Vec<usize>,
}

/// Trains on genuine rows plus `arts`, replaces every artificial row the model
/// calls normal with a fresh one from `resupply`, and repeats until at most
/// `max_rem` rows were replaced in a pass or `max_loops` passes ran.
pub fn filter_classifier_loop<T: Trainer>(
    data: &Dataset,
    arts: &Dataset,
    trainer: &T,
    mut resupply: impl FnMut(usize) -> Result<Dataset>,
    max_rem: usize,
    max_loops: usize,
) -> Result<LoopOutcome> {
    if max_loops == 0 {
        return Err(Error::InvalidParameter("max_loops must be at least 1".into()));
    }
    let d = arts.dim();
    let mut values = arts.values().to_vec();
    let mut replaced = Vec::new();
    for _ in 0..max_loops {
        let current = Dataset::artificial(arts.names().to_vec(), values.clone())?;
        let model = trainer.fit(data, &current)?;
        let normal: Vec<usize> = (0..current.len()).filter(|&i| !model.is_outlier(current.row(i))).collect();
        if !normal.is_empty() {
            let fresh = resupply(normal.len())?;
            if fresh.len() != normal.len() || fresh.dim() != d {
                return Err(Error::Generation(format!(
                    "resupply returned {} rows of width {}, expected {} of width {d}",
                    fresh.len(),
                    fresh.dim(),
                    normal.len()
                )));
            }
            for (slot, &i) in normal.iter().enumerate() {
                values[i * d..(i + 1) * d].copy_from_slice(fresh.row(slot));
            }
        }
        replaced.push(normal.len());
        if normal.len() <= max_rem {
            break;
        }
    }
    Ok(LoopOutcome { arts: Dataset::artificial(arts.names().to_vec(), values)?, replaced })
}

/// Probability of keeping an instance given the committee margin:
/// the upper tail of `N(m/2, sqrt(m)/2)` at `(m + margin) / 2`.
pub fn committee_keep_probability(margin: f64, m: usize) -> f64 {
    normal_sf(margin / (m as f64).sqrt())
}

fn half_sample<R: Rng + ?Sized>(data: &Dataset, min: usize, rng: &mut R) -> Dataset {
    let n = data.len();
    let take = ((n as f64 * COMMITTEE_SUBSAMPLE).ceil() as usize).clamp(min.min(n), n);
    let mut idx = sample(rng, n, take).into_vec();
    idx.sort_unstable();
    data.subset(&idx)
}

/// Per-instance committee margins `sum(P_out - P_norm)` over `m` members,
/// each trained on half of the genuine and half of the artificial rows.
pub fn committee_margins<T: Trainer, R: Rng + ?Sized>(
    data: &Dataset,
    arts: &Dataset,
    trainer: &T,
    m: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InvalidParameter("query by committee needs at least 2 members".into()));
    }
    let mut margins = vec![0.0; arts.len()];
    for _ in 0..m {
        let genuine = half_sample(data, 2, rng);
        let artificial = half_sample(arts, 1, rng);
        let model = trainer.fit(&genuine, &artificial)?;
        for (mg, x) in margins.iter_mut().zip(arts.rows()) {
            *mg += 2.0 * model.outlier_probability(x) - 1.0;
        }
    }
    Ok(margins)
}

/// Keeps each artificial row with the committee keep probability.
pub fn filter_query_by_committee<T: Trainer, R: Rng + ?Sized>(
    data: &Dataset,
    arts: &Dataset,
    trainer: &T,
    m: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let margins = committee_margins(data, arts, trainer, m, rng)?;
    let keep: Vec<bool> = margins
        .iter()
        .map(|&mg| rng.random::<f64>() < committee_keep_probability(mg, m))
        .collect();
    Ok(arts.filter_rows(|i, _| keep[i]))
}

fn nearest_alive(points: &Dataset, alive: &[bool], i: usize) -> (f64, usize) {
    let x = points.row(i);
    let mut best = (f64::INFINITY, usize::MAX);
    for j in 0..points.len() {
        if j != i && alive[j] {
            let d = sq_dist(x, points.row(j));
            if d < best.0 {
                best = (d, j);
            }
        }
    }
    best
}

/// Repeatedly takes the closest pair and drops the member with the smaller
/// nearest-neighbor distance (the lower index on a tie) until `target` rows remain.
pub fn filter_thinning(arts: &Dataset, target: usize) -> Result<Dataset> {
    if target == 0 {
        return Err(Error::InvalidParameter("thinning target must be positive".into()));
    }
    if target > arts.len() {
        return Err(Error::InvalidParameter(format!(
            "thinning target {target} exceeds {} instances",
            arts.len()
        )));
    }
    let n = arts.len();
    let mut alive = vec![true; n];
    let mut nn: Vec<(f64, usize)> = (0..n).map(|i| nearest_alive(arts, &alive, i)).collect();
    for _ in target..n {
        let (i, j) = (0..n)
            .filter(|&i| alive[i])
            .map(|i| (nn[i].0, i.min(nn[i].1), i.max(nn[i].1)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map(|(_, i, j)| (i, j))
            .expect("at least two rows alive");
        let drop = if nn[j].0 < nn[i].0 { j } else { i };
        alive[drop] = false;
        for k in 0..n {
            if alive[k] && nn[k].1 == drop {
                nn[k] = nearest_alive(arts, &alive, k);
            }
        }
    }
    Ok(arts.filter_rows(|i, _| alive[i]))
}

/// Flags each artificial row as outlying when at most `k` genuine rows lie
/// strictly within `dmax`, and keeps the rows matching `mode`.
pub fn filter_unsupervised_kdmax(data: &Dataset, arts: &Dataset, k: usize, dmax: f64, mode: KeepMode) -> Result<Dataset> {
    if !(dmax > 0.0) {
        return Err(Error::InvalidParameter(format!("dmax must be positive, got {dmax}")));
    }
    Ok(arts.filter_rows(|_, x| {
        let count = data.rows().filter(|g| dist(g, x) < dmax).count();
        let outlier = count <= k;
        outlier == (mode == KeepMode::Outlier)
    }))
}

/// Keeps artificial rows whose nearest genuine row is at least `eps` away.
pub fn filter_distance_threshold(normals: &Dataset, arts: &Dataset, eps: f64) -> Result<Dataset> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {eps}")));
    }
    Ok(arts.filter_rows(|_, x| nearest_distance(normals.values(), normals.dim(), x) >= eps))
}

/// Runs the filter selected by `cfg`. `resupply` is only called by the
/// classifier loop and `trainer` only by the classifier-based filters.
pub fn apply_filter<T: Trainer, R: Rng + ?Sized>(
    data: &Dataset,
    arts: &Dataset,
    cfg: &FilterConfig,
    trainer: &T,
    resupply: impl FnMut(usize) -> Result<Dataset>,
    rng: &mut R,
) -> Result<Dataset> {
    match cfg.kind {
        FilterKind::ClassifierLoop => {
            Ok(filter_classifier_loop(data, arts, trainer, resupply, cfg.max_rem, cfg.max_loops)?.arts)
        }
        FilterKind::QueryByCommittee => filter_query_by_committee(data, arts, trainer, cfg.committee_size, rng),
        FilterKind::Thinning => {
            let target = cfg
                .target_count
                .ok_or_else(|| Error::InvalidParameter("thinning needs a target count".into()))?;
            filter_thinning(arts, target)
        }
        FilterKind::Kdmax => {
            let dmax = cfg.dmax.ok_or_else(|| Error::InvalidParameter("kdmax needs dmax".into()))?;
            filter_unsupervised_kdmax(data, arts, cfg.k, dmax, cfg.keep_mode)
        }
        FilterKind::DistanceThreshold => {
            let eps = match cfg.epsilon {
                Some(e) => e,
                None => default_infeas_epsilon(data)?,
            };
            filter_distance_threshold(data, arts, eps)
        }
    }
}
