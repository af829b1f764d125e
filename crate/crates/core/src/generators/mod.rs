//! Artificial outlier generators.
//!
//! Every generator is a function of the genuine data, a [`GeneratorConfig`]
//! and a random stream; the same three inputs always give the same output.
//! Outputs are tagged `Outlier` / `Artificial` and keep the attribute names.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

mod negselect;
mod sampling;
mod shifting;
mod values;

pub use negselect::{gen_neg_select, match_degree, Detector};
pub use sampling::{
    expanded_bounds, gen_dens_aprox, gen_gauss_tail, gen_inv_hist, gen_lhs, gen_mani_samp,
    gen_unif_box, gen_unif_sphere, InverseHistogram, MAX_HIST_CELLS,
};
pub use shifting::{
    beps_k, default_infeas_epsilon, detect_boundary_beps, gen_infeas_exam, gen_neg_shift,
    gen_skew_based, gen_sur_reg, BoundaryReport, BEPS_THRESHOLD,
};
pub use values::{gen_bound_val, gen_dist_based, gen_dist_based_logged, gen_margin_sample, DistBasedLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Approach {
    UnifBox,
    Lhs,
    UnifSphere,
    ManiSamp,
    DensAprox,
    GaussTail,
    InvHist,
    MarginSample,
    DistBased,
    BoundVal,
    SkewBased,
    SurReg,
    InfeasExam,
    NegShift,
    NegSelect,
}

impl Approach {
    pub const ALL: [Approach; 15] = [
        Approach::UnifBox,
        Approach::Lhs,
        Approach::UnifSphere,
        Approach::ManiSamp,
        Approach::DensAprox,
        Approach::GaussTail,
        Approach::InvHist,
        Approach::MarginSample,
        Approach::DistBased,
        Approach::BoundVal,
        Approach::SkewBased,
        Approach::SurReg,
        Approach::InfeasExam,
        Approach::NegShift,
        Approach::NegSelect,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Approach::UnifBox => "unifBox",
            Approach::Lhs => "lhs",
            Approach::UnifSphere => "unifSphere",
            Approach::ManiSamp => "maniSamp",
            Approach::DensAprox => "densAprox",
            Approach::GaussTail => "gaussTail",
            Approach::InvHist => "invHist",
            Approach::MarginSample => "marginSample",
            Approach::DistBased => "distBased",
            Approach::BoundVal => "boundVal",
            Approach::SkewBased => "skewBased",
            Approach::SurReg => "surReg",
            Approach::InfeasExam => "infeasExam",
            Approach::NegShift => "negShift",
            Approach::NegSelect => "negSelect",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Approach::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown generation approach `{s}`")))
    }
}

/// Constants of the negative-selection detector optimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegSelectParams {
    /// Detector radius `r`, also the width of the match kernel.
    pub radius: f64,
    /// Base of the step-size schedule `eta0^(-iter / tau)`.
    pub eta0: f64,
    pub tau: f64,
    /// Maximum age `t` before a detector stuck near genuine data is replaced.
    pub max_age: u32,
    pub k: usize,
    pub max_iter: usize,
}

impl Default for NegSelectParams {
    fn default() -> Self {
        Self {
            radius: 0.1,
            eta0: 2.0,
            tau: 25.0,
            max_age: 5,
            k: 10,
            max_iter: 100,
        }
    }
}

/// Approach identifier plus every tunable parameter. Only the fields the
/// chosen approach uses are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub approach: Approach,
    /// Display name in benchmark output; defaults to the approach id.
    pub name: Option<String>,
    /// Number of artificial instances; `None` means the number of genuine rows.
    pub n_art: Option<usize>,
    /// Relative expansion of the attribute bounds on each side (unifBox, negSelect).
    pub bounds_expansion: f64,
    /// Relative expansion of the histogram grid on each side (invHist).
    pub hist_expansion: f64,
    pub hist_bins: usize,
    /// Neighbors for maniSamp.
    pub k: usize,
    /// surReg tightness in `[0, 1]` (default 0.1), or the infeasExam distance
    /// threshold (default: median 1-NN distance among the genuine rows).
    pub epsilon: Option<f64>,
    /// skewBased noise scale (default 2) or infeasExam noise scale (default 0.05).
    pub alpha: Option<f64>,
    pub noise_mean: f64,
    pub noise_std: f64,
    pub max_proposals: usize,
    pub dist_based_runs: usize,
    pub ball_rel_tol: f64,
    pub neg_select: NegSelectParams,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self::new(Approach::UnifBox)
    }
}

impl GeneratorConfig {
    pub fn new(approach: Approach) -> Self {
        Self {
            approach,
            name: None,
            n_art: None,
            bounds_expansion: 0.1,
            hist_expansion: 0.2,
            hist_bins: 10,
            k: 10,
            epsilon: None,
            alpha: None,
            noise_mean: 0.0,
            noise_std: 1.0,
            max_proposals: 1_000_000,
            dist_based_runs: 1,
            ball_rel_tol: crate::ball::DEFAULT_REL_TOL,
            neg_select: NegSelectParams::default(),
        }
    }

    pub fn with_n_art(mut self, n_art: usize) -> Self {
        self.n_art = Some(n_art);
        self
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.approach.id().to_string())
    }

    pub(crate) fn n_art_for(&self, data: &Dataset) -> usize {
        self.n_art.unwrap_or(data.len())
    }
}

/// Runs the configured approach on `data`.
pub fn generate<R: Rng + ?Sized>(data: &Dataset, cfg: &GeneratorConfig, rng: &mut R) -> Result<Dataset> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    match cfg.approach {
        Approach::UnifBox => gen_unif_box(data, cfg, rng),
        Approach::Lhs => gen_lhs(data, cfg, rng),
        Approach::UnifSphere => gen_unif_sphere(data, cfg, rng),
        Approach::ManiSamp => gen_mani_samp(data, cfg, rng),
        Approach::DensAprox => gen_dens_aprox(data, cfg, rng),
        Approach::GaussTail => gen_gauss_tail(data, cfg, rng),
        Approach::InvHist => gen_inv_hist(data, cfg, rng),
        Approach::MarginSample => gen_margin_sample(data, cfg, rng),
        Approach::DistBased => gen_dist_based(data, cfg, rng),
        Approach::BoundVal => gen_bound_val(data, cfg, rng),
        Approach::SkewBased => gen_skew_based(data, cfg, rng),
        Approach::SurReg => gen_sur_reg(data, cfg, rng),
        Approach::InfeasExam => gen_infeas_exam(data, cfg, rng),
        Approach::NegShift => gen_neg_shift(data, cfg, rng),
        Approach::NegSelect => gen_neg_select(data, cfg, rng),
    }
}

pub(crate) const SIGMA_FLOOR: f64 = 1e-9;

/// Per-attribute mean and sample standard deviation (n - 1 denominator).
pub(crate) fn mean_std(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let n = data.len() as f64;
    let d = data.dim();
    let mut mean = vec![0.0; d];
    for row in data.rows() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for row in data.rows() {
        var.iter_mut()
            .zip(row.iter().zip(&mean))
            .for_each(|(s, (v, m))| *s += (v - m) * (v - m));
    }
    let denom = (n - 1.0).max(1.0);
    let std = var.into_iter().map(|s| (s / denom).sqrt()).collect();
    (mean, std)
}

pub(crate) fn require_rows(data: &Dataset, min: usize, what: &str) -> Result<()> {
    if data.len() < min {
        return Err(Error::Generation(format!(
            "{what} needs at least {min} genuine rows, got {}",
            data.len()
        )));
    }
    Ok(())
}

pub(crate) fn finish(data: &Dataset, values: Vec<f64>) -> Result<Dataset> {
    if values.is_empty() {
        return Ok(Dataset::empty(data.names().to_vec()));
    }
    Dataset::artificial(data.names().to_vec(), values)
}
