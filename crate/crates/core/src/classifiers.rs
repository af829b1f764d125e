//! Kernel reference classifiers and the hyperparameter grid search.
//!
//! `binary` is kernel regularized least squares on genuine (+1) versus
//! artificial (-1) rows. `one-class` is a Parzen density score over genuine
//! rows, thresholded so that roughly a `nu` fraction of the training rows
//! falls below it.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{sq_dist, Dataset};
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_NU: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "binary")]
    Binary,
    #[serde(rename = "binaryGrid")]
    BinaryGrid,
    #[serde(rename = "one-class")]
    OneClass,
}

impl ClassifierKind {
    pub fn id(self) -> &'static str {
        match self {
            ClassifierKind::Binary => "binary",
            ClassifierKind::BinaryGrid => "binaryGrid",
            ClassifierKind::OneClass => "one-class",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ClassifierKind::Binary, ClassifierKind::BinaryGrid, ClassifierKind::OneClass]
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown classifier kind `{s}`")))
    }
}

/// How to obtain a model from genuine rows and artificial outliers.
///
/// `binary` trains once with `lambda` and `kernel_width` (default `1/d`);
/// `binaryGrid` and `one-class` run the grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Display name in benchmark output; defaults to the kind id.
    pub name: Option<String>,
    pub kernel_width: Option<f64>,
    pub lambda: f64,
    pub nu: f64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self::new(ClassifierKind::Binary)
    }
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self { kind, name: None, kernel_width: None, lambda: DEFAULT_LAMBDA, nu: DEFAULT_NU }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.id().to_string())
    }

    pub fn width_for(&self, dim: usize) -> f64 {
        self.kernel_width.unwrap_or(1.0 / dim.max(1) as f64)
    }
}

/// Anything that scores instances; positive scores favor the normal class.
pub trait Classifier {
    fn signed_score(&self, x: &[f64]) -> f64;

    fn is_outlier(&self, x: &[f64]) -> bool {
        self.signed_score(x) < 0.0
    }

    /// Logistic map of the signed score to an outlier probability.
    fn outlier_probability(&self, x: &[f64]) -> f64 {
        score_to_probability(self.signed_score(x))
    }
}

/// Produces a classifier from genuine rows and artificial outliers.
pub trait Trainer {
    type Model: Classifier;

    fn fit(&self, genuine: &Dataset, arts: &Dataset) -> Result<Self::Model>;
}

pub fn score_to_probability(signed_score: f64) -> f64 {
    1.0 / (1.0 + signed_score.exp())
}

/// Gaussian kernel `exp(-|x - y|^2 / (2 s^2))`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], width: f64) -> f64 {
    (-sq_dist(x, y) / (2.0 * width * width)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyper {
    Binary { lambda: f64, width: f64 },
    OneClass { nu: f64, width: f64 },
}

impl fmt::Display for Hyper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyper::Binary { lambda, width } => write!(f, "lambda={lambda} s={width}"),
            Hyper::OneClass { nu, width } => write!(f, "nu={nu} s={width}"),
        }
    }
}

/// A fitted model; immutable and cheap to share.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub hyper: Hyper,
    support: Vec<f64>,
    dim: usize,
    coefficients: Vec<f64>,
    threshold: f64,
}

impl TrainedModel {
    pub fn support_len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn width(&self) -> f64 {
        match self.hyper {
            Hyper::Binary { width, .. } | Hyper::OneClass { width, .. } => width,
        }
    }

    /// Raw model output: the regression value for binary models, the mean
    /// kernel density for one-class models.
    pub fn raw_score(&self, x: &[f64]) -> f64 {
        let s = self.width();
        self.support
            .chunks_exact(self.dim)
            .zip(&self.coefficients)
            .map(|(xi, c)| c * gaussian_kernel(x, xi, s))
            .sum()
    }

    pub fn predict(&self, data: &Dataset) -> Vec<bool> {
        data.rows().map(|x| self.is_outlier(x)).collect()
    }
}

impl Classifier for TrainedModel {
    fn signed_score(&self, x: &[f64]) -> f64 {
        self.raw_score(x) - self.threshold
    }
}

fn check_width(width: f64) -> Result<()> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(format!("kernel width must be positive, got {width}")));
    }
    Ok(())
}

fn sq_dist_matrix(points: &[f64], dim: usize) -> Vec<f64> {
    let n = points.len() / dim.max(1);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let v = sq_dist(&points[i * dim..(i + 1) * dim], &points[j * dim..(j + 1) * dim]);
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}

fn kernel_from_sq(sq: &[f64], width: f64) -> Vec<f64> {
    let f = 1.0 / (2.0 * width * width);
    sq.iter().map(|v| (-v * f).exp()).collect()
}

fn index_of_quantile(len: usize, nu: f64) -> usize {
    ((nu * len as f64).floor() as usize).min(len - 1)
}

fn nu_threshold(mut scores: Vec<f64>, nu: f64) -> f64 {
    scores.sort_by(f64::total_cmp);
    let i = index_of_quantile(scores.len(), nu);
    scores[i]
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::InvalidParameter(format!("nu must lie in (0, 1], got {nu}")));
    }
    Ok(())
}

/// Parzen one-class model: outlier iff the mean kernel value to the training
/// rows is below the `floor(nu * n)`-th smallest training score.
pub fn train_one_class(norms: &Dataset, nu: f64, width: f64) -> Result<TrainedModel> {
    if norms.len() < 2 {
        return Err(Error::InvalidParameter("one-class training needs at least 2 rows".into()));
    }
    check_nu(nu)?;
    check_width(width)?;
    Ok(one_class_model(norms, nu, width))
}

/// The threshold is taken from the same scoring path used for prediction, so
/// no training row is flagged because of rounding.
fn one_class_model(norms: &Dataset, nu: f64, width: f64) -> TrainedModel {
    let n = norms.len();
    let mut model = TrainedModel {
        hyper: Hyper::OneClass { nu, width },
        support: norms.values().to_vec(),
        dim: norms.dim(),
        coefficients: vec![1.0 / n as f64; n],
        threshold: 0.0,
    };
    let scores: Vec<f64> = norms.rows().map(|x| model.raw_score(x)).collect();
    model.threshold = nu_threshold(scores, nu);
    model
}

struct BinaryFit {
    coefficients: Vec<f64>,
    /// `y_i - c_i / (A^-1)_ii`: decision value of row i under the model trained without it.
    loo: Vec<f64>,
}

fn stack_binary(norms: &Dataset, arts: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
    if norms.is_empty() || arts.is_empty() {
        return Err(Error::InvalidParameter("binary training needs both classes".into()));
    }
    if norms.dim() != arts.dim() {
        return Err(Error::DimensionMismatch { expected: norms.dim(), actual: arts.dim() });
    }
    let mut points = norms.values().to_vec();
    points.extend_from_slice(arts.values());
    let mut y = vec![1.0; norms.len()];
    y.resize(norms.len() + arts.len(), -1.0);
    Ok((points, y))
}

fn solve_binary(kernel: Vec<f64>, y: &[f64], ridge: f64, with_loo: bool) -> Result<BinaryFit> {
    let n = y.len();
    let mut a = DMatrix::from_vec(n, n, kernel);
    for i in 0..n {
        a[(i, i)] += ridge;
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numerical("kernel system is not positive definite".into()))?;
    let c = chol.solve(&DVector::from_column_slice(y));
    let loo = if with_loo {
        let inv = chol.inverse();
        (0..n).map(|i| y[i] - c[i] / inv[(i, i)]).collect()
    } else {
        Vec::new()
    };
    Ok(BinaryFit { coefficients: c.iter().copied().collect(), loo })
}

/// Kernel regularized least squares: solves `(K + lambda n I) c = y` with
/// `y = +1` for genuine rows and `-1` for artificial ones.
pub fn train_binary(norms: &Dataset, arts: &Dataset, lambda: f64, width: f64) -> Result<TrainedModel> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    check_width(width)?;
    let (points, y) = stack_binary(norms, arts)?;
    let kernel = kernel_from_sq(&sq_dist_matrix(&points, norms.dim()), width);
    let fit = solve_binary(kernel, &y, lambda * y.len() as f64, false)?;
    Ok(TrainedModel {
        hyper: Hyper::Binary { lambda, width },
        support: points,
        dim: norms.dim(),
        coefficients: fit.coefficients,
        threshold: 0.0,
    })
}

/// Hyperparameter value sets for the grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    pub nu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub width: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            nu: vec![0.001, 0.05, 0.1],
            lambda: vec![0.01, 0.1, 1.0, 10.0],
            width: (-4..=4).map(|e| 10f64.powi(e)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuneKind {
    Binary,
    OneClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub hyper: Hyper,
    pub err_art: f64,
    pub err_genu: f64,
    pub err: f64,
}

#[derive(Debug, Clone)]
pub struct Tuned {
    pub model: TrainedModel,
    pub hyper: Hyper,
    pub err: f64,
    /// Every evaluated combination in grid order.
    pub evaluations: Vec<Evaluation>,
}

fn evaluation(hyper: Hyper, err_art: f64, err_genu: f64) -> Evaluation {
    Evaluation { hyper, err_art, err_genu, err: 0.5 * err_art + 0.5 * err_genu }
}

/// Leave-one-out one-class errors. Removing row i from the training set
/// changes every other score by a rank-one term, so each left-out model is
/// evaluated exactly without refitting.
fn one_class_loo_err_genu(kernel: &[f64], n: usize, nu: f64) -> f64 {
    let sums: Vec<f64> = kernel.chunks_exact(n).map(|r| r.iter().sum()).collect();
    let m = (n - 1) as f64;
    let mut flagged = 0;
    let mut others = Vec::with_capacity(n - 1);
    for i in 0..n {
        others.clear();
        others.extend((0..n).filter(|&j| j != i).map(|j| (sums[j] - kernel[j * n + i]) / m));
        let threshold = nu_threshold(others.clone(), nu);
        let own = (sums[i] - kernel[i * n + i]) / m;
        flagged += usize::from(own < threshold);
    }
    flagged as f64 / n as f64
}

/// Exhaustive grid search minimizing `0.5 * ErrArt + 0.5 * ErrGenu`.
///
/// ErrArt is the fraction of artificial outliers predicted normal, ErrGenu the
/// fraction of genuine rows predicted outlier. Rows the model was trained on
/// are scored leave-one-out. Ties keep the earliest grid position, with the
/// first parameter (nu or lambda) as the outer loop.
pub fn tune_grid(norms: &Dataset, arts: &Dataset, kind: TuneKind, grids: &Grids) -> Result<Tuned> {
    if norms.len() < 2 || arts.is_empty() {
        return Err(Error::InvalidParameter(
            "tuning needs at least 2 genuine rows and one artificial outlier".into(),
        ));
    }
    if norms.dim() != arts.dim() {
        return Err(Error::DimensionMismatch { expected: norms.dim(), actual: arts.dim() });
    }
    let outer = match kind {
        TuneKind::Binary => &grids.lambda,
        TuneKind::OneClass => &grids.nu,
    };
    if outer.is_empty() || grids.width.is_empty() {
        return Err(Error::InvalidParameter("empty hyperparameter grid".into()));
    }
    grids.width.iter().try_for_each(|&w| check_width(w))?;

    let mut evaluations = Vec::with_capacity(outer.len() * grids.width.len());
    let mut best: Option<(f64, TrainedModel)> = None;
    let mut consider = |e: Evaluation, model: TrainedModel, best: &mut Option<(f64, TrainedModel)>| {
        if best.as_ref().is_none_or(|(err, _)| e.err < *err) {
            *best = Some((e.err, model));
        }
        evaluations.push(e);
    };
    match kind {
        TuneKind::OneClass => {
            grids.nu.iter().try_for_each(|&nu| check_nu(nu))?;
            let n = norms.len();
            let sq = sq_dist_matrix(norms.values(), norms.dim());
            let kernels: Vec<Vec<f64>> = grids.width.iter().map(|&w| kernel_from_sq(&sq, w)).collect();
            for &nu in &grids.nu {
                for (&width, kernel) in grids.width.iter().zip(&kernels) {
                    let model = one_class_model(norms, nu, width);
                    let err_art = arts.rows().filter(|x| !model.is_outlier(x)).count() as f64 / arts.len() as f64;
                    let err_genu = one_class_loo_err_genu(kernel, n, nu);
                    consider(evaluation(model.hyper, err_art, err_genu), model, &mut best);
                }
            }
        }
        TuneKind::Binary => {
            if grids.lambda.iter().any(|l| !(*l > 0.0)) {
                return Err(Error::InvalidParameter("lambda grid must be positive".into()));
            }
            let (points, y) = stack_binary(norms, arts)?;
            let n = y.len();
            let sq = sq_dist_matrix(&points, norms.dim());
            for &lambda in &grids.lambda {
                for &width in &grids.width {
                    let fit = solve_binary(kernel_from_sq(&sq, width), &y, lambda * n as f64, true)?;
                    let g = norms.len();
                    let err_genu = fit.loo[..g].iter().filter(|f| **f < 0.0).count() as f64 / g as f64;
                    let err_art = fit.loo[g..].iter().filter(|f| **f >= 0.0).count() as f64 / arts.len() as f64;
                    let model = TrainedModel {
                        hyper: Hyper::Binary { lambda, width },
                        support: points.clone(),
                        dim: norms.dim(),
                        coefficients: fit.coefficients,
                        threshold: 0.0,
                    };
                    consider(evaluation(model.hyper, err_art, err_genu), model, &mut best);
                }
            }
        }
    }
    let (err, model) = best.expect("grid is nonempty");
    Ok(Tuned { hyper: model.hyper, model, err, evaluations })
}

impl Trainer for ClassifierSpec {
    type Model = TrainedModel;

    fn fit(&self, genuine: &Dataset, arts: &Dataset) -> Result<TrainedModel> {
        match self.kind {
            ClassifierKind::Binary => train_binary(genuine, arts, self.lambda, self.width_for(genuine.dim())),
            ClassifierKind::BinaryGrid => Ok(tune_grid(genuine, arts, TuneKind::Binary, &Grids::default())?.model),
            ClassifierKind::OneClass => Ok(tune_grid(genuine, arts, TuneKind::OneClass, &Grids::default())?.model),
        }
    }
}
