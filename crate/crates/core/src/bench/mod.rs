//! The repeated train/test workflow, result persistence and the summary report.
//!
//! For every dataset, classifier and repetition the normal rows are split into
//! train and test parts. Each generator in turn supplies the training
//! outliers; the trained model is then scored against fresh outliers from
//! every generator and against the dataset's genuine outliers, each mixed with
//! the held-out normal rows.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{Classifier, ClassifierSpec, Trainer};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::generators::{generate, GeneratorConfig};
use crate::preprocess::{load_csv, preprocess, split_for_workflow, LabelSpec, DEFAULT_CAP, DEFAULT_TRAIN_FRACTION};
use crate::rng::{stream_id_for, RngStream};
use crate::stats::{mcc, Confusion};

mod persist;
mod report;

pub use persist::{
    read_datasets_csv, read_records, read_records_csv, read_records_jsonl, write_datasets_csv, write_failures_csv,
    write_records, write_records_csv, write_records_jsonl, OutputFormat,
};
pub use report::{render_text, report_summary, write_report, Factor, FactorReport, KendallRow, LevelSummary, PairTest, StatReport};

/// Test-set label for the dataset's own outliers.
pub const TRUE_OUTS: &str = "trueOuts";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub path: PathBuf,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default = "default_outlier_label")]
    pub outlier_label: String,
    /// Defaults to the file stem.
    #[serde(default)]
    pub name: Option<String>,
}

fn default_label_column() -> String {
    "class".into()
}

fn default_outlier_label() -> String {
    "outlier".into()
}

impl DatasetEntry {
    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.path.display().to_string())
        })
    }

    pub fn label_spec(&self) -> LabelSpec {
        LabelSpec::new(self.label_column.clone(), self.outlier_label.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub reps: usize,
    pub train_fraction: f64,
    pub base_seed: u64,
    /// Row cap applied by ratio-preserving downsampling.
    pub cap: usize,
    /// Significance level for the pairwise tests in the report.
    pub alpha: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
    #[serde(rename = "classifier")]
    pub classifiers: Vec<ClassifierSpec>,
    #[serde(rename = "generator")]
    pub generators: Vec<GeneratorConfig>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            reps: 20,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            base_seed: 0,
            cap: DEFAULT_CAP,
            alpha: 0.05,
            output: None,
            format: OutputFormat::Csv,
            datasets: Vec::new(),
            classifiers: Vec::new(),
            generators: Vec::new(),
        }
    }
}

impl BenchConfig {
    /// Parses a TOML config; relative dataset paths resolve against the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: BenchConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.datasets {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train_fraction must lie in (0, 1), got {}", self.train_fraction)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.classifiers.is_empty() || self.generators.is_empty() {
            return Err(Error::Config("need at least one classifier and one generator".into()));
        }
        unique("classifier", self.classifiers.iter().map(ClassifierSpec::display_name))?;
        unique("generator", self.generators.iter().map(GeneratorConfig::display_name))?;
        if self.generators.iter().any(|g| g.display_name() == TRUE_OUTS) {
            return Err(Error::Config(format!("`{TRUE_OUTS}` is reserved")));
        }
        Ok(())
    }
}

fn unique(what: &str, names: impl Iterator<Item = String>) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.clone()) {
            return Err(Error::Config(format!("duplicate {what} name `{n}`")));
        }
    }
    Ok(())
}

/// One evaluation: a model trained with `train_gen` outliers, tested on `test_outs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalRecord {
    pub dataset: String,
    pub classifier: String,
    pub train_gen: String,
    pub test_outs: String,
    pub rep: usize,
    /// Stream id of the cell's random stream (combine with the base seed to replay it).
    pub seed: u64,
    /// `None` when the cell failed.
    pub mcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CellFailure {
    pub dataset: String,
    pub classifier: String,
    pub train_gen: String,
    pub test_outs: Option<String>,
    pub rep: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    pub n: usize,
    pub d: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<EvalRecord>,
    pub failures: Vec<CellFailure>,
    pub datasets: Vec<DatasetMeta>,
}

pub fn expected_record_count(datasets: usize, classifiers: usize, reps: usize, generators: usize) -> usize {
    datasets * classifiers * reps * generators * (generators + 1)
}

/// Loads every configured dataset and runs the workflow.
pub fn run_workflow(cfg: &BenchConfig) -> Result<RunOutput> {
    cfg.validate()?;
    if cfg.datasets.is_empty() {
        return Err(Error::Config("need at least one dataset".into()));
    }
    let loaded = cfg
        .datasets
        .iter()
        .map(|d| Ok((d.display_name(), load_csv(&d.path, &d.label_spec())?)))
        .collect::<Result<Vec<_>>>()?;
    run_on_datasets(cfg, &loaded)
}

/// Runs the workflow on in-memory datasets; `cfg.datasets` is ignored.
pub fn run_on_datasets(cfg: &BenchConfig, datasets: &[(String, Dataset)]) -> Result<RunOutput> {
    cfg.validate()?;
    unique("dataset", datasets.iter().map(|(n, _)| n.clone()))?;
    let prepared = datasets
        .iter()
        .map(|(name, data)| {
            let mut rng = RngStream::new(cfg.base_seed, stream_id_for(&[name, "preprocess"])).rng();
            Ok((name.clone(), preprocess(data, cfg.cap, &mut rng)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for di in 0..prepared.len() {
        for ci in 0..cfg.classifiers.len() {
            for rep in 0..cfg.reps {
                for gi in 0..cfg.generators.len() {
                    cells.push((di, ci, rep, gi));
                }
            }
        }
    }
    let outputs: Vec<(Vec<EvalRecord>, Vec<CellFailure>)> = cells
        .par_iter()
        .map(|&(di, ci, rep, gi)| run_cell(cfg, &prepared[di].0, &prepared[di].1, &cfg.classifiers[ci], gi, rep))
        .collect();

    let mut out = RunOutput {
        datasets: prepared
            .iter()
            .map(|(name, d)| DatasetMeta { name: name.clone(), n: d.len(), d: d.dim() })
            .collect(),
        ..RunOutput::default()
    };
    for (records, failures) in outputs {
        out.records.extend(records);
        out.failures.extend(failures);
    }
    Ok(out)
}

fn evaluate(model: &impl Classifier, outs: &Dataset, test_norms: &Dataset) -> Result<f64> {
    if outs.is_empty() {
        return Err(Error::Domain("no outliers to test on".into()));
    }
    let mut c = Confusion::default();
    for x in outs.rows() {
        if model.is_outlier(x) { c.tp += 1 } else { c.fn_ += 1 }
    }
    for x in test_norms.rows() {
        if model.is_outlier(x) { c.fp += 1 } else { c.tn += 1 }
    }
    mcc(c)
}

fn run_cell(
    cfg: &BenchConfig,
    dataset: &str,
    data: &Dataset,
    classifier: &ClassifierSpec,
    gi: usize,
    rep: usize,
) -> (Vec<EvalRecord>, Vec<CellFailure>) {
    let cname = classifier.display_name();
    let train_gen = cfg.generators[gi].display_name();
    let rep_key = rep.to_string();
    let stream_id = stream_id_for(&[dataset, &cname, &train_gen, &rep_key]);
    let cell = RngStream::new(cfg.base_seed, stream_id);
    let test_names: Vec<String> = cfg
        .generators
        .iter()
        .map(GeneratorConfig::display_name)
        .chain(std::iter::once(TRUE_OUTS.to_string()))
        .collect();
    let record = |test_outs: &str, mcc: Option<f64>| EvalRecord {
        dataset: dataset.to_string(),
        classifier: cname.clone(),
        train_gen: train_gen.clone(),
        test_outs: test_outs.to_string(),
        rep,
        seed: stream_id,
        mcc,
    };
    let failure = |test_outs: Option<&str>, e: &Error| CellFailure {
        dataset: dataset.to_string(),
        classifier: cname.clone(),
        train_gen: train_gen.clone(),
        test_outs: test_outs.map(str::to_string),
        rep,
        message: e.to_string(),
    };

    let trained = (|| {
        let split_stream = RngStream::new(cfg.base_seed, stream_id_for(&[dataset, &cname, "split", &rep_key]));
        let split = split_for_workflow(data, cfg.train_fraction, &mut split_stream.rng())?;
        let arts = generate(&split.train_norms, &cfg.generators[gi], &mut cell.derive("train").rng())?;
        let model = classifier.fit(&split.train_norms, &arts)?;
        Ok::<_, Error>((split, model))
    })();
    let (split, model) = match trained {
        Ok(t) => t,
        Err(e) => {
            let records = test_names.iter().map(|t| record(t, None)).collect();
            return (records, vec![failure(None, &e)]);
        }
    };

    let mut records = Vec::with_capacity(test_names.len());
    let mut failures = Vec::new();
    for (tj, test_name) in test_names.iter().enumerate() {
        let result = if tj < cfg.generators.len() {
            generate(&split.train_norms, &cfg.generators[tj], &mut cell.derive(&format!("test/{test_name}")).rng())
                .and_then(|outs| evaluate(&model, &outs, &split.test_norms))
        } else {
            evaluate(&model, &split.outs, &split.test_norms)
        };
        match result {
            Ok(v) => records.push(record(test_name, Some(v))),
            Err(e) => {
                records.push(record(test_name, None));
                failures.push(failure(Some(test_name), &e));
            }
        }
    }
    (records, failures)
}

/// Writes records, dataset metadata, failures and the report into `dir`.
pub fn write_run(run: &RunOutput, dir: impl AsRef<Path>, format: OutputFormat, alpha: f64) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_records(&run.records, dir.join(format.records_file()), format)?;
    write_datasets_csv(&run.datasets, dir.join("datasets.csv"))?;
    write_failures_csv(&run.failures, dir.join("failures.csv"))?;
    if run.records.iter().any(|r| r.mcc.is_some()) {
        let report = report_summary(&run.records, &run.datasets, alpha)?;
        write_report(&report, dir)?;
    }
    Ok(())
}
