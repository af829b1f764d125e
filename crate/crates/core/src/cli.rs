//! Command-line front end.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench::{read_datasets_csv, read_records, render_text, report_summary, run_workflow, write_report, write_run, BenchConfig, OutputFormat};
use crate::classifiers::{tune_grid, ClassifierKind, ClassifierSpec, Grids, Hyper, TuneKind};
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::filters::{apply_filter, FilterConfig, FilterKind, KeepMode};
use crate::generators::{generate, Approach, GeneratorConfig};
use crate::preprocess::{load_csv, write_csv, LabelSpec};
use crate::rng::{stream_id_for, RngStream};

#[derive(Debug, Parser)]
#[command(name = "artout", version, about = "Artificial outlier generation and benchmarking")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration (benchmark config, or a generator/filter section).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record format: csv or jsonl.
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate artificial outliers from the normal rows of a CSV file.
    Generate(GenerateArgs),
    /// Filter previously generated outliers.
    Filter(FilterArgs),
    /// Grid-search classifier hyperparameters.
    Tune(TuneArgs),
    /// Run the full benchmark described by --config.
    Benchmark,
    /// Recompute the statistical report from persisted records.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long, default_value = "class")]
    pub label_column: String,
    #[arg(long, default_value = "outlier")]
    pub outlier_label: String,
}

impl LabelArgs {
    fn spec(&self) -> LabelSpec {
        LabelSpec::new(self.label_column.clone(), self.outlier_label.clone())
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Overrides the approach given in --config.
    #[arg(long)]
    pub approach: Option<Approach>,
    #[arg(long)]
    pub n_art: Option<usize>,
    #[command(flatten)]
    pub labels: LabelArgs,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Artificial outliers as written by `generate`.
    #[arg(long)]
    pub arts: PathBuf,
    #[arg(long)]
    pub filter: Option<FilterKind>,
    /// Classifier used by classifierLoop and queryByCommittee.
    #[arg(long, default_value = "binary")]
    pub classifier: ClassifierKind,
    /// Generator that resupplies rows in the classifier loop.
    #[arg(long, default_value = "unifBox")]
    pub approach: Approach,
    #[arg(long)]
    pub target: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub dmax: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub keep: Option<KeepMode>,
    #[command(flatten)]
    pub labels: LabelArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub arts: PathBuf,
    /// binaryGrid or one-class.
    #[arg(long, default_value = "one-class")]
    pub classifier: ClassifierKind,
    #[command(flatten)]
    pub labels: LabelArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Records file; defaults to the records file inside --out.
    #[arg(long)]
    pub records: Option<PathBuf>,
    /// datasets.csv with n and d per dataset; defaults to the one next to the records.
    #[arg(long)]
    pub datasets: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
}

#[derive(serde::Deserialize, Default)]
#[serde(default)]
struct SectionFile {
    generator: Option<GeneratorConfig>,
    filter: Option<FilterConfig>,
    grids: Option<Grids>,
}

fn sections(path: Option<&Path>) -> Result<SectionFile> {
    let Some(path) = path else { return Ok(SectionFile::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn normal_rows(path: &Path, labels: &LabelSpec) -> Result<Dataset> {
    let data = load_csv(path, labels)?;
    let norms = data.filter_rows(|i, _| data.labels()[i] == Label::Normal);
    if norms.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(norms)
}

fn require_out(out: Option<&PathBuf>) -> Result<&PathBuf> {
    out.ok_or_else(|| Error::Config("--out is required".into()))
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Generate(a) => {
            let mut cfg = sections(cli.config.as_deref())?.generator.unwrap_or_default();
            if let Some(ap) = a.approach {
                cfg.approach = ap;
            }
            if a.n_art.is_some() {
                cfg.n_art = a.n_art;
            }
            let labels = a.labels.spec();
            let norms = normal_rows(&a.data, &labels)?;
            let mut rng = RngStream::new(seed, stream_id_for(&["generate", cfg.approach.id()])).rng();
            let arts = generate(&norms, &cfg, &mut rng)?;
            write_csv(&arts, require_out(cli.out.as_ref())?, &labels)
        }
        Command::Filter(a) => {
            let mut cfg = sections(cli.config.as_deref())?.filter.unwrap_or_default();
            if let Some(k) = a.filter {
                cfg.kind = k;
            }
            cfg.target_count = a.target.or(cfg.target_count);
            cfg.epsilon = a.epsilon.or(cfg.epsilon);
            cfg.dmax = a.dmax.or(cfg.dmax);
            cfg.k = a.k.unwrap_or(cfg.k);
            cfg.keep_mode = a.keep.unwrap_or(cfg.keep_mode);
            let labels = a.labels.spec();
            let norms = normal_rows(&a.data, &labels)?;
            let arts = load_csv(&a.arts, &labels)?;
            let arts = Dataset::artificial(arts.names().to_vec(), arts.values().to_vec())?;
            let trainer = ClassifierSpec::new(a.classifier);
            let stream = RngStream::new(seed, stream_id_for(&["filter", cfg.kind.id()]));
            let mut resupply_rng = stream.derive("resupply").rng();
            let gen_cfg = GeneratorConfig::new(a.approach);
            let resupply = |n: usize| generate(&norms, &gen_cfg.clone().with_n_art(n), &mut resupply_rng);
            let kept = apply_filter(&norms, &arts, &cfg, &trainer, resupply, &mut stream.rng())?;
            write_csv(&kept, require_out(cli.out.as_ref())?, &labels)
        }
        Command::Tune(a) => {
            let kind = match a.classifier {
                ClassifierKind::OneClass => TuneKind::OneClass,
                ClassifierKind::BinaryGrid | ClassifierKind::Binary => TuneKind::Binary,
            };
            let grids = sections(cli.config.as_deref())?.grids.unwrap_or_default();
            let labels = a.labels.spec();
            let norms = normal_rows(&a.data, &labels)?;
            let arts = load_csv(&a.arts, &labels)?;
            let tuned = tune_grid(&norms, &arts, kind, &grids)?;
            println!("best: {} err={}", tuned.hyper, tuned.err);
            if let Some(out) = &cli.out {
                let mut w = csv::Writer::from_path(out).map_err(|e| Error::csv(out, e))?;
                w.write_record(["param", "value", "width", "errArt", "errGenu", "err"])
                    .map_err(|e| Error::csv(out, e))?;
                for ev in &tuned.evaluations {
                    let (param, value, width) = match ev.hyper {
                        Hyper::Binary { lambda, width } => ("lambda", lambda, width),
                        Hyper::OneClass { nu, width } => ("nu", nu, width),
                    };
                    w.write_record([
                        param.to_string(),
                        value.to_string(),
                        width.to_string(),
                        ev.err_art.to_string(),
                        ev.err_genu.to_string(),
                        ev.err.to_string(),
                    ])
                    .map_err(|e| Error::csv(out, e))?;
                }
                w.flush().map_err(|e| Error::io(out, e))?;
            }
            Ok(())
        }
        Command::Benchmark => {
            let path = cli.config.as_ref().ok_or_else(|| Error::Config("benchmark needs --config".into()))?;
            let mut cfg = BenchConfig::load(path)?;
            if let Some(s) = cli.seed {
                cfg.base_seed = s;
            }
            if let Some(f) = cli.format {
                cfg.format = f;
            }
            if let Some(o) = &cli.out {
                cfg.output = Some(o.clone());
            }
            let out = cfg.output.clone().ok_or_else(|| Error::Config("no output directory (--out)".into()))?;
            let run = run_workflow(&cfg)?;
            write_run(&run, &out, cfg.format, cfg.alpha)?;
            let failed = run.records.iter().filter(|r| r.mcc.is_none()).count();
            eprintln!("{} records ({failed} failed) written to {}", run.records.len(), out.display());
            Ok(())
        }
        Command::Report(a) => {
            let records_path = match (&a.records, &cli.out) {
                (Some(p), _) => p.clone(),
                (None, Some(dir)) => dir.join(cli.format.unwrap_or_default().records_file()),
                (None, None) => return Err(Error::Config("report needs --records or --out".into())),
            };
            let records = read_records(&records_path)?;
            let meta_path = a
                .datasets
                .clone()
                .unwrap_or_else(|| records_path.with_file_name("datasets.csv"));
            let meta = if meta_path.exists() { read_datasets_csv(&meta_path)? } else { Vec::new() };
            let report = report_summary(&records, &meta, a.alpha)?;
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                write_report(&report, dir)?;
            }
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(render_text(&report).as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}
