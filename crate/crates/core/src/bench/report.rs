//! Summary statistics over evaluation records.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::{DatasetMeta, EvalRecord};
use crate::error::{Error, Result};
use crate::stats::{adjust_family, group_letters, kendall_tau, mann_whitney_u, mean, median, oneway_anova, Anova, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Factor {
    #[serde(rename = "classifier")]
    Classifier,
    #[serde(rename = "trainGen")]
    TrainGen,
    #[serde(rename = "testOuts")]
    TestOuts,
    #[serde(rename = "dataset")]
    Dataset,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Classifier, Factor::TrainGen, Factor::TestOuts, Factor::Dataset];

    pub fn id(self) -> &'static str {
        match self {
            Factor::Classifier => "classifier",
            Factor::TrainGen => "trainGen",
            Factor::TestOuts => "testOuts",
            Factor::Dataset => "dataset",
        }
    }

    fn level(self, r: &EvalRecord) -> &str {
        match self {
            Factor::Classifier => &r.classifier,
            Factor::TrainGen => &r.train_gen,
            Factor::TestOuts => &r.test_outs,
            Factor::Dataset => &r.dataset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: String,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub letters: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub a: String,
    pub b: String,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReport {
    pub factor: Factor,
    pub levels: Vec<LevelSummary>,
    /// Mann-Whitney U per level pair, Holm-adjusted within the factor.
    pub pairs: Vec<PairTest>,
    pub anova: Option<Anova>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KendallRow {
    pub train_gen: String,
    pub tau_d: Option<TestResult>,
    pub tau_n: Option<TestResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatReport {
    pub alpha: f64,
    pub factors: Vec<FactorReport>,
    pub kendall: Vec<KendallRow>,
    pub datasets: Vec<DatasetMeta>,
}

fn grouped<'a>(records: &'a [&'a EvalRecord], key: impl Fn(&EvalRecord) -> &str) -> Vec<(String, Vec<f64>)> {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in records {
        let level = key(r);
        let m = r.mcc.expect("filtered to successful records");
        match groups.iter_mut().find(|(l, _)| l == level) {
            Some((_, v)) => v.push(m),
            None => groups.push((level.to_string(), vec![m])),
        }
    }
    groups
}

fn factor_report(factor: Factor, records: &[&EvalRecord], alpha: f64) -> Result<FactorReport> {
    let groups = grouped(records, |r| factor.level(r));
    let k = groups.len();
    let mut pairs = Vec::new();
    let mut letters = vec!["a".to_string(); k];
    let mut anova = None;
    if k >= 2 {
        let mut index = Vec::new();
        let mut tests = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                tests.push(mann_whitney_u(&groups[i].1, &groups[j].1)?);
                index.push((i, j));
            }
        }
        adjust_family(&mut tests)?;
        let mut significant = vec![vec![false; k]; k];
        for (&(i, j), t) in index.iter().zip(&tests) {
            let s = t.adjusted_p < alpha;
            significant[i][j] = s;
            significant[j][i] = s;
            pairs.push(PairTest { a: groups[i].0.clone(), b: groups[j].0.clone(), test: *t });
        }
        letters = group_letters(&significant)?;
        let samples: Vec<Vec<f64>> = groups.iter().map(|(_, v)| v.clone()).collect();
        anova = oneway_anova(&samples).ok();
    }
    let levels = groups
        .iter()
        .zip(letters)
        .map(|((level, v), letters)| LevelSummary {
            level: level.clone(),
            count: v.len(),
            mean: mean(v),
            median: median(v),
            letters,
        })
        .collect();
    Ok(FactorReport { factor, levels, pairs, anova })
}

/// Per-factor level summaries with pairwise tests and letter groups, plus
/// Kendall's tau of mcc against `d` and `n` for every training generator.
/// Failed records (no mcc) are ignored.
pub fn report_summary(records: &[EvalRecord], datasets: &[DatasetMeta], alpha: f64) -> Result<StatReport> {
    let ok: Vec<&EvalRecord> = records.iter().filter(|r| r.mcc.is_some()).collect();
    if ok.is_empty() {
        return Err(Error::Domain("no successful records to summarize".into()));
    }
    let factors = Factor::ALL
        .iter()
        .map(|&f| factor_report(f, &ok, alpha))
        .collect::<Result<Vec<_>>>()?;

    let mut kendall = Vec::new();
    for (train_gen, _) in grouped(&ok, |r| &r.train_gen) {
        let mut mccs = Vec::new();
        let mut ds = Vec::new();
        let mut ns = Vec::new();
        for r in ok.iter().filter(|r| r.train_gen == train_gen) {
            if let Some(m) = datasets.iter().find(|m| m.name == r.dataset) {
                mccs.push(r.mcc.unwrap());
                ds.push(m.d as f64);
                ns.push(m.n as f64);
            }
        }
        kendall.push(KendallRow {
            train_gen,
            tau_d: kendall_tau(&mccs, &ds).ok(),
            tau_n: kendall_tau(&mccs, &ns).ok(),
        });
    }
    Ok(StatReport { alpha, factors, kendall, datasets: datasets.to_vec() })
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "NA".into())
}

/// Plain-text tables, one per factor, then the Kendall table.
pub fn render_text(report: &StatReport) -> String {
    let mut s = String::new();
    for f in &report.factors {
        let _ = writeln!(s, "== {} ==", f.factor.id());
        let width = f.levels.iter().map(|l| l.level.len()).max().unwrap_or(5).max(5);
        if f.factor == Factor::Dataset {
            let _ = writeln!(s, "{:<width$}  {:>6}  {:>4}  {:>7}  {:>7}  letters", "level", "n", "d", "mean", "median");
        } else {
            let _ = writeln!(s, "{:<width$}  {:>6}  {:>7}  {:>7}  letters", "level", "count", "mean", "median");
        }
        for l in &f.levels {
            if f.factor == Factor::Dataset {
                let meta = report.datasets.iter().find(|m| m.name == l.level);
                let n = meta.map(|m| m.n.to_string()).unwrap_or_else(|| "NA".into());
                let d = meta.map(|m| m.d.to_string()).unwrap_or_else(|| "NA".into());
                let _ = writeln!(s, "{:<width$}  {n:>6}  {d:>4}  {:>7.2}  {:>7.2}  {}", l.level, l.mean, l.median, l.letters);
            } else {
                let _ = writeln!(s, "{:<width$}  {:>6}  {:>7.2}  {:>7.2}  {}", l.level, l.count, l.mean, l.median, l.letters);
            }
        }
        match &f.anova {
            Some(a) => {
                let _ = writeln!(
                    s,
                    "one-way ANOVA: F({}, {}) = {:.3}, p = {:.3e}, omega^2 = {:.3}",
                    a.df_between, a.df_within, a.f, a.p_value, a.omega_sq
                );
            }
            None => {
                let _ = writeln!(s, "one-way ANOVA: not available");
            }
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "== Kendall tau of mcc vs d and n ==");
    let width = report.kendall.iter().map(|k| k.train_gen.len()).max().unwrap_or(8).max(8);
    let _ = writeln!(s, "{:<width$}  {:>7}  {:>9}  {:>7}  {:>9}", "trainGen", "tau_d", "p_d", "tau_n", "p_n");
    for k in &report.kendall {
        let _ = writeln!(
            s,
            "{:<width$}  {:>7}  {:>9}  {:>7}  {:>9}",
            k.train_gen,
            opt(k.tau_d.map(|t| t.statistic), 3),
            opt(k.tau_d.map(|t| t.p_value), 4),
            opt(k.tau_n.map(|t| t.statistic), 3),
            opt(k.tau_n.map(|t| t.p_value), 4),
        );
    }
    s
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `summary.csv`, `pairwise.csv`, `anova.csv`, `kendall.csv` and `report.txt` into `dir`.
pub fn write_report(report: &StatReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let write = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<()> {
        let path = dir.join(name);
        let mut w = csv_writer(&path)?;
        w.write_record(header).map_err(|e| Error::csv(&path, e))?;
        for r in rows {
            w.write_record(&r).map_err(|e| Error::csv(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    };
    let mut summary = Vec::new();
    let mut pairwise = Vec::new();
    let mut anova = Vec::new();
    for f in &report.factors {
        for l in &f.levels {
            summary.push(vec![
                f.factor.id().into(),
                l.level.clone(),
                l.count.to_string(),
                l.mean.to_string(),
                l.median.to_string(),
                l.letters.clone(),
            ]);
        }
        for p in &f.pairs {
            pairwise.push(vec![
                f.factor.id().into(),
                p.a.clone(),
                p.b.clone(),
                p.test.statistic.to_string(),
                p.test.p_value.to_string(),
                p.test.adjusted_p.to_string(),
            ]);
        }
        if let Some(a) = &f.anova {
            anova.push(vec![
                f.factor.id().into(),
                a.f.to_string(),
                a.p_value.to_string(),
                a.omega_sq.to_string(),
                a.df_between.to_string(),
                a.df_within.to_string(),
            ]);
        }
    }
    let kendall = report
        .kendall
        .iter()
        .map(|k| {
            vec![
                k.train_gen.clone(),
                num(k.tau_d.map(|t| t.statistic)),
                num(k.tau_d.map(|t| t.p_value)),
                num(k.tau_n.map(|t| t.statistic)),
                num(k.tau_n.map(|t| t.p_value)),
            ]
        })
        .collect();
    write("summary.csv", &["factor", "level", "count", "mean", "median", "letters"], summary)?;
    write("pairwise.csv", &["factor", "a", "b", "U", "p", "pAdjusted"], pairwise)?;
    write("anova.csv", &["factor", "F", "p", "omegaSq", "dfBetween", "dfWithin"], anova)?;
    write("kendall.csv", &["trainGen", "tauD", "pD", "tauN", "pN"], kendall)?;
    let path = dir.join("report.txt");
    std::fs::write(&path, render_text(report)).map_err(|e| Error::io(&path, e))
}
