//! CSV and JSON-lines storage of evaluation records.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CellFailure, DatasetMeta, EvalRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn records_file(self) -> &'static str {
        match self {
            OutputFormat::Csv => "records.csv",
            OutputFormat::Jsonl => "records.jsonl",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" | "json-lines" => Ok(OutputFormat::Jsonl),
            _ => Err(Error::Config(format!("unknown output format `{s}`"))),
        }
    }
}

const RECORD_HEADER: [&str; 7] = ["dataset", "classifier", "trainGen", "testOuts", "rep", "seed", "mcc"];

/// 17 significant digits, enough to reload the exact bits.
fn format_mcc(v: Option<f64>) -> String {
    v.map(|m| format!("{m:.16e}")).unwrap_or_default()
}

pub fn write_records(records: &[EvalRecord], path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => write_records_csv(records, path),
        OutputFormat::Jsonl => write_records_jsonl(records, path),
    }
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => read_records_jsonl(path),
        _ => read_records_csv(path),
    }
}

pub fn write_records_csv(records: &[EvalRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(RECORD_HEADER).map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.write_record([
            r.dataset.as_str(),
            &r.classifier,
            &r.train_gen,
            &r.test_outs,
            &r.rep.to_string(),
            &r.seed.to_string(),
            &format_mcc(r.mcc),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(Error::Parse {
            path: path.into(),
            row: 0,
            column: String::new(),
            message: format!("expected header {}", RECORD_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let bad = |column: &str, message: String| Error::Parse { path: path.into(), row: i + 1, column: column.into(), message };
        let rep = rec[4].parse().map_err(|_| bad("rep", format!("not an integer: `{}`", &rec[4])))?;
        let seed = rec[5].parse().map_err(|_| bad("seed", format!("not an integer: `{}`", &rec[5])))?;
        let mcc = match &rec[6] {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("mcc", format!("not a number: `{s}`")))?),
        };
        out.push(EvalRecord {
            dataset: rec[0].to_string(),
            classifier: rec[1].to_string(),
            train_gen: rec[2].to_string(),
            test_outs: rec[3].to_string(),
            rep,
            seed,
            mcc,
        });
    }
    Ok(out)
}

pub fn write_records_jsonl(records: &[EvalRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Config(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records_jsonl(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.into(),
            row: i + 1,
            column: String::new(),
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_datasets_csv(meta: &[DatasetMeta], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["name", "n", "d"]).map_err(|e| Error::csv(path, e))?;
    for m in meta {
        w.serialize((&m.name, m.n, m.d)).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_datasets_csv(path: impl AsRef<Path>) -> Result<Vec<DatasetMeta>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::csv(path, e)))
        .collect()
}

pub fn write_failures_csv(failures: &[CellFailure], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["dataset", "classifier", "trainGen", "testOuts", "rep", "message"])
        .map_err(|e| Error::csv(path, e))?;
    for f in failures {
        w.write_record([
            f.dataset.as_str(),
            &f.classifier,
            &f.train_gen,
            f.test_outs.as_deref().unwrap_or(""),
            &f.rep.to_string(),
            &f.message,
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
