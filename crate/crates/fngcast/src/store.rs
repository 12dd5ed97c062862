//! On-disk formats: dataset CSV, model documents, leaderboards and ledgers.

use std::io::Write;
use std::path::Path;

use fngcast_core::backtest::{BacktestLedger, Signal};
use fngcast_core::featurizer::Normalizer;
use fngcast_core::market::{AlignedDataset, Bar, Column, BASE_COLUMNS};
use fngcast_core::models::TrainedModel;
use fngcast_core::tuner::TuneResult;
use fngcast_core::NaiveDate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token written for a value that is not yet defined (indicator warmup).
pub const MISSING: &str = "";

pub const MODEL_FORMAT: &str = "fngcast-model";
pub const MODEL_VERSION: u32 = 1;

/// Write through a temporary file in the target directory, then rename, so
/// readers never observe a half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |p: &Path, source| Error::Write {
        path: p.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(|e| fail(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(dir, e))?;
    tmp.write_all(contents).map_err(|e| fail(path, e))?;
    tmp.persist(path).map_err(|e| fail(path, e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact types serialize") + "\n"
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value).as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::json(path.display().to_string(), e))
}

fn csv_text(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |x| x.to_string())
}

/// `date`, the base columns, then indicator columns in dataset order.
pub fn render_dataset_csv(ds: &AlignedDataset) -> String {
    let mut header = vec!["date".to_string()];
    header.extend(ds.column_names());
    let rows = (0..ds.len()).map(|i| {
        let b = ds.bars()[i];
        let mut row = vec![
            b.date.to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
            ds.fng()[i].to_string(),
        ];
        row.extend(ds.indicators().iter().map(|c| opt(c.values[i])));
        row
    });
    csv_text(&header, rows)
}

pub fn save_dataset(ds: &AlignedDataset, path: &Path) -> Result<()> {
    write_atomic(path, render_dataset_csv(ds).as_bytes())
}

fn schema_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parse a dataset file; with `expected` set, the indicator columns must
/// match those names in that order.
pub fn parse_dataset_csv(text: &str, expected: Option<&[String]>) -> Result<AlignedDataset> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| schema_error(1, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header.len() < 7 || header[0] != "date" || header[1..7] != BASE_COLUMNS {
        return Err(Error::Schema(format!(
            "dataset header must start with date,{}; found {}",
            BASE_COLUMNS.join(","),
            header.join(",")
        )));
    }
    let names = &header[7..];
    if let Some(want) = expected {
        if names != want {
            return Err(Error::Schema(format!(
                "indicator columns {names:?} do not match expected {want:?}"
            )));
        }
    }
    let mut bars = Vec::new();
    let mut fng = Vec::new();
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| schema_error(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |k: usize| -> Result<f64> {
            record[k]
                .parse()
                .map_err(|_| schema_error(line, format!("bad {} `{}`", header[k], &record[k])))
        };
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| schema_error(line, format!("bad date `{}`", &record[0])))?;
        let bar = Bar::new(date, num(1)?, num(2)?, num(3)?, num(4)?, num(5)?)
            .map_err(|e| schema_error(line, e.to_string()))?;
        bars.push(bar);
        fng.push(
            record[6]
                .parse::<u8>()
                .map_err(|_| schema_error(line, format!("bad fng `{}`", &record[6])))?,
        );
        for (j, col) in columns.iter_mut().enumerate() {
            let field = &record[7 + j];
            col.push(if field == MISSING { None } else { Some(num(7 + j)?) });
        }
    }
    let indicators = names
        .iter()
        .zip(columns)
        .map(|(n, v)| Column::new(n.clone(), v))
        .collect();
    Ok(AlignedDataset::from_parts(bars, fng, indicators)?)
}

pub fn load_dataset(path: &Path, expected: Option<&[String]>) -> Result<AlignedDataset> {
    parse_dataset_csv(&read_text(path)?, expected)
}

/// A trained model plus the scaling needed to read its output in USD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub model: TrainedModel,
    pub normalizer: Option<Normalizer>,
}

impl ModelDocument {
    pub fn new(model: TrainedModel, normalizer: Option<Normalizer>) -> Self {
        Self {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model,
            normalizer,
        }
    }
}

pub fn model_to_json(doc: &ModelDocument) -> String {
    to_json(doc)
}

pub fn model_from_json(text: &str) -> Result<ModelDocument> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::json("model document", e))?;
    if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
        return Err(Error::Schema(format!(
            "unsupported model document {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
            doc.format, doc.version
        )));
    }
    Ok(doc)
}

pub fn save_model(path: &Path, doc: &ModelDocument) -> Result<()> {
    write_atomic(path, model_to_json(doc).as_bytes())
}

pub fn load_model(path: &Path) -> Result<ModelDocument> {
    model_from_json(&read_text(path)?)
}

/// One row per scored candidate, best first.
pub fn render_leaderboard_csv(result: &TuneResult) -> String {
    let folds = result.table.first().map_or(0, |e| e.fold_mse.len());
    let mut header: Vec<String> = ["rank", "grid_index", "label", "hyperparameters"].map(String::from).into();
    header.extend((1..=folds).map(|k| format!("fold_{k}_mse")));
    header.push("mean_mse".into());
    let rows = result.table.iter().map(|e| {
        let mut row = vec![
            e.rank.to_string(),
            e.grid_index.to_string(),
            e.spec.label(),
            e.spec.describe(),
        ];
        row.extend(e.fold_mse.iter().map(|m| m.to_string()));
        row.push(e.mean_mse.to_string());
        row
    });
    csv_text(&header, rows)
}

/// A best-parameters row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRow {
    pub label: String,
    pub spec: fngcast_core::models::ModelSpec,
    pub mean_mse: f64,
    pub fold_mse: Vec<f64>,
}

pub fn render_best_csv(rows: &[BestRow]) -> String {
    let header = ["model", "hyperparameters", "mean_mse"].map(String::from);
    csv_text(
        &header,
        rows.iter()
            .map(|r| vec![r.label.clone(), r.spec.describe(), r.mean_mse.to_string()]),
    )
}

fn signal_name(s: Option<Signal>) -> &'static str {
    match s {
        Some(Signal::Long) => "long",
        Some(Signal::Flat) => "flat",
        None => "",
    }
}

pub fn render_ledger_csv(ledger: &BacktestLedger) -> String {
    let header = [
        "date",
        "close",
        "predicted_next_close",
        "signal",
        "position",
        "cash",
        "equity",
        "hit",
    ]
    .map(String::from);
    let rows = ledger.rows.iter().map(|r| {
        vec![
            r.date.to_string(),
            r.close.to_string(),
            opt(r.predicted_next_close),
            signal_name(r.signal).into(),
            r.position.to_string(),
            r.cash.to_string(),
            r.equity.to_string(),
            r.hit.map_or(String::new(), |h| h.to_string()),
        ]
    });
    csv_text(&header, rows)
}

/// Equity of several ledgers over the same dates, one column each.
pub fn render_equity_csv(curves: &[(String, &BacktestLedger)]) -> String {
    let mut header = vec!["date".to_string()];
    header.extend(curves.iter().map(|(n, _)| n.clone()));
    let n = curves.first().map_or(0, |(_, l)| l.rows.len());
    let rows = (0..n).map(|i| {
        let mut row = vec![curves[0].1.rows[i].date.to_string()];
        row.extend(curves.iter().map(|(_, l)| l.rows[i].equity.to_string()));
        row
    });
    csv_text(&header, rows)
}
