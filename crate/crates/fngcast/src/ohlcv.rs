//! Daily OHLCV exports (`Date,Open,High,Low,Close,Adj Close,Volume`).

use std::collections::HashMap;
use std::path::Path;

use fngcast_core::market::Bar;
use fngcast_core::NaiveDate;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OhlcvData {
    /// Ascending by date.
    pub bars: Vec<Bar>,
    /// Rows dropped because a field read `null`.
    pub skipped_null: usize,
}

const REQUIRED: [&str; 6] = ["Date", "Open", "High", "Low", "Close", "Volume"];

fn parse_date(s: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| Error::Parse {
        line,
        message: format!("bad date `{s}`: {e}"),
    })
}

fn parse_number(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {name} `{field}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite {name} `{field}`"),
        });
    }
    Ok(v)
}

/// Parse a vendor export. `Adj Close` is ignored; rows may come in any order.
pub fn parse_ohlcv_csv(text: &str) -> Result<OhlcvData> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut index = [0usize; 6];
    for (slot, name) in index.iter_mut().zip(REQUIRED) {
        *slot = header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column `{name}` in header"),
        })?;
    }

    let mut bars = Vec::new();
    let mut skipped_null = 0;
    let mut seen: HashMap<NaiveDate, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| record.get(index[k]).unwrap_or("");
        if (0..6).any(|k| field(k).eq_ignore_ascii_case("null")) {
            skipped_null += 1;
            continue;
        }
        let date = parse_date(field(0), line)?;
        if seen.insert(date, line).is_some() {
            return Err(Error::DuplicateDate { date, line });
        }
        let [o, h, l, c, v] = [1, 2, 3, 4, 5].map(|k| parse_number(field(k), REQUIRED[k], line));
        let bar = Bar::new(date, o?, h?, l?, c?, v?).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        bars.push(bar);
    }
    bars.sort_by_key(|b| b.date);
    Ok(OhlcvData { bars, skipped_null })
}

pub fn load_ohlcv(path: &Path) -> Result<OhlcvData> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ohlcv_csv(&text)
}

/// Render bars in the vendor layout, with `Adj Close` equal to `Close`.
pub fn render_ohlcv_csv(bars: &[Bar]) -> String {
    let mut out = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
    for b in bars {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            b.date, b.open, b.high, b.low, b.close, b.close, b.volume
        ));
    }
    out
}
