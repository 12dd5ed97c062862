//! Fear & Greed index documents and the HTTP client for them.

use std::path::Path;
use std::thread;
use std::time::Duration;

use chrono::DateTime;
use fngcast_core::market::SentimentPoint;
use serde_json::Value;

use crate::error::{Error, Result};

pub const DEFAULT_FNG_URL: &str = "https://api.alternative.me/fng/";
/// Overrides the endpoint when no explicit URL is given.
pub const FNG_URL_ENV: &str = "FNGCAST_FNG_URL";

fn entry_error(index: usize, message: impl Into<String>) -> Error {
    Error::SentimentEntry {
        index,
        message: message.into(),
    }
}

/// Integers arrive as strings on the wire; bare numbers are accepted too.
fn as_integer(v: &Value) -> Option<i64> {
    match v {
        Value::String(s) => s.trim().parse().ok(),
        Value::Number(n) => n.as_i64(),
        _ => None,
    }
}

/// Parse `{"data": [{"value", "value_classification", "timestamp"}, ...]}`,
/// sorted ascending by UTC date.
pub fn parse_fng_json(text: &str) -> Result<Vec<SentimentPoint>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::json("fear & greed document", e))?;
    let data = doc
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema("fear & greed document has no `data` array".into()))?;
    let mut points = Vec::with_capacity(data.len());
    for (i, entry) in data.iter().enumerate() {
        let raw = entry.get("value").ok_or_else(|| entry_error(i, "missing `value`"))?;
        let value = as_integer(raw).ok_or_else(|| entry_error(i, format!("non-integer value {raw}")))?;
        if !(0..=100).contains(&value) {
            return Err(entry_error(i, format!("value {value} outside 0..=100")));
        }
        let ts = entry
            .get("timestamp")
            .and_then(as_integer)
            .ok_or_else(|| entry_error(i, "missing or non-integer `timestamp`"))?;
        let date = DateTime::from_timestamp(ts, 0)
            .ok_or_else(|| entry_error(i, format!("timestamp {ts} out of range")))?
            .date_naive();
        let label = entry.get("value_classification").and_then(Value::as_str).unwrap_or("");
        points.push(SentimentPoint::new(date, value as u8, label).map_err(|e| entry_error(i, e.to_string()))?);
    }
    points.sort_by_key(|p| p.date);
    if let Some(w) = points.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::Schema(format!("duplicate fear & greed date {}", w[0].date)));
    }
    Ok(points)
}

pub fn load_fng(path: &Path) -> Result<Vec<SentimentPoint>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fng_json(&text)
}

/// Render points in the wire format, newest first like the public API.
pub fn render_fng_json(points: &[SentimentPoint]) -> String {
    let data: Vec<Value> = points
        .iter()
        .rev()
        .map(|p| {
            let ts = p.date.and_hms_opt(0, 0, 0).expect("midnight").and_utc().timestamp();
            serde_json::json!({
                "value": p.value.to_string(),
                "value_classification": p.classification,
                "timestamp": ts.to_string(),
            })
        })
        .collect();
    let doc = serde_json::json!({ "name": "Fear and Greed Index", "data": data });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: usize,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

pub fn fng_request_url(base_url: &str, limit: usize) -> String {
    let sep = if base_url.contains('?') { '&' } else { '?' };
    format!("{base_url}{sep}limit={limit}&format=json")
}

/// Download the raw document; `limit = 0` asks for the full history.
pub fn fetch_fng_text(base_url: &str, limit: usize, policy: &RetryPolicy) -> Result<String> {
    let url = fng_request_url(base_url, limit);
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(policy.timeout))
        .build()
        .into();
    let attempts = policy.attempts.max(1);
    let mut last = (None, String::new());
    for attempt in 1..=attempts {
        match agent.get(&url).call() {
            Ok(mut resp) => match resp.body_mut().read_to_string() {
                Ok(text) => return Ok(text),
                Err(e) => last = (None, e.to_string()),
            },
            Err(ureq::Error::StatusCode(code)) => {
                last = (Some(code), format!("status {code}"));
                if code != 429 && code < 500 {
                    return Err(Error::Http {
                        url,
                        attempts: attempt,
                        status: Some(code),
                        message: last.1,
                    });
                }
            }
            Err(e) => last = (None, e.to_string()),
        }
        if attempt < attempts {
            thread::sleep(policy.backoff * attempt as u32);
        }
    }
    Err(Error::Http {
        url,
        attempts,
        status: last.0,
        message: last.1,
    })
}

pub fn fetch_fng(base_url: &str, limit: usize, policy: &RetryPolicy) -> Result<Vec<SentimentPoint>> {
    parse_fng_json(&fetch_fng_text(base_url, limit, policy)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fngcast_core::NaiveDate;

    #[test]
    fn single_entry() {
        let p = parse_fng_json(r#"{"data":[{"value":"26","value_classification":"Fear","timestamp":"1655683200"}]}"#)
            .unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].date, NaiveDate::from_ymd_opt(2022, 6, 20).unwrap());
        assert_eq!((p[0].value, p[0].classification.as_str()), (26, "Fear"));
    }

    #[test]
    fn empty_and_invalid_documents() {
        assert!(parse_fng_json(r#"{"data":[]}"#).unwrap().is_empty());
        assert!(matches!(parse_fng_json(r#"{"name":"x"}"#), Err(Error::Schema(_))));
        let bad = r#"{"data":[{"value":"5","timestamp":"1655683200"},{"value":"101","timestamp":"1655769600"}]}"#;
        match parse_fng_json(bad) {
            Err(Error::SentimentEntry { index, message }) => {
                assert_eq!(index, 1);
                assert!(message.contains("101"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_fng_json(r#"{"data":[{"value":"4.5","timestamp":"1655683200"}]}"#).is_err());
    }

    #[test]
    fn render_round_trips_and_sorts() {
        let pts: Vec<SentimentPoint> = (0..5)
            .map(|i| {
                let d = NaiveDate::from_ymd_opt(2018, 2, 1).unwrap() + chrono::Days::new(i);
                SentimentPoint::new(d, (i * 20) as u8, "Neutral").unwrap()
            })
            .collect();
        assert_eq!(parse_fng_json(&render_fng_json(&pts)).unwrap(), pts);
    }

    #[test]
    fn request_url_appends_query() {
        assert_eq!(fng_request_url("http://h/fng/", 0), "http://h/fng/?limit=0&format=json");
        assert_eq!(fng_request_url("http://h/x?a=1", 5), "http://h/x?a=1&limit=5&format=json");
    }

    #[test]
    fn unreachable_host_retries_then_fails() {
        let policy = RetryPolicy {
            attempts: 2,
            backoff: Duration::from_millis(1),
            timeout: Duration::from_secs(2),
        };
        match fetch_fng("http://127.0.0.1:9/fng/", 0, &policy) {
            Err(Error::Http { attempts, status, .. }) => assert_eq!((attempts, status), (2, None)),
            other => panic!("{other:?}"),
        }
    }
}
