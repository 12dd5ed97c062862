//! Markdown rendering of a run directory.

use std::fmt::Write;

use fngcast_core::backtest::BUY_HOLD_LABEL;
use fngcast_core::tuner::TuneResult;

use crate::artifacts::SimulationDoc;
use crate::pipeline::IngestSummary;
use crate::store::BestRow;

/// Everything the report can draw on; absent parts render as "not run".
#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub ingest: Option<IngestSummary>,
    pub tuning: Vec<TuneResult>,
    pub best: Option<Vec<BestRow>>,
    pub simulation: Option<SimulationDoc>,
}

pub fn usd(v: f64) -> String {
    format!("{v:.2}")
}

pub fn mse(v: f64) -> String {
    format!("{v:.6e}")
}

fn not_run(out: &mut String, step: &str) {
    let _ = writeln!(out, "_Not run: no `{step}` outputs in this directory._\n");
}

pub fn render(a: &RunArtifacts) -> String {
    let mut out = String::from("# fngcast run report\n\n");

    out.push_str("## Data\n\n");
    match &a.ingest {
        Some(s) => {
            let _ = writeln!(
                out,
                "{} aligned rows from {} to {}. Dropped {} price rows and {} sentiment rows without a match; skipped {} null rows.\n",
                s.rows, s.first_date, s.last_date, s.dropped_bars, s.dropped_sentiment, s.skipped_null_rows
            );
            out.push_str("| column | count | mean | std | min | 25% | 50% | 75% | max |\n");
            out.push_str("|---|---|---|---|---|---|---|---|---|\n");
            for c in &s.stats.columns {
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} |",
                    c.name, c.count, c.mean, c.std, c.min, c.q25, c.q50, c.q75, c.max
                );
            }
            out.push('\n');
        }
        None => not_run(&mut out, "ingest"),
    }

    out.push_str("## Selected hyperparameters\n\n");
    match &a.best {
        Some(rows) => {
            out.push_str("| model | hyperparameters | mean validation MSE |\n|---|---|---|\n");
            for r in rows {
                let _ = writeln!(out, "| {} | {} | {} |", r.label, r.spec.describe(), mse(r.mean_mse));
            }
            out.push('\n');
        }
        None => not_run(&mut out, "tune"),
    }

    out.push_str("## Validation error by family\n\n");
    if a.tuning.is_empty() {
        not_run(&mut out, "tune");
    } else {
        out.push_str("| family | best mean MSE | candidates | failed |\n|---|---|---|---|\n");
        for t in &a.tuning {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                t.family.name(),
                mse(t.best().mean_mse),
                t.n_candidates,
                t.failed.len()
            );
        }
        out.push('\n');
    }

    out.push_str("## Investment simulation\n\n");
    match &a.simulation {
        Some(s) => {
            let days = s.models.first().map(|m| m.denominator);
            let _ = writeln!(
                out,
                "Window {} to {}, initial capital USD {}, fees {}.{}\n",
                s.test_start,
                s.test_end,
                usd(s.initial_capital),
                s.fees,
                days.map_or(String::new(), |d| format!(" {d} evaluable days."))
            );
            out.push_str("| model | hits | final value (USD) |\n|---|---|---|\n");
            for r in &s.table {
                let hits = r.hits.map_or_else(|| "-".to_string(), |h| h.to_string());
                let _ = writeln!(out, "| {} | {} | {} |", r.model, hits, usd(r.final_value));
            }
            out.push('\n');
            let beat = s.models.iter().filter(|m| m.final_value > s.buy_hold_final).count();
            let _ = writeln!(
                out,
                "{beat} of {} models finish above `{BUY_HOLD_LABEL}`.\n",
                s.models.len()
            );
            for f in &s.failures {
                let _ = writeln!(out, "- `{}` failed: {}", f.model, f.error);
            }
            if !s.failures.is_empty() {
                out.push('\n');
            }
            out.push_str("Plots: `plots/equity.svg`, `plots/predictions.svg`.\n");
        }
        None => not_run(&mut out, "simulate"),
    }
    out
}
