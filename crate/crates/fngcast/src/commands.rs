//! One function per verb; each reads its inputs fully before writing anything.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::Utc;
use fngcast_core::featurizer::FeatureSpec;
use fngcast_core::models::{Family, ModelSpec, TrainedModel};
use fngcast_core::tuner::TuneResult;

use crate::artifacts::{Layout, RunMeta, SimulationDoc};
use crate::cli::{Cli, Command, IngestArgs};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::fng::{fetch_fng_text, load_fng, parse_fng_json, render_fng_json, RetryPolicy};
use crate::ohlcv::{load_ohlcv, render_ohlcv_csv};
use crate::pipeline::{self, IngestSummary, Prepared};
use crate::plot::{line_chart, Series};
use crate::report::{render, usd, RunArtifacts};
use crate::store::{self, BestRow, ModelDocument};
use crate::synthetic::{generate, SyntheticConfig};

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::from_sources(cli.config.as_deref(), &cli.partial())?;
    let layout = Layout::new(cfg.out.clone());
    let started = Utc::now();
    let mut fit_seconds = BTreeMap::new();
    let name = match &cli.command {
        Command::Ingest(a) => {
            ingest(&cfg, &layout, a)?;
            "ingest"
        }
        Command::Tune(_) => {
            tune(&cfg, &layout)?;
            "tune"
        }
        Command::Train(a) => {
            for (label, m) in train(&cfg, &layout, a.specs.as_deref())? {
                fit_seconds.extend(m.meta.wall_time_secs.map(|t| (label, t)));
            }
            "train"
        }
        Command::Simulate(a) => {
            simulate(&cfg, &layout, a.specs.as_deref())?;
            "simulate"
        }
        Command::Report => {
            report(&layout)?;
            "report"
        }
    };
    let meta = RunMeta {
        command: name.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        started_at: started.to_rfc3339(),
        finished_at: Utc::now().to_rfc3339(),
        seed: cfg.seed,
        fit_seconds,
    };
    store::write_json(&layout.meta(name), &meta)
}

fn usage(message: impl Into<String>) -> Error {
    Error::Config(message.into())
}

pub fn ingest(cfg: &RunConfig, layout: &Layout, args: &IngestArgs) -> Result<IngestSummary> {
    let spec = FeatureSpec::default();
    let mut raw_files: Vec<(std::path::PathBuf, String)> = Vec::new();
    let (bars, sentiment, skipped) = if let Some(days) = args.synthetic {
        let mut syn = SyntheticConfig {
            days,
            seed: cfg.seed,
            ..Default::default()
        };
        if let Some(start) = args.synthetic_start {
            syn.start = start;
        }
        let (bars, pts) = generate(&syn);
        raw_files.push((layout.raw_ohlcv(), render_ohlcv_csv(&bars)));
        raw_files.push((layout.raw_fng(), render_fng_json(&pts)));
        (bars, pts, 0)
    } else {
        let path = cfg
            .ohlcv
            .as_deref()
            .ok_or_else(|| usage("ingest needs --ohlcv (or --synthetic)"))?;
        let data = load_ohlcv(path)?;
        let sentiment = if args.fetch_fng {
            let text = fetch_fng_text(&cfg.fng_url, cfg.fng_limit, &RetryPolicy::default())?;
            let pts = parse_fng_json(&text)?;
            raw_files.push((layout.raw_fng(), text));
            pts
        } else {
            let path = cfg
                .fng
                .as_deref()
                .ok_or_else(|| usage("ingest needs --fng or --fetch-fng"))?;
            load_fng(path)?
        };
        (data.bars, sentiment, data.skipped_null)
    };
    let (dataset, summary) = pipeline::ingest(&bars, &sentiment, skipped, &spec)?;
    for (path, text) in &raw_files {
        store::write_atomic(path, text.as_bytes())?;
    }
    store::save_dataset(&dataset, &layout.dataset())?;
    store::write_json(&layout.summary(), &summary)?;
    println!(
        "ingested {} rows ({} .. {}); dropped {} price / {} sentiment rows; skipped {} null rows",
        summary.rows,
        summary.first_date,
        summary.last_date,
        summary.dropped_bars,
        summary.dropped_sentiment,
        summary.skipped_null_rows
    );
    println!("wrote {}", layout.dataset().display());
    Ok(summary)
}

fn load_prepared(cfg: &RunConfig, layout: &Layout) -> Result<Prepared> {
    let spec = FeatureSpec::default();
    let path = layout.dataset();
    if !path.is_file() {
        return Err(usage(format!("{} not found; run `ingest` first", path.display())));
    }
    let dataset = store::load_dataset(&path, Some(&spec.indicators.column_names()))?;
    pipeline::prepare(&dataset, &spec, cfg)
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))
}

pub fn tune(cfg: &RunConfig, layout: &Layout) -> Result<Vec<TuneResult>> {
    let prep = load_prepared(cfg, layout)?;
    let pool = pool(cfg)?;
    println!("tuning on {} training samples, {} folds", prep.train_rows.len(), cfg.n_splits);
    let mut results = Vec::new();
    for &family in &cfg.families {
        let r = pool.install(|| pipeline::tune_family(&prep, family, cfg))?;
        store::write_json(&layout.tune_json(family), &r)?;
        store::write_atomic(&layout.tune_csv(family), store::render_leaderboard_csv(&r).as_bytes())?;
        println!(
            "{:<18} {:>4} candidates, {} failed, best mean MSE {:.6e} ({})",
            family.name(),
            r.n_candidates,
            r.failed.len(),
            r.best().mean_mse,
            r.best().spec.describe()
        );
        results.push(r);
    }
    let best = pipeline::best_rows(&results);
    store::write_json(&layout.best_json(), &best)?;
    store::write_atomic(&layout.best_csv(), store::render_best_csv(&best).as_bytes())?;
    Ok(results)
}

/// Specs from a file, or the tuned best rows for the configured families.
fn selected_specs(cfg: &RunConfig, layout: &Layout, specs: Option<&Path>) -> Result<Vec<BestRow>> {
    let rows: Vec<BestRow> = match specs {
        Some(path) => {
            let list: Vec<ModelSpec> = store::read_json(path)?;
            let mut rows: Vec<BestRow> = Vec::new();
            for spec in list {
                spec.validate()?;
                let base = spec.label();
                let n = rows.iter().filter(|r| r.label == base || r.label.starts_with(&format!("{base}_"))).count();
                let label = if n == 0 { base } else { format!("{base}_{}", n + 1) };
                rows.push(BestRow {
                    label,
                    spec,
                    mean_mse: f64::NAN,
                    fold_mse: Vec::new(),
                });
            }
            rows
        }
        None => {
            let path = layout.best_json();
            if !path.is_file() {
                return Err(usage(format!("{} not found; run `tune` first or pass --specs", path.display())));
            }
            store::read_json(&path)?
        }
    };
    let rows: Vec<BestRow> = rows.into_iter().filter(|r| cfg.families.contains(&r.spec.family)).collect();
    if rows.is_empty() {
        return Err(usage("no model specs selected"));
    }
    Ok(rows)
}

fn fit_selected(prep: &Prepared, rows: &[BestRow]) -> Result<Vec<(String, TrainedModel)>> {
    let mut models = Vec::new();
    for (label, outcome) in pipeline::train_all(prep, rows) {
        match outcome {
            Ok(m) => models.push((label, m)),
            Err(e) => eprintln!("warning: {label} failed to train: {e}"),
        }
    }
    if models.is_empty() {
        return Err(Error::Internal("every selected model failed to train".into()));
    }
    Ok(models)
}

pub fn train(cfg: &RunConfig, layout: &Layout, specs: Option<&Path>) -> Result<Vec<(String, TrainedModel)>> {
    let rows = selected_specs(cfg, layout, specs)?;
    let prep = load_prepared(cfg, layout)?;
    let models = pool(cfg)?.install(|| fit_selected(&prep, &rows))?;
    for (label, m) in &models {
        let mut model = m.clone();
        model.meta.wall_time_secs = None;
        let doc = ModelDocument::new(model, Some(prep.normalizer.clone()));
        store::save_model(&layout.model(label), &doc)?;
        println!(
            "{label:<18} trained on {} samples ({} iterations{})",
            m.meta.n_samples,
            m.meta.iterations,
            if m.meta.converged { "" } else { ", not converged" }
        );
    }
    Ok(models)
}

pub fn simulate(cfg: &RunConfig, layout: &Layout, specs: Option<&Path>) -> Result<SimulationDoc> {
    let rows = selected_specs(cfg, layout, specs)?;
    let prep = load_prepared(cfg, layout)?;
    let models = pool(cfg)?.install(|| fit_selected(&prep, &rows))?;
    let strategy = cfg.strategy();
    let summary = pipeline::simulate(&prep, &models, &strategy)?;
    let specs: Vec<(String, ModelSpec)> = models.iter().map(|(n, m)| (n.clone(), m.spec.clone())).collect();
    let doc = SimulationDoc::new(
        &summary,
        &specs,
        (cfg.test_start, cfg.test_end),
        cfg.initial_capital,
        cfg.fees,
    );

    let mut curves: Vec<(String, &fngcast_core::backtest::BacktestLedger)> =
        vec![(fngcast_core::backtest::BUY_HOLD_LABEL.to_string(), &summary.buy_hold)];
    for r in &summary.reports {
        store::write_atomic(&layout.ledger(&r.model), store::render_ledger_csv(&r.ledger).as_bytes())?;
        curves.push((r.model.clone(), &r.ledger));
    }
    store::write_atomic(&layout.equity(), store::render_equity_csv(&curves).as_bytes())?;
    let equity: Vec<Series> = curves
        .iter()
        .map(|(n, l)| Series {
            name: n.clone(),
            points: l.equity_curve(),
        })
        .collect();
    store::write_atomic(
        &layout.equity_plot(),
        line_chart("Equity over the test window", "USD", &equity).as_bytes(),
    )?;
    let mut predicted = vec![Series {
        name: "actual close".into(),
        points: prep.prices.iter().map(|p| (p.date, p.close)).collect(),
    }];
    for r in &summary.reports {
        let points = r
            .ledger
            .rows
            .iter()
            .zip(prep.prices.iter().skip(1))
            .filter_map(|(row, next)| row.predicted_next_close.map(|v| (next.date, v)))
            .collect();
        predicted.push(Series {
            name: r.model.clone(),
            points,
        });
    }
    store::write_atomic(
        &layout.predictions_plot(),
        line_chart("Predicted and actual closes", "USD", &predicted).as_bytes(),
    )?;
    store::write_json(&layout.simulation(), &doc)?;

    println!("{:<18} {:>5} {:>16}", "model", "hits", "final value");
    for row in &doc.table {
        let hits = row.hits.map_or_else(|| "-".into(), |h| h.to_string());
        println!("{:<18} {:>5} {:>16}", row.model, hits, usd(row.final_value));
    }
    for f in &doc.failures {
        eprintln!("warning: {} failed: {}", f.model, f.error);
    }
    Ok(doc)
}

fn optional<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if path.is_file() {
        store::read_json(path).map(Some)
    } else {
        Ok(None)
    }
}

pub fn load_artifacts(layout: &Layout) -> Result<RunArtifacts> {
    let mut tuning = Vec::new();
    for f in Family::ALL {
        if let Some(r) = optional::<TuneResult>(&layout.tune_json(f))? {
            tuning.push(r);
        }
    }
    Ok(RunArtifacts {
        ingest: optional(&layout.summary())?,
        tuning,
        best: optional(&layout.best_json())?,
        simulation: optional(&layout.simulation())?,
    })
}

pub fn report(layout: &Layout) -> Result<String> {
    if !layout.exists() {
        return Err(usage(format!("run directory {} does not exist", layout.root.display())));
    }
    let md = render(&load_artifacts(layout)?);
    store::write_atomic(&layout.report(), md.as_bytes())?;
    println!("wrote {}", layout.report().display());
    Ok(md)
}
