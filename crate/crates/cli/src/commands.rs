use anyhow::{bail, Context, Result};
use quakelr::bench::{
    generate_noise_pool, generate_synthetic, ingest_predictions, partition_by_event, sweep, Predictor,
};
use quakelr::eval::{mcnemar_test, EvalReport, McNemarResult};
use quakelr::features::io::{FeatureRow, FeatureTable};
use quakelr::features::{standardize_apply, standardize_fit};
use quakelr::model::{self, TrainOptions};
use quakelr::selection::{discover, EnsembleReport};
use quakelr::waveform::io::{read_jsonl, write_jsonl, TaggedRecord};
use quakelr::waveform::prepare;
use quakelr::{FeatureId, FeatureRegistry, FeatureVector, Label, LinearModel};
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::{Cli, Command, EvalArgs, ExtractArgs, SweepArgs};

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.config.as_deref(), cli.seed)?;
    std::fs::create_dir_all(&cli.out_dir)
        .with_context(|| format!("creating output directory {}", cli.out_dir.display()))?;
    let out = |name: &str| cli.out_dir.join(name);
    match &cli.command {
        Command::Synth { pool } => cmd_synth(&cfg, *pool, &out(if *pool { "pool.jsonl" } else { "waveforms.jsonl" })),
        Command::Split { input } => cmd_split(&cfg, input, &out("split.jsonl")),
        Command::Extract(a) => cmd_extract(&cfg, a, &out(&a.output)),
        Command::Select { features } => cmd_select(&cfg, features, &out("selection.json"), &out("weights.csv")),
        Command::Train { features, selection } => {
            cmd_train(&cfg, features, selection.as_deref(), &out("model.json"))
        }
        Command::Eval(a) => cmd_eval(&cfg, a, &out("eval.json")),
        Command::Sweep(a) => cmd_sweep(&cfg, a, &cli.out_dir),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn read_table(path: &Path) -> Result<FeatureTable> {
    let t = FeatureTable::read_csv(path)?;
    if t.rows.is_empty() {
        bail!("{}: no rows", path.display());
    }
    Ok(t)
}

fn read_selection(path: &Path) -> Result<EnsembleReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: not a selection report", path.display()))
}

/// Rows of one partition; refuses untagged tables.
fn partition_rows(table: &FeatureTable, path: &Path, name: &str) -> Result<Vec<FeatureVector>> {
    if table.rows.iter().all(|r| r.partition.is_none()) {
        bail!("{}: rows carry no partition tags; extract from a split file", path.display());
    }
    let rows = table.partition(name);
    if rows.is_empty() {
        bail!("{}: no rows in partition {name:?}", path.display());
    }
    Ok(rows)
}

fn cmd_synth(cfg: &RunConfig, pool: bool, path: &Path) -> Result<()> {
    let recs = if pool {
        generate_noise_pool(&cfg.pool).context("pool")?
    } else {
        generate_synthetic(&cfg.synth).context("synth")?
    };
    let tagged: Vec<TaggedRecord> = recs
        .into_iter()
        .map(|record| TaggedRecord { record, partition: None })
        .collect();
    write_jsonl(path, &tagged)?;
    println!("{}: {} records", path.display(), tagged.len());
    Ok(())
}

fn cmd_split(cfg: &RunConfig, input: &Path, path: &Path) -> Result<()> {
    let recs: Vec<_> = read_jsonl(input)?.into_iter().map(|t| t.record).collect();
    if recs.is_empty() {
        bail!("{}: no records", input.display());
    }
    let p = partition_by_event(&recs, &cfg.split).with_context(|| format!("splitting {}", input.display()))?;
    let mut tagged = Vec::with_capacity(recs.len());
    for (name, part) in p.parts() {
        let events: std::collections::BTreeSet<_> = part.iter().filter_map(|r| r.event_id.as_ref()).collect();
        println!("{name}: {} traces, {} events", part.len(), events.len());
        tagged.extend(part.iter().cloned().map(|record| TaggedRecord {
            record,
            partition: Some(name.to_string()),
        }));
    }
    write_jsonl(path, &tagged)?;
    Ok(())
}

fn cmd_extract(cfg: &RunConfig, a: &ExtractArgs, path: &Path) -> Result<()> {
    let ids = match &a.selection {
        Some(s) => read_selection(s)?.selected,
        None => cfg.extract_features()?,
    };
    let recs = read_jsonl(&a.input)?;
    if recs.is_empty() {
        bail!("{}: no records", a.input.display());
    }
    let reg = FeatureRegistry::reproduction();
    let mut rows = Vec::with_capacity(recs.len());
    let mut failed = Vec::new();
    for t in &recs {
        let r = prepare(&t.record, &cfg.preprocess)
            .map_err(|e| e.to_string())
            .and_then(|p| reg.extract_vector(&p, &ids).map_err(|e| e.to_string()));
        match r {
            Ok(vector) => rows.push(FeatureRow {
                vector,
                partition: t.partition.clone(),
            }),
            Err(e) => failed.push(format!("{} ({e})", t.record.trace_id)),
        }
    }
    if !failed.is_empty() {
        bail!(
            "{}: {} traces could not be processed, nothing written:\n  {}",
            a.input.display(),
            failed.len(),
            failed.join("\n  ")
        );
    }
    let table = FeatureTable { feature_ids: ids, rows };
    table.write_csv(path)?;
    println!("{}: {} rows x {} features", path.display(), table.rows.len(), table.feature_ids.len());
    Ok(())
}

fn cmd_select(cfg: &RunConfig, features: &Path, path: &Path, weights: &Path) -> Result<()> {
    let table = read_table(features)?;
    let s = &cfg.select;
    let train = partition_rows(&table, features, &s.train_partition)?;
    let val = partition_rows(&table, features, &s.validation_partition)?;
    let params = standardize_fit(&train).context("standardizing training rows")?;
    let train = standardize_apply(&train, &params)?;
    let val = standardize_apply(&val, &params)?;
    let base: Vec<FeatureId> = s.base.iter().map(|b| FeatureId::from(b.as_str())).collect();
    for b in &base {
        if !table.feature_ids.contains(b) {
            bail!("select.base: feature {b} is not a column of {}", features.display());
        }
    }
    let report = discover(&train, &val, &table.feature_ids, &s.ensemble, &s.rule, &base)?;
    write_json(path, &report)?;
    std::fs::write(weights, report.distribution.to_csv())
        .with_context(|| format!("writing {}", weights.display()))?;
    let sel: Vec<&str> = report.selected.iter().map(|f| f.as_str()).collect();
    println!(
        "best validation MCC {:.4}; tie-set {} of {} runs; selected {}",
        report.best_mcc,
        report.tie_set.len(),
        report.runs.len(),
        sel.join(",")
    );
    Ok(())
}

fn cmd_train(cfg: &RunConfig, features: &Path, selection: Option<&Path>, path: &Path) -> Result<()> {
    let mut table = read_table(features)?;
    if let Some(s) = selection {
        table = table
            .project(&read_selection(s)?.selected)
            .map_err(|e| anyhow::anyhow!("{}: {e}", features.display()))?;
    }
    let train = partition_rows(&table, features, &cfg.train.partition)?;
    let params = standardize_fit(&train).context("standardizing training rows")?;
    let z = standardize_apply(&train, &params)?;
    let opt = TrainOptions {
        max_iters: cfg.train.max_iters,
        tol: cfg.train.tol,
        seed: cfg.train_seed(),
    };
    let mut m = model::train(&z, &table.feature_ids, &cfg.train.penalty(), &opt)?;
    m.threshold = cfg.train.threshold;
    m.standardization = Some(params);
    model::io::write(path, &m).with_context(|| format!("writing {}", path.display()))?;
    let meta = m.training_meta.as_ref().expect("set by train");
    println!(
        "{}: {} of {} weights nonzero, {} sweeps, converged {}",
        path.display(),
        m.nonzero_count(),
        m.weights.len(),
        meta.iterations,
        meta.converged
    );
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn load_predictors(models: &[PathBuf], preds: &[PathBuf], ids: &[String]) -> Result<Vec<Predictor>> {
    let mut out = Vec::new();
    for m in models {
        let model: LinearModel = model::io::read(m).map_err(anyhow::Error::msg)?;
        out.push(Predictor::Model { name: stem(m), model });
    }
    for p in preds {
        out.push(Predictor::External {
            name: stem(p),
            preds: ingest_predictions(p, ids)?,
        });
    }
    if out.is_empty() {
        bail!("give at least one --model or --predictions file");
    }
    Ok(out)
}

#[derive(Serialize)]
struct NamedReport {
    predictor: String,
    report: EvalReport,
}

#[derive(Serialize)]
struct PairTest {
    a: String,
    b: String,
    #[serde(flatten)]
    result: McNemarResult,
}

#[derive(Serialize)]
struct EvalOutput {
    partition: String,
    reports: Vec<NamedReport>,
    mcnemar: Vec<PairTest>,
}

fn predict_all(p: &Predictor, rows: &[FeatureVector]) -> Result<Vec<Label>> {
    rows.iter()
        .map(|x| match p {
            Predictor::Model { model, name } => model
                .classify_raw(x)
                .map_err(|e| anyhow::anyhow!("{name}: {e}")),
            Predictor::External { preds, .. } => Ok(preds[&x.trace_id]),
        })
        .collect()
}

fn cmd_eval(cfg: &RunConfig, a: &EvalArgs, path: &Path) -> Result<()> {
    let table = read_table(&a.features)?;
    let part = a.partition.clone().unwrap_or_else(|| cfg.eval.partition.clone());
    let rows = partition_rows(&table, &a.features, &part)?;
    let ids: Vec<String> = rows.iter().map(|r| r.trace_id.clone()).collect();
    let preds = load_predictors(&a.models, &a.predictions, &ids)?;
    let labels: Vec<Label> = rows.iter().map(|r| r.label).collect();
    let mut outs = Vec::new();
    let mut reports = Vec::new();
    for p in &preds {
        let y = predict_all(p, &rows)?;
        let report = EvalReport::from_predictions(&labels, &y)?;
        println!(
            "{}: MCC {:.5} accuracy {:.5} (tp {} tn {} fp {} fn {})",
            p.name(),
            report.mcc,
            report.accuracy,
            report.matrix.tp,
            report.matrix.tn,
            report.matrix.fp,
            report.matrix.fn_
        );
        reports.push(NamedReport { predictor: p.name().into(), report });
        outs.push(y);
    }
    let mut mcnemar = Vec::new();
    for i in 0..preds.len() {
        for j in i + 1..preds.len() {
            let result = mcnemar_test(&labels, &outs[i], &outs[j], cfg.eval.significance)?;
            println!(
                "McNemar {} vs {}: b {} c {} p {:.4e} significant {}",
                preds[i].name(),
                preds[j].name(),
                result.b,
                result.c,
                result.p_value,
                result.significant
            );
            mcnemar.push(PairTest { a: preds[i].name().into(), b: preds[j].name().into(), result });
        }
    }
    write_json(path, &EvalOutput { partition: part, reports, mcnemar })
}

fn cmd_sweep(cfg: &RunConfig, a: &SweepArgs, dir: &Path) -> Result<()> {
    let table = read_table(&a.features)?;
    let test = partition_rows(&table, &a.features, &cfg.eval.partition)?;
    let (positives, mut pool): (Vec<_>, Vec<_>) = test.into_iter().partition(|r| r.label.is_event());
    let mut seen: std::collections::HashSet<String> =
        positives.iter().chain(&pool).map(|r| r.trace_id.clone()).collect();
    for p in &a.noise_pool {
        let t = read_table(p)?;
        for r in t.vectors().into_iter().filter(|r| !r.label.is_event()) {
            if !seen.insert(r.trace_id.clone()) {
                bail!("{}: trace {} already present in another input", p.display(), r.trace_id);
            }
            pool.push(r);
        }
    }
    if positives.is_empty() {
        bail!("{}: no event rows in partition {:?}", a.features.display(), cfg.eval.partition);
    }
    let ids: Vec<String> = positives.iter().chain(&pool).map(|r| r.trace_id.clone()).collect();
    let preds = load_predictors(&a.models, &a.predictions, &ids)?;
    let t = sweep(&preds, &positives, &pool, &cfg.sweep)?;
    write_json(&dir.join("sweep.json"), &t)?;
    std::fs::write(dir.join("sweep.csv"), t.to_csv())?;
    std::fs::write(dir.join("sweep.txt"), t.to_text())?;
    print!("{}", t.to_text());
    Ok(())
}
