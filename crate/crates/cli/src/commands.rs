//! The three subcommands. All numerical work lives in the core crate; this
//! module only wires datasets, seeds and files together.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use liit_core::{
    load_csv, rerun_seed, run_benchmark, score_dataset, split, split_seed, train_full, train_liit,
    write_auc_table, BenchConfig, Dataset64, EvalReport, Regime, Strategy,
};
use serde::Serialize;

use crate::config::RunConfig;

/// `train --strategy` accepts the five sampling strategies plus the
/// full-data baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RegimeArg {
    Full,
    Random,
    AnomalyRepeated,
    AnomalyNormalUnique,
    AnomalyUnique,
    QuantileRepeated,
}

impl RegimeArg {
    fn regime(self) -> Regime {
        match self {
            RegimeArg::Full => Regime::FullModel,
            RegimeArg::Random => Regime::Liit(Strategy::Random),
            RegimeArg::AnomalyRepeated => Regime::Liit(Strategy::AnomalyRepeated),
            RegimeArg::AnomalyNormalUnique => Regime::Liit(Strategy::AnomalyNormalUnique),
            RegimeArg::AnomalyUnique => Regime::Liit(Strategy::AnomalyUnique),
            RegimeArg::QuantileRepeated => Regime::Liit(Strategy::QuantileRepeated),
        }
    }
}

fn load_datasets(cfg: &RunConfig) -> anyhow::Result<Vec<Dataset64>> {
    cfg.datasets
        .iter()
        .map(|spec| {
            let mut ds = load_csv(&spec.path, &spec.label_column, spec.has_header)
                .with_context(|| format!("loading {}", spec.path.display()))?;
            ds.rename(spec.display_name());
            eprintln!(
                "loaded {}: {} rows, {} features, {} classes",
                ds.name(),
                ds.n(),
                ds.dim(),
                ds.n_classes()
            );
            Ok(ds)
        })
        .collect()
}

fn artifact_writer(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

/// Score every configured dataset and write one CSV each
/// (`row_index,class,score,flag`), prefixed with the resolved config.
pub fn cmd_score(cfg: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let datasets = load_datasets(cfg)?;
    let mut written = Vec::new();
    for ds in &datasets {
        let scores = score_dataset(ds, &cfg.liit.lad)?;
        let path = cfg.output_dir.join(format!("scores_{}.csv", ds.name()));
        let mut out = artifact_writer(&path)?;
        writeln!(out, "# liit-config: {}", cfg.provenance_line())?;
        writeln!(out, "row_index,class,score,flag")?;
        for i in 0..ds.n() {
            writeln!(
                out,
                "{},{},{},{}",
                i,
                ds.labels()[i],
                scores.scores[i],
                u8::from(scores.flags[i])
            )?;
        }
        out.flush()?;
        eprintln!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}

/// Deterministic trace payload written by `train`. Wall times are kept out
/// of this file so identical seeds produce identical bytes; `bench` reports
/// carry the timings.
#[derive(Debug, Serialize)]
struct TraceFile<'a> {
    dataset: &'a str,
    strategy: String,
    seed: u64,
    rerun_seed: u64,
    config: &'a RunConfig,
    iterations: Vec<TraceIteration>,
}

#[derive(Debug, Serialize)]
struct TraceIteration {
    iteration: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mts_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distinct_mts_rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    misclassified_per_class: Option<Vec<usize>>,
    epochs_run: usize,
    train_loss: f64,
    val_loss: Option<f64>,
}

/// Train one regime per configured dataset; write the model blob and the
/// trace JSON.
pub fn cmd_train(cfg: &RunConfig, regime_arg: RegimeArg) -> anyhow::Result<Vec<PathBuf>> {
    let regime = regime_arg.regime();
    let datasets = load_datasets(cfg)?;
    let mut written = Vec::new();
    for ds in &datasets {
        let sp = split(ds, split_seed(cfg.seed, ds.name()))?;
        for warning in &sp.warnings {
            eprintln!("{}: {warning}", ds.name());
        }
        let run_seed = rerun_seed(cfg.seed, ds.name(), regime, 0);
        let mut liit_cfg = cfg.liit.clone();
        liit_cfg.net.seed = liit_core::derive_seed(run_seed, "net", 0);
        liit_cfg.sampler_seed = liit_core::derive_seed(run_seed, "sampler", 0);

        let (net, iterations) = match regime {
            Regime::FullModel => {
                let (net, outcome) = train_full(&sp, &liit_cfg)?;
                let record = TraceIteration {
                    iteration: 1,
                    mts_size: None,
                    distinct_mts_rows: None,
                    misclassified_per_class: None,
                    epochs_run: outcome.epochs_run,
                    train_loss: outcome.train_loss,
                    val_loss: outcome.val_loss,
                };
                (net, vec![record])
            }
            Regime::Liit(strategy) => {
                liit_cfg.strategy = strategy;
                let (net, trace) = train_liit(&sp, &liit_cfg)?;
                let records = trace
                    .records
                    .iter()
                    .map(|r| TraceIteration {
                        iteration: r.iteration,
                        mts_size: Some(r.mts_size),
                        distinct_mts_rows: Some(r.distinct_mts_rows),
                        misclassified_per_class: Some(r.misclassified_per_class.clone()),
                        epochs_run: r.epochs_run,
                        train_loss: r.train_loss,
                        val_loss: r.val_loss,
                    })
                    .collect();
                (net, records)
            }
        };

        let tag = regime.tag();
        let model_path = cfg.output_dir.join(format!("model_{}_{tag}.json", ds.name()));
        net.save_json(&model_path)?;
        eprintln!("wrote {}", model_path.display());

        let trace = TraceFile {
            dataset: ds.name(),
            strategy: regime.to_string(),
            seed: cfg.seed,
            rerun_seed: run_seed,
            config: cfg,
            iterations,
        };
        let trace_path = cfg.output_dir.join(format!("trace_{}_{tag}.json", ds.name()));
        let mut out = artifact_writer(&trace_path)?;
        serde_json::to_writer_pretty(&mut out, &trace)?;
        out.flush()?;
        eprintln!("wrote {}", trace_path.display());
        written.push(model_path);
        written.push(trace_path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct ReportFile<'a> {
    config: &'a RunConfig,
    /// True when any grid cell recorded a failure.
    incomplete: bool,
    reports: Vec<EvalReport>,
}

/// Run the benchmark grid and write the JSON report plus the AUC table.
pub fn cmd_bench(cfg: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let datasets = load_datasets(cfg)?;
    let bench = BenchConfig {
        reruns: cfg.reruns,
        master_seed: cfg.seed,
        parallelism: cfg.parallelism,
        perturb: cfg.perturb.clone(),
        liit: cfg.liit.clone(),
    };
    eprintln!(
        "benchmark: {} dataset(s) × {} regime(s) × {} rerun(s)",
        datasets.len(),
        cfg.strategies.len() + 1,
        cfg.reruns
    );
    let reports = run_benchmark(&datasets, &cfg.strategies, &bench);
    for report in &reports {
        for failure in &report.failures {
            eprintln!("{} / {}: {failure}", report.dataset, report.regime);
        }
    }

    let incomplete = reports.iter().any(|r| !r.failures.is_empty());
    let report_path = cfg.output_dir.join("report.json");
    let mut out = artifact_writer(&report_path)?;
    serde_json::to_writer_pretty(
        &mut out,
        &ReportFile {
            config: cfg,
            incomplete,
            reports: reports.clone(),
        },
    )?;
    out.flush()?;
    eprintln!("wrote {}", report_path.display());

    let table_path = cfg.output_dir.join("auc_table.csv");
    let mut table = artifact_writer(&table_path)?;
    writeln!(table, "# liit-config: {}", cfg.provenance_line())?;
    write_auc_table(&reports, &mut table)?;
    table.flush()?;
    eprintln!("wrote {}", table_path.display());

    Ok(vec![report_path, table_path])
}
