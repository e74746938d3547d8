//! Trial orchestration and result files.
//!
//! Trials run on a rayon pool of `jobs` threads. Each trial derives its seed
//! from the master seed and its index only, and results are collected in
//! trial order, so output does not depend on `jobs`.

use std::io::Write;
use std::path::{Path, PathBuf};

use pulearn_core::bench::{bootstrap_resample, evaluate_split};
use pulearn_core::math::mix_seed;
use pulearn_core::metrics::MetricReport;
use pulearn_core::{synth, Dataset, GeneratorConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::ResultTable;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Fraction of each synthetic dataset used for training.
pub const TRAIN_FRACTION: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct BenchOutput {
    /// One report per (trial, model), trial-major.
    pub reports: Vec<MetricReport>,
    pub table: ResultTable,
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    mix_seed(master, trial as u64)
}

/// The dataset of synthetic trial `trial`.
pub fn trial_dataset(cfg: &ExperimentConfig, trial: usize) -> Result<Dataset> {
    let gen = GeneratorConfig {
        seed: trial_seed(cfg.seed, trial),
        ..cfg.generator.clone()
    };
    Ok(synth::generate(&gen)?)
}

/// Generates, splits, tunes, fits and scores every model for one trial.
pub fn synth_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<MetricReport>> {
    let seed = trial_seed(cfg.seed, trial);
    let wrap = |source| Error::Trial { trial, source };
    let data = trial_dataset(cfg, trial)?;
    let (train, test) = synth::split(&data, TRAIN_FRACTION, mix_seed(seed, 1)).map_err(wrap)?;
    evaluate_split(&train, &test, &cfg.models, &cfg.protocol, mix_seed(seed, 2), trial).map_err(wrap)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))
}

fn run_indexed<F>(count: usize, jobs: usize, f: F) -> Result<Vec<MetricReport>>
where
    F: Fn(usize) -> Result<Vec<MetricReport>> + Sync,
{
    let per_trial: Vec<Result<Vec<MetricReport>>> = pool(jobs)?.install(|| (0..count).into_par_iter().map(&f).collect());
    let mut reports = Vec::new();
    for r in per_trial {
        reports.extend(r?);
    }
    Ok(reports)
}

pub fn run_synth_benchmark(cfg: &ExperimentConfig, jobs: usize) -> Result<BenchOutput> {
    let reports = run_indexed(cfg.trials, jobs, |t| synth_trial(cfg, t))?;
    let table = ResultTable::build(&cfg.models, &reports, cfg.quantile_rule)?;
    Ok(BenchOutput { reports, table })
}

/// Bootstrap evaluation of `data`, which must carry true classes.
pub fn run_real_benchmark(cfg: &ExperimentConfig, data: &Dataset, jobs: usize) -> Result<BenchOutput> {
    data.require_truth()?;
    let reports = run_indexed(cfg.resamples, jobs, |r| {
        bootstrap_resample(data, &cfg.models, &cfg.protocol, cfg.seed, r).map_err(|source| Error::Trial { trial: r, source })
    })?;
    let table = ResultTable::build(&cfg.models, &reports, cfg.quantile_rule)?;
    Ok(BenchOutput { reports, table })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Per-trial CSV with columns `model,trial_id,f1,accuracy,auc,brier`; a
/// missing AUC is an empty field.
pub fn write_reports_csv(path: &Path, reports: &[MetricReport]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(w, "model,trial_id,f1,accuracy,auc,brier").map_err(io)?;
    for r in reports {
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{},{:.16e}",
            r.model,
            r.trial_id,
            r.f1,
            r.accuracy,
            opt(r.auc),
            r.brier
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Serialize)]
struct Aggregate<'a> {
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    results: &'a ResultTable,
}

#[derive(Serialize)]
struct Significance<'a> {
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    quantile: f64,
    pairs: serde_json::Value,
}

/// Files written by a benchmark run.
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub reports: PathBuf,
    pub aggregate: PathBuf,
    pub significance: PathBuf,
}

impl OutputFiles {
    pub fn in_dir(dir: &Path, reports_name: &str) -> Self {
        Self {
            reports: dir.join(reports_name),
            aggregate: dir.join("aggregate.json"),
            significance: dir.join("significance.json"),
        }
    }
}

pub fn write_outputs(files: &OutputFiles, command: &str, cfg: &ExperimentConfig, out: &BenchOutput) -> Result<()> {
    write_reports_csv(&files.reports, &out.reports)?;
    crate::io::write_json(
        &files.aggregate,
        &Aggregate {
            command,
            seed: cfg.seed,
            config: cfg,
            results: &out.table,
        },
    )?;
    crate::io::write_json(
        &files.significance,
        &Significance {
            command,
            seed: cfg.seed,
            config: cfg,
            quantile: cfg.quantile_rule,
            pairs: out.table.significance_json(),
        },
    )
}
