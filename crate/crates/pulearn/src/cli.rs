//! Command-line entry point.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pulearn_core::metrics::Metric;
use pulearn_core::{synth, ModelKind};

use crate::aggregate::ResultTable;
use crate::config::{extract_overrides, parse_models, parse_quantile_rule, prepare_output_dir, ExperimentConfig};
use crate::error::{Error, Result};
use crate::io::{load_dataset, write_dataset, write_json, write_sidecar, Sidecar};
use crate::runner::{run_real_benchmark, run_synth_benchmark, write_outputs, OutputFiles};
use crate::single::fit_single;

const AFTER_HELP: &str = "Any configuration key can be given as a flag of the same dotted name, \
for example --generator.n 2000 or --cv.grid_a=0,1,10.";

#[derive(Debug, Parser)]
#[command(name = "pulearn", version, about = "Positive-unlabeled learning experiments", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one synthetic dataset and its sidecar to the output directory.
    Generate(Common),
    /// Repeated synthetic trials: generate, split, tune, fit and score.
    BenchSynth(Common),
    /// Bootstrap evaluation on a dataset file with true classes.
    BenchReal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
    },
    /// Fit one model on a whole dataset file.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: String,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    resamples: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Comma-separated model names, or `all`.
    #[arg(long)]
    models: Option<String>,
    /// `conventional`, `literal` or a quantile in [0, 1].
    #[arg(long)]
    quantile_rule: Option<String>,
}

impl Common {
    fn resolve(&self, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (key, value) in overrides {
            cfg.set(key, value).map_err(|m| Error::Config(format!("--{key}: {m}")))?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(r) = self.resamples {
            cfg.resamples = r;
        }
        if let Some(m) = &self.models {
            cfg.models = parse_models(m).map_err(Error::Config)?;
        }
        if let Some(q) = &self.quantile_rule {
            cfg.quantile_rule = parse_quantile_rule(q).map_err(Error::Config)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs the command line `args` (program name first).
pub fn run(args: Vec<String>) -> Result<()> {
    let (args, overrides) = extract_overrides(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Error::Config(e.to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Generate(common) => {
            let cfg = common.resolve(&overrides)?;
            let dir = prepare_output_dir(&common.out)?;
            let data = synth::generate(&cfg.generator)?;
            let path = dir.join("dataset.csv");
            write_dataset(&path, &data)?;
            write_sidecar(
                &path,
                &Sidecar {
                    seed: cfg.seed,
                    generator: cfg.generator.clone(),
                    true_params: data.true_params.clone(),
                },
            )?;
            eprintln!("wrote {} ({} rows)", path.display(), data.len());
        }
        Command::BenchSynth(common) => {
            let cfg = common.resolve(&overrides)?;
            let dir = prepare_output_dir(&common.out)?;
            let out = run_synth_benchmark(&cfg, common.jobs)?;
            let files = OutputFiles::in_dir(&dir, "trials.csv");
            write_outputs(&files, "bench-synth", &cfg, &out)?;
            print_table(&out.table);
            report_files(&files);
        }
        Command::BenchReal { common, data } => {
            let cfg = common.resolve(&overrides)?;
            let dir = prepare_output_dir(&common.out)?;
            let (dataset, _) = load_dataset(&data)?;
            if dataset.truth().is_none() {
                return Err(Error::Parse {
                    path: data,
                    line: 1,
                    message: "bench-real needs a `y` column".into(),
                });
            }
            let out = run_real_benchmark(&cfg, &dataset, common.jobs)?;
            let files = OutputFiles::in_dir(&dir, "resamples.csv");
            write_outputs(&files, "bench-real", &cfg, &out)?;
            print_table(&out.table);
            report_files(&files);
        }
        Command::Fit { common, data, model } => {
            let cfg = common.resolve(&overrides)?;
            let kind: ModelKind = model
                .parse()
                .map_err(|_| Error::Config(format!("unknown model {model:?}")))?;
            let dir = prepare_output_dir(&common.out)?;
            let (dataset, _) = load_dataset(&data)?;
            let report = fit_single(&cfg, &dataset, kind)?;
            let path = dir.join(format!("fit_{kind}.json"));
            write_json(&path, &report)?;
            if !report.diagnostics.converged {
                eprintln!(
                    "warning: optimizer stopped with gradient norm {:.3e} after {} iterations",
                    report.diagnostics.final_grad_norm, report.diagnostics.iterations
                );
            }
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn report_files(files: &OutputFiles) {
    for p in [&files.reports, &files.aggregate, &files.significance] {
        eprintln!("wrote {}", p.display());
    }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn print_table(table: &ResultTable) {
    print!("{:<8}", "model");
    for m in Metric::ALL {
        print!("{:>20}", m.as_str());
    }
    println!();
    for &model in &table.models {
        print!("{:<8}", model.as_str());
        for m in Metric::ALL {
            let row = table.table(m).rows.iter().find(|r| r.model == model);
            let text = match row {
                Some(r) => format!("{} ± {}", cell(r.mean), cell(r.std_err)),
                None => "-".into(),
            };
            print!("{text:>20}");
        }
        println!();
    }
}

/// Path of the dataset written by `generate` into `dir`.
pub fn generated_dataset_path(dir: &Path) -> PathBuf {
    dir.join("dataset.csv")
}
