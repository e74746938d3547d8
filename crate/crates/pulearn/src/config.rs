//! Experiment configuration.
//!
//! Files hold one `key = value` pair per line, with dotted section prefixes
//! (`generator.n = 5000`). Blank lines and lines starting with `#` are
//! ignored. Every key can also be set from the command line as
//! `--generator.n 5000` or `--generator.n=5000`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use pulearn_core::estimators::FactorRule;
use pulearn_core::metrics::{literal_quantile, DEFAULT_QUANTILE};
use pulearn_core::{EvalProtocol, FeatureDistribution, GeneratorConfig, Method, ModelKind, Norm};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_RESAMPLES: usize = 200;
/// Significance level whose two readings give the named quantile rules.
pub const SIGNIFICANCE_LEVEL: f64 = 0.9;

/// Everything that determines the output of a run. `jobs` and the output
/// directory are deliberately absent: they never change results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub resamples: usize,
    pub models: Vec<ModelKind>,
    /// Quantile of the score differences tested for significance.
    pub quantile_rule: f64,
    pub generator: GeneratorConfig,
    pub protocol: EvalProtocol,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: DEFAULT_TRIALS,
            resamples: DEFAULT_RESAMPLES,
            models: ModelKind::ALL.to_vec(),
            quantile_rule: DEFAULT_QUANTILE,
            generator: GeneratorConfig::default(),
            protocol: EvalProtocol::default(),
        }
    }
}

fn bad(key: &str, value: &str, expected: &str) -> String {
    format!("invalid value {value:?} for {key}: expected {expected}")
}

fn num<T: FromStr>(key: &str, value: &str, expected: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| bad(key, value, expected))
}

fn list(key: &str, value: &str) -> std::result::Result<Vec<f64>, String> {
    value
        .split(',')
        .map(|v| num(key, v.trim(), "a comma-separated list of numbers"))
        .collect()
}

pub fn parse_models(value: &str) -> std::result::Result<Vec<ModelKind>, String> {
    if value.trim() == "all" {
        return Ok(ModelKind::ALL.to_vec());
    }
    let mut models = Vec::new();
    for name in value.split(',').map(str::trim) {
        let kind: ModelKind = name
            .parse()
            .map_err(|_| bad("models", name, "naive, elkan, spm, psychm, real or all"))?;
        if !models.contains(&kind) {
            models.push(kind);
        }
    }
    Ok(models)
}

/// `conventional`, `literal`, or a number in `[0, 1]`.
pub fn parse_quantile_rule(value: &str) -> std::result::Result<f64, String> {
    let q = match value.trim() {
        // (1 - 0.9) / 2 is not exactly 0.05 in floating point.
        "conventional" => DEFAULT_QUANTILE,
        "literal" => literal_quantile(SIGNIFICANCE_LEVEL),
        v => num("quantile_rule", v, "conventional, literal or a number in [0, 1]")?,
    };
    if !(0.0..=1.0).contains(&q) {
        return Err(bad("quantile_rule", value, "a number in [0, 1]"));
    }
    Ok(q)
}

fn parse_norm(key: &str, value: &str) -> std::result::Result<Norm, String> {
    match value {
        "l1" => Ok(Norm::L1),
        "l2sq" => Ok(Norm::L2Squared),
        _ => Err(bad(key, value, "l1 or l2sq")),
    }
}

fn parse_method(key: &str, value: &str) -> std::result::Result<Method, String> {
    match value {
        "adam" => Ok(Method::AdaptiveMoment),
        "nadam" => Ok(Method::AdaptiveMomentNesterov),
        "lbfgs" => Ok(Method::LimitedMemoryQuasiNewton),
        _ => Err(bad(key, value, "adam, nadam or lbfgs")),
    }
}

impl ExperimentConfig {
    /// Sets one dotted key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        let g = &mut self.generator;
        let p = &mut self.protocol;
        match key {
            "seed" => self.seed = num(key, value, "an unsigned integer")?,
            "trials" => self.trials = num(key, value, "a positive integer")?,
            "resamples" => self.resamples = num(key, value, "a positive integer")?,
            "models" => self.models = parse_models(value)?,
            "quantile_rule" => self.quantile_rule = parse_quantile_rule(value)?,

            "generator.n" => g.n = num(key, value, "a positive integer")?,
            "generator.d" => g.d = num(key, value, "a positive integer")?,
            "generator.rho1" => g.rho1 = num(key, value, "a number")?,
            "generator.rho2" => g.rho2 = num(key, value, "a number")?,
            "generator.k" => g.k = num(key, value, "a number")?,
            "generator.gamma" => g.gamma = num(key, value, "a number")?,
            "generator.lambda" => g.lambda = num(key, value, "a number")?,
            "generator.x_dist" => {
                g.x_dist = match value {
                    "standard_normal" => FeatureDistribution::StandardNormal,
                    "uniform_cube" => FeatureDistribution::UniformCube,
                    _ => return Err(bad(key, value, "standard_normal or uniform_cube")),
                }
            }

            "cv.folds" => p.cv.folds = num(key, value, "an integer >= 2")?,
            "cv.grid_alpha" => p.cv.grid_alpha = list(key, value)?,
            "cv.grid_a" => p.cv.grid_a = list(key, value)?,
            "cv.norm_alpha" => p.cv.norm_alpha = parse_norm(key, value)?,
            "cv.norm_a" => p.cv.norm_a = parse_norm(key, value)?,

            "optimizer.method" => p.optimizer.method = Some(parse_method(key, value)?),
            "optimizer.step_size" => p.optimizer.step_size = Some(num(key, value, "a number")?),
            "optimizer.max_iters" => p.optimizer.max_iters = Some(num(key, value, "an integer")?),
            "optimizer.grad_tol" => p.optimizer.grad_tol = Some(num(key, value, "a number")?),
            "optimizer.history_size" => p.optimizer.history_size = Some(num(key, value, "an integer")?),
            "optimizer.moment_decays" => match list(key, value)?.as_slice() {
                &[b1, b2] => p.optimizer.moment_decays = Some((b1, b2)),
                _ => return Err(bad(key, value, "two numbers")),
            },

            "fit.n_starts" => p.n_starts = num(key, value, "a positive integer")?,
            "fit.init_gamma" => p.init_gamma = num(key, value, "a number")?,
            "fit.init_lambda" => p.init_lambda = num(key, value, "a number")?,
            "fit.holdout_frac" => p.holdout_frac = num(key, value, "a number")?,
            "fit.factor_rule" => {
                p.factor_rule = match value {
                    "smaller_norm" => FactorRule::SmallerNorm,
                    "larger_norm" => FactorRule::LargerNorm,
                    _ => return Err(bad(key, value, "smaller_norm or larger_norm")),
                }
            }
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`; `origin` names the source in errors.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: i as u64 + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, found {line:?}")))?;
            self.set(key.trim(), value).map_err(parse_err)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, path)
    }

    /// Checks cross-field constraints and propagates the master seed into
    /// the generator section.
    pub fn validate(&mut self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.resamples == 0 {
            return Err(Error::Config("resamples must be at least 1".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        if self.protocol.n_starts == 0 {
            return Err(Error::Config("fit.n_starts must be at least 1".into()));
        }
        self.generator.seed = self.seed;
        self.generator.validate()?;
        self.protocol.cv.validate()?;
        let opt = self.protocol.optimizer.apply(Default::default());
        opt.validate()?;
        Ok(())
    }
}

/// `(key, value)` pairs taken from dotted command-line flags.
pub type Overrides = Vec<(String, String)>;

/// Splits `--dotted.key value` and `--dotted.key=value` pairs out of `args`,
/// returning the remaining arguments and the extracted overrides in order.
pub fn extract_overrides(args: Vec<String>) -> Result<(Vec<String>, Overrides)> {
    let mut rest = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (name, inline) = match flag.split_once('=') {
            Some((n, v)) => (n, Some(v.to_string())),
            None => (flag, None),
        };
        if !name.contains('.') {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it
                .next()
                .ok_or_else(|| Error::Config(format!("--{name} needs a value")))?,
        };
        overrides.push((name.to_string(), value));
    }
    Ok((rest, overrides))
}

/// Output directory, created if needed and checked for writability before
/// any computation starts.
pub fn prepare_output_dir(dir: &Path) -> Result<PathBuf> {
    let unwritable = |source| Error::Unwritable {
        path: dir.to_path_buf(),
        source,
    };
    std::fs::create_dir_all(dir).map_err(unwritable)?;
    let probe = dir.join(".pulearn-write-check");
    std::fs::write(&probe, b"").map_err(unwritable)?;
    std::fs::remove_file(&probe).map_err(unwritable)?;
    Ok(dir.to_path_buf())
}
