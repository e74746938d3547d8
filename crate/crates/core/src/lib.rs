//! Positive-unlabeled learning with explicit models of the annotation process.
//!
//! An annotator labels a true positive `x` with probability `s(x)` (the
//! selection function), and the classifier of interest is `t(x) = p(y=1|x)`.
//! The observed labeling probability is `h(x) = s(x) t(x)`:
//!
//! * the sigmoidal product model (SPM) takes `s` to be a sigmoid;
//! * the psychometric model (PsychM) takes `s = gamma + (1-gamma-lambda) sigmoid`,
//!   with a guessing rate `gamma` and a lapse rate `lambda`.
//!
//! The crate is `no_std` (with `alloc`): it holds the models, the penalized
//! likelihood and its gradient, the optimizers, the baseline estimators,
//! cross-validation, the synthetic generator and the evaluation metrics.
//! File formats and orchestration live in the `pulearn` crate.
#![no_std]

extern crate alloc;

pub mod bench;
pub mod cv;
pub mod data;
pub mod error;
pub mod estimators;
pub mod math;
pub mod metrics;
pub mod model;
pub mod objective;
pub mod optimize;
pub mod synth;

pub use bench::{bootstrap_evaluate, evaluate_split, EvalProtocol};
pub use cv::{select_hyperparams, CvConfig, CvSelection};
pub use data::Dataset;
pub use error::{Error, Result};
pub use estimators::{fit, FactorRule, FitOptions, FittedModel};
pub use metrics::{MetricReport, SignificanceMatrix};
pub use model::{Affine, ModelKind, Psychometric, PsychmParams, SpmParams};
pub use objective::{Family, FreeParams, Layout, Norm, RegConfig};
pub use optimize::{minimize, Method, OptimResult, OptimizerConfig, OptimizerOverrides};
pub use synth::{FeatureDistribution, GeneratorConfig};
