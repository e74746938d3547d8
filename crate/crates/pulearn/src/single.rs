//! Fitting one model on a whole dataset.

use pulearn_core::cv::CvSelection;
use pulearn_core::estimators::Diagnostics;
use pulearn_core::math::cosine_similarity;
use pulearn_core::metrics::{brier, MetricReport};
use pulearn_core::{Affine, Dataset, ModelKind, Psychometric, RegConfig};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedParams {
    pub target: Affine,
    pub selection: Option<Psychometric>,
    pub c_hat: Option<f64>,
}

/// Agreement with the generating parameters recorded in a dataset sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recovery {
    pub target_cosine: f64,
    pub selection_cosine: Option<f64>,
    pub gamma_error: Option<f64>,
    pub lambda_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingMetrics {
    /// Brier score of the predicted annotation probability against `l`.
    pub annotation_brier: f64,
    /// Classification metrics against `y`, when the data carries it.
    pub classification: Option<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub model: ModelKind,
    pub rows: usize,
    pub dim: usize,
    pub reg: RegConfig,
    /// Mean held-out Brier per penalty candidate, `c_alpha` varying slowest.
    pub cv_mean_brier: Vec<Option<f64>>,
    pub params: FittedParams,
    pub diagnostics: Diagnostics,
    pub training: TrainingMetrics,
    pub recovery: Option<Recovery>,
}

pub fn fit_single(cfg: &ExperimentConfig, data: &Dataset, model: ModelKind) -> Result<FitReport> {
    let (cv, fitted): (CvSelection, _) = cfg.protocol.tune_and_fit(model, data, cfg.seed)?;
    let annotation_brier = brier(&fitted.annotation_probabilities(data), data.labels())?;
    let classification = match data.truth() {
        Some(y) => Some(MetricReport::compute(model, 0, &fitted.scores(data), y)?),
        None => None,
    };
    let recovery = data.true_params.as_ref().map(|truth| {
        let sel = fitted.selection.as_ref();
        Recovery {
            target_cosine: cosine_similarity(&fitted.target.weights, &truth.target.weights),
            selection_cosine: sel.map(|s| cosine_similarity(&s.base.weights, &truth.selection.base.weights)),
            gamma_error: sel.map(|s| s.gamma - truth.selection.gamma),
            lambda_error: sel.map(|s| s.lambda - truth.selection.lambda),
        }
    });
    Ok(FitReport {
        seed: cfg.seed,
        config: cfg.clone(),
        model,
        rows: data.len(),
        dim: data.dim(),
        reg: cv.reg,
        cv_mean_brier: cv.mean_brier,
        params: FittedParams {
            target: fitted.target,
            selection: fitted.selection,
            c_hat: fitted.c_hat,
        },
        diagnostics: fitted.diagnostics,
        training: TrainingMetrics {
            annotation_brier,
            classification,
        },
        recovery,
    })
}
