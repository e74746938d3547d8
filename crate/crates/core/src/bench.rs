//! Train/test evaluation of several model kinds, used by both the synthetic
//! trials and the bootstrap protocol.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cv::{CvConfig, CvPlan, CvSelection};
use crate::data::Dataset;
use crate::error::Result;
use crate::estimators::{fit, FactorRule, FitOptions, FittedModel};
use crate::math::mix_seed;
use crate::metrics::MetricReport;
use crate::model::ModelKind;
use crate::optimize::OptimizerOverrides;

/// How each model is tuned and fitted inside a trial.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalProtocol {
    pub cv: CvConfig,
    /// Applied on top of each kind's default optimizer.
    pub optimizer: OptimizerOverrides,
    pub n_starts: usize,
    pub init_gamma: f64,
    pub init_lambda: f64,
    pub holdout_frac: f64,
    pub factor_rule: FactorRule,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        let base = FitOptions::for_kind(ModelKind::Psychm, 1);
        Self {
            cv: CvConfig::default(),
            optimizer: OptimizerOverrides::default(),
            n_starts: 1,
            init_gamma: base.init_gamma,
            init_lambda: base.init_lambda,
            holdout_frac: base.holdout_frac,
            factor_rule: base.factor_rule,
        }
    }
}

impl EvalProtocol {
    pub fn fit_options(&self, kind: ModelKind, dim: usize, seed: u64) -> FitOptions {
        let mut opts = FitOptions::for_kind(kind, dim).with_seed(seed);
        opts.optimizer = self.optimizer.apply(opts.optimizer);
        opts.n_starts = self.n_starts;
        opts.init_gamma = self.init_gamma;
        opts.init_lambda = self.init_lambda;
        opts.holdout_frac = self.holdout_frac;
        opts.factor_rule = self.factor_rule;
        opts
    }

    /// Chooses penalties for `kind` by cross-validation on `train` and refits
    /// on all of `train` with them.
    pub fn tune_and_fit(&self, kind: ModelKind, train: &Dataset, seed: u64) -> Result<(CvSelection, FittedModel)> {
        let opts = self.fit_options(kind, train.dim(), mix_seed(seed, 1));
        let cv = CvConfig {
            seed: mix_seed(seed, 2),
            ..self.cv.clone()
        };
        let chosen = CvPlan::new(train, kind, &cv, &opts)?.run()?;
        let model = fit(kind, train, &chosen.reg, &opts)?;
        Ok((chosen, model))
    }

    /// [`Self::tune_and_fit`] on `train`, scored against the classes of `test`.
    pub fn evaluate_kind(
        &self,
        kind: ModelKind,
        train: &Dataset,
        test: &Dataset,
        seed: u64,
        trial_id: usize,
    ) -> Result<MetricReport> {
        let truth = test.require_truth()?;
        let (_, model) = self.tune_and_fit(kind, train, seed)?;
        MetricReport::compute(kind, trial_id, &model.scores(test), truth)
    }
}

/// Reports for every kind on one train/test pair, in `kinds` order.
pub fn evaluate_split(
    train: &Dataset,
    test: &Dataset,
    kinds: &[ModelKind],
    protocol: &EvalProtocol,
    seed: u64,
    trial_id: usize,
) -> Result<Vec<MetricReport>> {
    kinds
        .iter()
        .map(|&k| protocol.evaluate_kind(k, train, test, mix_seed(seed, k as u64 + 100), trial_id))
        .collect()
}

/// Row indices of bootstrap resample `index`: `n` draws with replacement,
/// the first half for training and the rest for testing.
pub fn bootstrap_indices(n: usize, seed: u64, index: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, index as u64));
    let draws: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let half = n / 2;
    (draws[..half].to_vec(), draws[half..].to_vec())
}

/// One bootstrap resample evaluated for every kind.
pub fn bootstrap_resample(
    data: &Dataset,
    kinds: &[ModelKind],
    protocol: &EvalProtocol,
    seed: u64,
    index: usize,
) -> Result<Vec<MetricReport>> {
    data.require_truth()?;
    let (train_idx, test_idx) = bootstrap_indices(data.len(), seed, index);
    let train = data.select(&train_idx);
    let test = data.select(&test_idx);
    evaluate_split(&train, &test, kinds, protocol, mix_seed(seed, !(index as u64)), index)
}

/// All `resamples` bootstrap evaluations, resample-major.
pub fn bootstrap_evaluate(
    data: &Dataset,
    kinds: &[ModelKind],
    resamples: usize,
    protocol: &EvalProtocol,
    seed: u64,
) -> Result<Vec<MetricReport>> {
    if resamples == 0 {
        return Err(crate::error::Error::InvalidParameter(
            "at least one resample is required".into(),
        ));
    }
    let mut out = Vec::with_capacity(resamples * kinds.len());
    for r in 0..resamples {
        out.extend(bootstrap_resample(data, kinds, protocol, seed, r)?);
    }
    Ok(out)
}
