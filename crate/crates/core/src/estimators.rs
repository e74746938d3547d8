//! The five fitting procedures compared by the benchmark.
//!
//! Naive, Elkan and the real-class oracle are logistic regressions on
//! different targets. SPM and PsychM minimize the penalized negative
//! conditional log-likelihood of the annotation flags and keep the target
//! factor as the classifier.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::mix_seed;
use crate::model::{sigmoid, Affine, ModelKind, Psychometric};
use crate::objective::{inverse_reparam, AnnotationObjective, Family, Layout, LogisticObjective, RegConfig};
use crate::optimize::{minimize_fused, Method, OptimResult, OptimizerConfig};
use crate::synth::permutation;

/// Dimension up to which SPM and PsychM fits default to the quasi-Newton method.
pub const QUASI_NEWTON_MAX_DIM: usize = 50;

/// Which fitted SPM factor becomes the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FactorRule {
    /// The smoother factor (smaller norm) is the classifier.
    #[default]
    SmallerNorm,
    /// The steeper factor is the classifier. Suits data where the annotation
    /// process has a guessing floor, which flattens the fitted selection factor.
    LargerNorm,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitOptions {
    pub optimizer: OptimizerConfig,
    /// Independent random starts; the lowest final loss wins.
    pub n_starts: usize,
    pub seed: u64,
    /// Standard deviation of the Gaussian weight initialization. Biases start at 0.
    pub init_scale: f64,
    pub init_gamma: f64,
    pub init_lambda: f64,
    /// Fraction of the training rows Elkan keeps aside to estimate `c`.
    pub holdout_frac: f64,
    pub factor_rule: FactorRule,
}

impl FitOptions {
    /// Defaults for `kind` on `dim`-dimensional data.
    pub fn for_kind(kind: ModelKind, dim: usize) -> Self {
        let method = match kind {
            ModelKind::Psychm if dim > QUASI_NEWTON_MAX_DIM => Method::AdaptiveMoment,
            ModelKind::Spm if dim > QUASI_NEWTON_MAX_DIM => Method::AdaptiveMomentNesterov,
            _ => Method::LimitedMemoryQuasiNewton,
        };
        Self {
            optimizer: OptimizerConfig::with_method(method),
            n_starts: 1,
            seed: 0,
            init_scale: 0.1,
            init_gamma: 0.7,
            init_lambda: 0.02,
            holdout_frac: 0.2,
            factor_rule: FactorRule::SmallerNorm,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn initial_weights(&self, start: usize, len: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, start as u64));
        match Normal::new(0.0, self.init_scale) {
            Ok(normal) if self.init_scale > 0.0 => (0..len).map(|_| normal.sample(&mut rng)).collect(),
            _ => alloc::vec![0.0; len],
        }
    }
}

/// Summary of the optimizer run behind a fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub final_loss: f64,
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub starts: usize,
    pub best_start: usize,
}

impl Diagnostics {
    fn from_run(r: &OptimResult, starts: usize, best_start: usize) -> Self {
        Self {
            final_loss: r.final_loss,
            final_grad_norm: r.final_grad_norm,
            iterations: r.iterations,
            converged: r.converged,
            starts,
            best_start,
        }
    }
}

/// A trained classifier for `p(y = 1 | x)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedModel {
    pub kind: ModelKind,
    /// The classifier `t(x)`; for Elkan, the fitted `p(l = 1 | x)`.
    pub target: Affine,
    /// Selection function, SPM (zero rates) and PsychM only.
    pub selection: Option<Psychometric>,
    /// Estimated labeling frequency, Elkan only.
    pub c_hat: Option<f64>,
    pub reg: RegConfig,
    pub diagnostics: Diagnostics,
}

impl FittedModel {
    /// Estimated `p(y = 1 | x)`, always in `[0, 1]`.
    pub fn score(&self, x: &[f64]) -> f64 {
        let t = sigmoid(self.target.logit(x));
        match self.c_hat {
            Some(c) => elkan_score(t, c),
            None => t,
        }
    }

    /// Estimated `p(l = 1 | x)`.
    pub fn annotation_probability(&self, x: &[f64]) -> f64 {
        let t = sigmoid(self.target.logit(x));
        match &self.selection {
            Some(s) => s.eval_unchecked(x) * t,
            None => t,
        }
    }

    pub fn scores(&self, data: &Dataset) -> Vec<f64> {
        data.rows().map(|x| self.score(x)).collect()
    }

    pub fn annotation_probabilities(&self, data: &Dataset) -> Vec<f64> {
        data.rows().map(|x| self.annotation_probability(x)).collect()
    }
}

/// `min(1, h / c)`.
pub fn elkan_score(h: f64, c_hat: f64) -> f64 {
    (h / c_hat).min(1.0)
}

/// Mean of `h` over the labeled holdout examples.
pub fn estimate_c(h_labeled: &[f64]) -> Result<f64> {
    if h_labeled.is_empty() {
        return Err(Error::NoLabeledHoldout);
    }
    // Running mean: exact when every value is equal.
    let mut mean = 0.0;
    for (k, &h) in h_labeled.iter().enumerate() {
        mean += (h - mean) / (k + 1) as f64;
    }
    Ok(mean)
}

fn fit_logistic(
    data: &Dataset,
    targets: &[bool],
    reg: &RegConfig,
    opts: &FitOptions,
) -> Result<(Affine, Diagnostics)> {
    let first = targets.first().copied().ok_or(Error::EmptyDataset)?;
    if targets.iter().all(|&t| t == first) {
        return Err(Error::DegenerateClass);
    }
    let obj = LogisticObjective::new(data, targets, reg.c_a, reg.norm_a)?;
    let mut init = opts.initial_weights(0, data.dim());
    init.push(0.0);
    let run = minimize_fused(|v, g| obj.loss_and_gradient(v, g), &init, &opts.optimizer)?;
    let d = data.dim();
    let target = Affine::new(run.final_params[..d].to_vec(), run.final_params[d]);
    Ok((target, Diagnostics::from_run(&run, 1, 0)))
}

fn baseline_reg(reg: &RegConfig) -> RegConfig {
    RegConfig { c_alpha: 0.0, ..*reg }
}

/// Logistic regression of `l` on `X`, treating unlabeled rows as negatives.
pub fn fit_naive(data: &Dataset, reg: &RegConfig, opts: &FitOptions) -> Result<FittedModel> {
    let (target, diagnostics) = fit_logistic(data, data.labels(), reg, opts)?;
    Ok(FittedModel {
        kind: ModelKind::Naive,
        target,
        selection: None,
        c_hat: None,
        reg: baseline_reg(reg),
        diagnostics,
    })
}

/// Logistic regression of the ground-truth class `y` on `X`.
pub fn fit_real_oracle(data: &Dataset, reg: &RegConfig, opts: &FitOptions) -> Result<FittedModel> {
    let y = data.require_truth()?;
    let (target, diagnostics) = fit_logistic(data, y, reg, opts)?;
    Ok(FittedModel {
        kind: ModelKind::RealOracle,
        target,
        selection: None,
        c_hat: None,
        reg: baseline_reg(reg),
        diagnostics,
    })
}

/// Fits `p(l = 1 | x)` on all but a seeded holdout, estimates the constant
/// labeling frequency `c` on the holdout's labeled rows and scores with
/// `min(1, h(x) / c)`.
pub fn fit_elkan(data: &Dataset, reg: &RegConfig, opts: &FitOptions) -> Result<FittedModel> {
    if !(opts.holdout_frac > 0.0 && opts.holdout_frac < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "holdout fraction must be in (0, 1), got {}",
            opts.holdout_frac
        )));
    }
    let n = data.len();
    let holdout = (libm::round(opts.holdout_frac * n as f64) as usize).clamp(1, n);
    if holdout >= n {
        return Err(Error::EmptyDataset);
    }
    let perm = permutation(n, mix_seed(opts.seed, 0xE1CA));
    let (held, train) = perm.split_at(holdout);
    let labeled: Vec<usize> = held.iter().copied().filter(|&i| data.labels()[i]).collect();
    if labeled.is_empty() {
        return Err(Error::NoLabeledHoldout);
    }
    let train = data.select(train);
    let (target, diagnostics) = fit_logistic(&train, train.labels(), reg, opts)?;
    let h: Vec<f64> = labeled
        .iter()
        .map(|&i| sigmoid(target.logit(data.row(i))))
        .collect();
    let c_hat = estimate_c(&h)?;
    Ok(FittedModel {
        kind: ModelKind::Elkan,
        target,
        selection: None,
        c_hat: Some(c_hat),
        reg: baseline_reg(reg),
        diagnostics,
    })
}

fn multi_start(
    obj: &AnnotationObjective<'_>,
    opts: &FitOptions,
    mut init: impl FnMut(usize) -> Vec<f64>,
) -> Result<(OptimResult, Diagnostics)> {
    let starts = opts.n_starts.max(1);
    let mut best: Option<(OptimResult, usize)> = None;
    for start in 0..starts {
        let x0 = init(start);
        let run = minimize_fused(
            |v, g| obj.loss_and_gradient(v, g).unwrap_or(f64::NAN),
            &x0,
            &opts.optimizer,
        )?;
        let better = match &best {
            None => true,
            Some((b, _)) => run.final_loss < b.final_loss,
        };
        if better {
            best = Some((run, start));
        }
    }
    let (run, best_start) = best.expect("at least one start");
    let diagnostics = Diagnostics::from_run(&run, starts, best_start);
    Ok((run, diagnostics))
}

/// Applies the smoothness rule to the two fitted SPM factors: the factor whose
/// `(weights, bias)` vector has the smaller Euclidean norm is the classifier.
/// On an exact tie the first factor is the classifier.
///
/// Returns `(target, selection)`.
pub fn assign_factors(first: Affine, second: Affine) -> (Affine, Affine) {
    assign_factors_by(FactorRule::SmallerNorm, first, second)
}

/// [`assign_factors`] under an explicit rule; ties always go to `first`.
pub fn assign_factors_by(rule: FactorRule, first: Affine, second: Affine) -> (Affine, Affine) {
    let (n1, n2) = (first.full_norm(), second.full_norm());
    let first_wins = match rule {
        FactorRule::SmallerNorm => n1 <= n2,
        FactorRule::LargerNorm => n1 >= n2,
    };
    if first_wins {
        (first, second)
    } else {
        (second, first)
    }
}

/// Sigmoidal product model fit.
pub fn fit_spm(data: &Dataset, reg: &RegConfig, opts: &FitOptions) -> Result<FittedModel> {
    let obj = AnnotationObjective::new(data, Family::Spm, *reg)?;
    let layout = obj.layout();
    let (run, diagnostics) = multi_start(&obj, opts, |s| {
        let mut v = opts.initial_weights(s, layout.len());
        v[layout.beta()] = 0.0;
        v[layout.bias()] = 0.0;
        v
    })?;
    let params = layout.decode_spm(&run.final_params);
    let (target, selection) = assign_factors_by(opts.factor_rule, params.selection, params.target);
    Ok(FittedModel {
        kind: ModelKind::Spm,
        target,
        selection: Some(Psychometric::plain(selection)),
        c_hat: None,
        reg: *reg,
        diagnostics,
    })
}

/// Initial free-parameter vector for a PsychM start.
pub fn psychm_initial(layout: Layout, opts: &FitOptions, start: usize) -> Result<Vec<f64>> {
    let (g, l) = validate_initial_rates(opts.init_gamma, opts.init_lambda)?;
    let mut v = opts.initial_weights(start, layout.len());
    let (gi, li) = layout.rates().expect("psychm layout");
    v[layout.beta()] = 0.0;
    v[layout.bias()] = 0.0;
    v[gi] = g;
    v[li] = l;
    Ok(v)
}

fn validate_initial_rates(gamma: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma < 1.0 && (0.0..1.0).contains(&lambda) && gamma + lambda < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "initial rates must satisfy 0 < gamma < 1, 0 <= lambda < 1, gamma + lambda < 1; \
             got gamma={gamma}, lambda={lambda}"
        )));
    }
    inverse_reparam(gamma, lambda)
}

/// Psychometric model fit; the selection function keeps its guessing and lapse rates.
pub fn fit_psychm(data: &Dataset, reg: &RegConfig, opts: &FitOptions) -> Result<FittedModel> {
    validate_initial_rates(opts.init_gamma, opts.init_lambda)?;
    let obj = AnnotationObjective::new(data, Family::Psychm, *reg)?;
    let layout = obj.layout();
    let (run, diagnostics) = multi_start(&obj, opts, |s| {
        psychm_initial(layout, opts, s).expect("validated initial rates")
    })?;
    let params = layout.decode_psychm(&run.final_params);
    Ok(FittedModel {
        kind: ModelKind::Psychm,
        target: params.target,
        selection: Some(params.selection),
        c_hat: None,
        reg: *reg,
        diagnostics,
    })
}

pub fn fit(kind: ModelKind, data: &Dataset, reg: &RegConfig, opts: &FitOptions) -> Result<FittedModel> {
    match kind {
        ModelKind::Naive => fit_naive(data, reg, opts),
        ModelKind::Elkan => fit_elkan(data, reg, opts),
        ModelKind::Spm => fit_spm(data, reg, opts),
        ModelKind::Psychm => fit_psychm(data, reg, opts),
        ModelKind::RealOracle => fit_real_oracle(data, reg, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn norm_rule_and_tie() {
        let small = Affine::new(vec![1.0, 0.0], 0.5);
        let large = Affine::new(vec![4.0, -3.0], 1.0);
        assert_eq!(assign_factors(small.clone(), large.clone()).0, small);
        assert_eq!(assign_factors(large.clone(), small.clone()).0, small);
        let twin = Affine::new(vec![0.0, 1.0], -0.5);
        assert_eq!(assign_factors(small.clone(), twin.clone()).0, small);
        assert_eq!(assign_factors(twin.clone(), small.clone()).0, twin);
        assert_eq!(assign_factors_by(FactorRule::LargerNorm, small.clone(), large.clone()).0, large);
        assert_eq!(assign_factors_by(FactorRule::LargerNorm, small.clone(), twin.clone()).0, small);
    }

    #[test]
    fn elkan_helpers() {
        assert_eq!(elkan_score(0.8, 0.8), 1.0);
        assert_eq!(elkan_score(0.9, 0.8), 1.0);
        assert_eq!(estimate_c(&[0.8; 7]).unwrap(), 0.8);
        assert_eq!(estimate_c(&[]), Err(Error::NoLabeledHoldout));
    }

    #[test]
    fn invalid_initial_rates() {
        let data = Dataset::new(vec![0.0, 1.0], 1, vec![true, false], None).unwrap();
        for (g, l) in [(0.0, 0.1), (0.7, 0.3), (1.0, 0.0), (0.5, -0.1)] {
            let opts = FitOptions {
                init_gamma: g,
                init_lambda: l,
                ..FitOptions::for_kind(ModelKind::Psychm, 1)
            };
            assert!(fit_psychm(&data, &RegConfig::none(), &opts).is_err());
        }
    }

    #[test]
    fn default_methods() {
        assert_eq!(
            FitOptions::for_kind(ModelKind::Psychm, 5).optimizer.method,
            Method::LimitedMemoryQuasiNewton
        );
        assert_eq!(
            FitOptions::for_kind(ModelKind::Psychm, 51).optimizer.method,
            Method::AdaptiveMoment
        );
        assert_eq!(
            FitOptions::for_kind(ModelKind::Spm, 5).optimizer.method,
            Method::LimitedMemoryQuasiNewton
        );
        assert_eq!(
            FitOptions::for_kind(ModelKind::Spm, 51).optimizer.method,
            Method::AdaptiveMomentNesterov
        );
    }

    #[test]
    fn naive_rejects_single_class() {
        let data = Dataset::new(vec![0.0, 1.0, 2.0], 1, vec![false; 3], None).unwrap();
        let opts = FitOptions::for_kind(ModelKind::Naive, 1);
        assert_eq!(fit_naive(&data, &RegConfig::none(), &opts), Err(Error::DegenerateClass));
        assert_eq!(
            fit_real_oracle(&data, &RegConfig::none(), &opts),
            Err(Error::MissingTruth)
        );
    }
}
