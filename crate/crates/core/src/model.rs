//! Parametric posteriors: the logistic sigmoid, the psychometric function
//! built on it, and the two annotation models that multiply a selection
//! function `s(x)` with a target classifier `t(x)`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{dot, exp};

/// Logistic function. Only non-positive arguments are exponentiated, so the
/// result never overflows for any finite input.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// `sigmoid(w·x + c)`.
pub fn affine_sigmoid(x: &[f64], w: &[f64], c: f64) -> Result<f64> {
    check_dim(w.len(), x.len())?;
    Ok(sigmoid(dot(w, x) + c))
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// A weight vector and bias feeding a sigmoid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Affine {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Affine {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        Self { weights, bias }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(alloc::vec![0.0; dim], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `w·x + c` without a dimension check.
    #[inline]
    pub fn logit(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        affine_sigmoid(x, &self.weights, self.bias)
    }

    /// Euclidean norm of the weights and bias taken together.
    pub fn full_norm(&self) -> f64 {
        crate::math::sqrt(dot(&self.weights, &self.weights) + self.bias * self.bias)
    }

    fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

/// Guessing and lapse rates must satisfy `0 <= gamma`, `0 <= lambda < 1`,
/// `gamma + lambda <= 1`.
pub fn validate_rates(gamma: f64, lambda: f64) -> Result<()> {
    if !(gamma.is_finite() && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite rates gamma={gamma}, lambda={lambda}"
        )));
    }
    if !(0.0..=1.0).contains(&gamma) || !(0.0..1.0).contains(&lambda) || gamma + lambda > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "rates out of range: gamma={gamma}, lambda={lambda}"
        )));
    }
    Ok(())
}

/// `gamma + (1 - gamma - lambda) * sigmoid(alpha·x + beta)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Psychometric {
    pub base: Affine,
    pub gamma: f64,
    pub lambda: f64,
}

impl Psychometric {
    pub fn new(base: Affine, gamma: f64, lambda: f64) -> Result<Self> {
        validate_rates(gamma, lambda)?;
        Ok(Self {
            base,
            gamma,
            lambda,
        })
    }

    /// A psychometric function with no guessing and no lapses, i.e. a plain sigmoid.
    pub fn plain(base: Affine) -> Self {
        Self {
            base,
            gamma: 0.0,
            lambda: 0.0,
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.gamma + (1.0 - self.gamma - self.lambda) * sigmoid(self.base.logit(x))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        validate_rates(self.gamma, self.lambda)?;
        check_dim(self.base.dim(), x.len())?;
        Ok(self.eval_unchecked(x))
    }
}

/// Free-function form of [`Psychometric::eval`].
pub fn psychometric(x: &[f64], alpha: &[f64], beta: f64, gamma: f64, lambda: f64) -> Result<f64> {
    validate_rates(gamma, lambda)?;
    let s = affine_sigmoid(x, alpha, beta)?;
    Ok(gamma + (1.0 - gamma - lambda) * s)
}

/// Sigmoidal product model: `sigmoid(alpha·x + beta) * sigmoid(a·x + b)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpmParams {
    pub selection: Affine,
    pub target: Affine,
}

impl SpmParams {
    pub fn new(selection: Affine, target: Affine) -> Result<Self> {
        check_dim(selection.dim(), target.dim())?;
        if selection.dim() == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(selection.is_finite() && target.is_finite()) {
            return Err(Error::InvalidParameter("non-finite SPM parameter".into()));
        }
        Ok(Self { selection, target })
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// The same model with the two factors exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            selection: self.target.clone(),
            target: self.selection.clone(),
        }
    }

    pub fn posterior(&self, x: &[f64]) -> Result<f64> {
        spm_posterior(x, self)
    }
}

pub fn spm_posterior(x: &[f64], p: &SpmParams) -> Result<f64> {
    Ok(p.selection.eval(x)? * p.target.eval(x)?)
}

/// Psychometric model: `Psi(x; alpha, beta, gamma, lambda) * sigmoid(a·x + b)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsychmParams {
    pub selection: Psychometric,
    pub target: Affine,
}

impl PsychmParams {
    pub fn new(selection: Psychometric, target: Affine) -> Result<Self> {
        validate_rates(selection.gamma, selection.lambda)?;
        check_dim(selection.base.dim(), target.dim())?;
        if target.dim() == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(selection.base.is_finite() && target.is_finite()) {
            return Err(Error::InvalidParameter("non-finite PsychM parameter".into()));
        }
        Ok(Self { selection, target })
    }

    pub fn from_spm(spm: &SpmParams) -> Self {
        Self {
            selection: Psychometric::plain(spm.selection.clone()),
            target: spm.target.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    pub fn posterior(&self, x: &[f64]) -> Result<f64> {
        psychm_posterior(x, self)
    }
}

pub fn psychm_posterior(x: &[f64], p: &PsychmParams) -> Result<f64> {
    Ok(p.selection.eval(x)? * p.target.eval(x)?)
}

/// The five classifiers compared by the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ModelKind {
    Naive,
    Elkan,
    Spm,
    Psychm,
    #[cfg_attr(feature = "serde", serde(rename = "real"))]
    RealOracle,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Spm,
        ModelKind::Psychm,
        ModelKind::Naive,
        ModelKind::Elkan,
        ModelKind::RealOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Naive => "naive",
            ModelKind::Elkan => "elkan",
            ModelKind::Spm => "spm",
            ModelKind::Psychm => "psychm",
            ModelKind::RealOracle => "real",
        }
    }

    /// Whether the kind fits a separate selection function with its own penalty.
    pub fn has_selection(self) -> bool {
        matches!(self, ModelKind::Spm | ModelKind::Psychm)
    }

    /// Whether fitting needs ground-truth classes.
    pub fn needs_truth(self) -> bool {
        matches!(self, ModelKind::RealOracle)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "naive" => Ok(ModelKind::Naive),
            "elkan" => Ok(ModelKind::Elkan),
            "spm" => Ok(ModelKind::Spm),
            "psychm" => Ok(ModelKind::Psychm),
            "real" | "realoracle" | "real_oracle" | "oracle" => Ok(ModelKind::RealOracle),
            other => Err(Error::InvalidParameter(format!("unknown model kind `{other}`"))),
        }
    }
}
