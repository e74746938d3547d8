//! Conditional log-likelihood of the annotation flags, the two-penalty loss
//! and its analytic gradient.
//!
//! Free-parameter layout, with `d` the feature dimension:
//!
//! | family | layout                                        | length   |
//! |--------|-----------------------------------------------|----------|
//! | SPM    | `[alpha(d), beta, a(d), b]`                   | `2d + 2` |
//! | PsychM | `[alpha(d), beta, gamma', lambda', a(d), b]`  | `2d + 4` |
//!
//! `gamma'` and `lambda'` are unconstrained surrogates mapped through
//! [`reparam_gamma_lambda`], so every point of the free space is a valid model.
//! The data term is summed over examples, not averaged.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::{ln, sign};
use crate::model::{Affine, Psychometric, PsychmParams, SpmParams};

/// Lower/upper clamp applied to every logarithm argument.
pub const LOG_CLAMP: f64 = 1e-12;

#[inline]
fn clamped_ln(p: f64) -> (f64, bool) {
    let inside = p > LOG_CLAMP && p < 1.0 - LOG_CLAMP;
    (ln(p.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP)), inside)
}

/// `(sigmoid(z), sigmoid(-z))` from a single exponential.
#[inline]
fn sigmoid_pair(z: f64) -> (f64, f64) {
    if z >= 0.0 {
        let e = crate::math::exp(-z);
        let p = 1.0 / (1.0 + e);
        (p, e / (1.0 + e))
    } else {
        let e = crate::math::exp(z);
        (e / (1.0 + e), 1.0 / (1.0 + e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Norm {
    L1,
    #[default]
    L2Squared,
}

impl Norm {
    pub fn value(self, w: &[f64]) -> f64 {
        match self {
            Norm::L1 => w.iter().map(|v| v.abs()).sum(),
            Norm::L2Squared => w.iter().map(|v| v * v).sum(),
        }
    }

    fn add_gradient(self, coef: f64, w: &[f64], out: &mut [f64]) {
        if coef == 0.0 {
            return;
        }
        for (g, &v) in out.iter_mut().zip(w) {
            *g += match self {
                Norm::L1 => coef * sign(v),
                Norm::L2Squared => 2.0 * coef * v,
            };
        }
    }
}

/// Separate penalties on the selection weights (`c_alpha`) and the target weights (`c_a`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegConfig {
    pub c_alpha: f64,
    pub c_a: f64,
    pub norm_alpha: Norm,
    pub norm_a: Norm,
}

impl Default for RegConfig {
    fn default() -> Self {
        Self::none()
    }
}

impl RegConfig {
    pub fn none() -> Self {
        Self::l2(0.0, 0.0)
    }

    pub fn l2(c_alpha: f64, c_a: f64) -> Self {
        Self {
            c_alpha,
            c_a,
            norm_alpha: Norm::L2Squared,
            norm_a: Norm::L2Squared,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_alpha >= 0.0 && self.c_a >= 0.0) || !self.c_alpha.is_finite() || !self.c_a.is_finite()
        {
            return Err(Error::InvalidParameter(alloc::format!(
                "penalty coefficients must be finite and non-negative: {} / {}",
                self.c_alpha,
                self.c_a
            )));
        }
        Ok(())
    }
}

/// `gamma = |g|/(1+|g|+|l|)`, `lambda = |l|/(1+|g|+|l|)`.
pub fn reparam_gamma_lambda(gamma_raw: f64, lambda_raw: f64) -> (f64, f64) {
    let (g, l) = (gamma_raw.abs(), lambda_raw.abs());
    let denom = 1.0 + g + l;
    (g / denom, l / denom)
}

/// Non-negative surrogates that [`reparam_gamma_lambda`] maps back to `(gamma, lambda)`.
pub fn inverse_reparam(gamma: f64, lambda: f64) -> Result<(f64, f64)> {
    crate::model::validate_rates(gamma, lambda)?;
    let rest = 1.0 - gamma - lambda;
    if rest <= 0.0 {
        return Err(Error::InvalidParameter(
            "gamma + lambda must be strictly below 1".into(),
        ));
    }
    Ok((gamma / rest, lambda / rest))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Family {
    Spm,
    Psychm,
}

/// Index map of a free-parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub dim: usize,
    pub family: Family,
}

impl Layout {
    pub fn new(dim: usize, family: Family) -> Self {
        Self { dim, family }
    }

    pub fn len(&self) -> usize {
        match self.family {
            Family::Spm => 2 * self.dim + 2,
            Family::Psychm => 2 * self.dim + 4,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn beta(&self) -> usize {
        self.dim
    }

    /// Indices of `(gamma', lambda')`, PsychM only.
    pub fn rates(&self) -> Option<(usize, usize)> {
        match self.family {
            Family::Spm => None,
            Family::Psychm => Some((self.dim + 1, self.dim + 2)),
        }
    }

    /// Start of the target weights `a`.
    pub fn target(&self) -> usize {
        match self.family {
            Family::Spm => self.dim + 1,
            Family::Psychm => self.dim + 3,
        }
    }

    pub fn bias(&self) -> usize {
        self.len() - 1
    }

    pub fn selection_weights<'a>(&self, v: &'a [f64]) -> &'a [f64] {
        &v[..self.dim]
    }

    pub fn target_weights<'a>(&self, v: &'a [f64]) -> &'a [f64] {
        &v[self.target()..self.target() + self.dim]
    }

    /// `(gamma, lambda)` after the reparameterization; zeros for SPM.
    pub fn rates_of(&self, v: &[f64]) -> (f64, f64) {
        match self.rates() {
            None => (0.0, 0.0),
            Some((g, l)) => reparam_gamma_lambda(v[g], v[l]),
        }
    }

    pub fn selection_affine(&self, v: &[f64]) -> Affine {
        Affine::new(v[..self.dim].to_vec(), v[self.beta()])
    }

    pub fn target_affine(&self, v: &[f64]) -> Affine {
        Affine::new(self.target_weights(v).to_vec(), v[self.bias()])
    }

    pub fn decode_spm(&self, v: &[f64]) -> SpmParams {
        SpmParams {
            selection: self.selection_affine(v),
            target: self.target_affine(v),
        }
    }

    pub fn decode_psychm(&self, v: &[f64]) -> PsychmParams {
        let (gamma, lambda) = self.rates_of(v);
        PsychmParams {
            selection: Psychometric {
                base: self.selection_affine(v),
                gamma,
                lambda,
            },
            target: self.target_affine(v),
        }
    }

    pub fn encode_spm(&self, p: &SpmParams) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&p.selection.weights);
        v.push(p.selection.bias);
        if self.family == Family::Psychm {
            v.extend_from_slice(&[0.0, 0.0]);
        }
        v.extend_from_slice(&p.target.weights);
        v.push(p.target.bias);
        v
    }

    /// Encodes PsychM parameters, inverting the rate reparameterization.
    pub fn encode_psychm(&self, p: &PsychmParams) -> Result<Vec<f64>> {
        let (g, l) = inverse_reparam(p.selection.gamma, p.selection.lambda)?;
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&p.selection.base.weights);
        v.push(p.selection.base.bias);
        v.extend_from_slice(&[g, l]);
        v.extend_from_slice(&p.target.weights);
        v.push(p.target.bias);
        Ok(v)
    }
}

/// A free-parameter vector tagged with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeParams {
    pub layout: Layout,
    pub values: Vec<f64>,
}

impl FreeParams {
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                expected: layout.len(),
                found: values.len(),
            });
        }
        Ok(Self { layout, values })
    }

    pub fn zeros(layout: Layout) -> Self {
        Self {
            layout,
            values: vec![0.0; layout.len()],
        }
    }
}

/// Penalized negative log-likelihood of the annotation flags under an SPM or PsychM.
#[derive(Debug, Clone, Copy)]
pub struct AnnotationObjective<'a> {
    data: &'a Dataset,
    layout: Layout,
    reg: RegConfig,
}

impl<'a> AnnotationObjective<'a> {
    pub fn new(data: &'a Dataset, family: Family, reg: RegConfig) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        reg.validate()?;
        Ok(Self {
            data,
            layout: Layout::new(data.dim(), family),
            reg,
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.layout.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layout.len(),
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn log_likelihood(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        Ok(self.accumulate(v, None))
    }

    pub fn penalty(&self, v: &[f64]) -> f64 {
        self.reg.c_alpha * self.reg.norm_alpha.value(self.layout.selection_weights(v))
            + self.reg.c_a * self.reg.norm_a.value(self.layout.target_weights(v))
    }

    pub fn loss(&self, v: &[f64]) -> Result<f64> {
        Ok(-self.log_likelihood(v)? + self.penalty(v))
    }

    pub fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.layout.len()];
        self.loss_and_gradient(v, &mut g)?;
        Ok(g)
    }

    /// Loss value, with its gradient written into `grad`.
    pub fn loss_and_gradient(&self, v: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.check(v)?;
        if grad.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: v.len(),
                found: grad.len(),
            });
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        let ll = self.accumulate(v, Some(grad));
        let lay = self.layout;
        self.reg.norm_alpha.add_gradient(
            self.reg.c_alpha,
            lay.selection_weights(v),
            &mut grad[..lay.dim],
        );
        let t = lay.target();
        self.reg
            .norm_a
            .add_gradient(self.reg.c_a, lay.target_weights(v), &mut grad[t..t + lay.dim]);
        Ok(-ll + self.penalty(v))
    }

    /// Summed log-likelihood; when `grad` is given, adds the gradient of the
    /// negative log-likelihood to it.
    fn accumulate(&self, v: &[f64], grad: Option<&mut [f64]>) -> f64 {
        match grad {
            Some(g) => self.accumulate_rows::<true>(v, g),
            None => self.accumulate_rows::<false>(v, &mut []),
        }
    }

    fn accumulate_rows<const GRAD: bool>(&self, v: &[f64], g: &mut [f64]) -> f64 {
        let lay = self.layout;
        let d = lay.dim;
        let alpha = &v[..d];
        let beta = v[lay.beta()];
        let a = lay.target_weights(v);
        let b = v[lay.bias()];
        let (gamma, lambda) = lay.rates_of(v);
        let spread = 1.0 - gamma - lambda;
        let (beta_i, target_i, bias_i) = (lay.beta(), lay.target(), lay.bias());

        let mut ll = 0.0;
        // d(LL)/d(gamma), d(LL)/d(lambda) before the reparameterization chain.
        let mut d_gamma = 0.0;
        let mut d_lambda = 0.0;
        for (x, &li) in self.data.rows().zip(self.data.labels()) {
            let u = crate::math::dot(alpha, x) + beta;
            let w = crate::math::dot(a, x) + b;
            let (su, su_c) = sigmoid_pair(u);
            let (t, t_c) = sigmoid_pair(w);
            let s = gamma + spread * su;

            let (du, dw, dg, dl);
            if li {
                let (ls, s_in) = clamped_ln(s);
                let (lt, t_in) = clamped_ln(t);
                ll += ls + lt;
                if !GRAD {
                    continue;
                }
                let inv_s = if s_in { 1.0 / s } else { 0.0 };
                du = inv_s * spread * su * su_c;
                dw = if t_in { t_c } else { 0.0 };
                dg = inv_s * su_c;
                dl = -inv_s * su;
            } else {
                let h = s * t;
                let (lq, q_in) = clamped_ln(1.0 - h);
                ll += lq;
                if !GRAD {
                    continue;
                }
                let dh = if q_in { -1.0 / (1.0 - h) } else { 0.0 };
                let dh_t = dh * t;
                du = dh_t * spread * su * su_c;
                dw = dh_t * s * t_c;
                dg = dh_t * su_c;
                dl = -dh_t * su;
            }
            // Gradient of the *negative* log-likelihood.
            let (g_alpha, rest) = g.split_at_mut(beta_i);
            for (gk, xk) in g_alpha.iter_mut().zip(x) {
                *gk -= du * xk;
            }
            rest[0] -= du;
            for (gk, xk) in g[target_i..target_i + d].iter_mut().zip(x) {
                *gk -= dw * xk;
            }
            g[bias_i] -= dw;
            d_gamma += dg;
            d_lambda += dl;
        }

        if let (true, Some((gi, li))) = (GRAD, lay.rates()) {
            let (gr, lr) = (v[gi], v[li]);
            let (ga, la) = (gr.abs(), lr.abs());
            let denom = 1.0 + ga + la;
            let denom2 = denom * denom;
            // Jacobian of (gamma, lambda) w.r.t. (gamma', lambda'), sign(0) = 0.
            let dgamma_dg = sign(gr) * (1.0 + la) / denom2;
            let dlambda_dg = -sign(gr) * la / denom2;
            let dgamma_dl = -sign(lr) * ga / denom2;
            let dlambda_dl = sign(lr) * (1.0 + ga) / denom2;
            g[gi] -= d_gamma * dgamma_dg + d_lambda * dlambda_dg;
            g[li] -= d_gamma * dgamma_dl + d_lambda * dlambda_dl;
        }
        ll
    }
}

/// Conditional log-likelihood of the annotation flags.
pub fn conditional_log_likelihood(data: &Dataset, free: &FreeParams) -> Result<f64> {
    check_layout(data, free)?;
    AnnotationObjective::new(data, free.layout.family, RegConfig::none())?.log_likelihood(&free.values)
}

/// Negative log-likelihood plus the two weight penalties.
pub fn loss(data: &Dataset, free: &FreeParams, reg: &RegConfig) -> Result<f64> {
    check_layout(data, free)?;
    AnnotationObjective::new(data, free.layout.family, *reg)?.loss(&free.values)
}

pub fn loss_gradient(data: &Dataset, free: &FreeParams, reg: &RegConfig) -> Result<Vec<f64>> {
    check_layout(data, free)?;
    AnnotationObjective::new(data, free.layout.family, *reg)?.gradient(&free.values)
}

fn check_layout(data: &Dataset, free: &FreeParams) -> Result<()> {
    if data.dim() != free.layout.dim {
        return Err(Error::DimensionMismatch {
            expected: free.layout.dim,
            found: data.dim(),
        });
    }
    if free.values.len() != free.layout.len() {
        return Err(Error::DimensionMismatch {
            expected: free.layout.len(),
            found: free.values.len(),
        });
    }
    Ok(())
}

/// Penalized binary cross-entropy of a single sigmoid `[a(d), b]` against
/// `targets`; the baseline classifiers minimize this.
#[derive(Debug, Clone, Copy)]
pub struct LogisticObjective<'a> {
    data: &'a Dataset,
    targets: &'a [bool],
    c_a: f64,
    norm: Norm,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(data: &'a Dataset, targets: &'a [bool], c_a: f64, norm: Norm) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if targets.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: targets.len(),
                right: data.len(),
            });
        }
        RegConfig {
            c_alpha: 0.0,
            c_a,
            norm_alpha: Norm::L2Squared,
            norm_a: norm,
        }
        .validate()?;
        Ok(Self {
            data,
            targets,
            c_a,
            norm,
        })
    }

    pub fn len(&self) -> usize {
        self.data.dim() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Summed log-likelihood of the targets.
    pub fn log_likelihood(&self, v: &[f64]) -> f64 {
        self.accumulate(v, None)
    }

    pub fn loss(&self, v: &[f64]) -> f64 {
        let d = self.data.dim();
        -self.log_likelihood(v) + self.c_a * self.norm.value(&v[..d])
    }

    pub fn loss_and_gradient(&self, v: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.data.dim();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let ll = self.accumulate(v, Some(grad));
        self.norm.add_gradient(self.c_a, &v[..d], &mut grad[..d]);
        -ll + self.c_a * self.norm.value(&v[..d])
    }

    fn accumulate(&self, v: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let d = self.data.dim();
        let (w, b) = (&v[..d], v[d]);
        let mut ll = 0.0;
        for (x, &yi) in self.data.rows().zip(self.targets) {
            let z = crate::math::dot(w, x) + b;
            let (t, t_c) = sigmoid_pair(z);
            let dz = if yi {
                let (lt, inside) = clamped_ln(t);
                ll += lt;
                if inside {
                    t_c
                } else {
                    0.0
                }
            } else {
                let (lq, inside) = clamped_ln(1.0 - t);
                ll += lq;
                if inside {
                    -t
                } else {
                    0.0
                }
            };
            if let Some(g) = grad.as_deref_mut() {
                for k in 0..d {
                    g[k] -= dz * x[k];
                }
                g[d] -= dz;
            }
        }
        ll
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sigmoid;

    fn one_row(x: &[f64], l: bool) -> Dataset {
        Dataset::new(x.to_vec(), x.len(), vec![l], None).unwrap()
    }

    #[test]
    fn reparam_examples() {
        assert_eq!(reparam_gamma_lambda(0.0, 0.0), (0.0, 0.0));
        assert_eq!(reparam_gamma_lambda(1.0, 1.0), (1.0 / 3.0, 1.0 / 3.0));
        assert_eq!(reparam_gamma_lambda(-2.0, 0.0), (2.0 / 3.0, 0.0));
        let (g, l) = reparam_gamma_lambda(1e300, 1e300);
        assert!(g + l <= 1.0);
    }

    #[test]
    fn inverse_round_trip() {
        let (g, l) = inverse_reparam(0.5, 0.25).unwrap();
        let (gamma, lambda) = reparam_gamma_lambda(g, l);
        assert!((gamma - 0.5).abs() < 1e-12 && (lambda - 0.25).abs() < 1e-12);
        assert!(inverse_reparam(0.6, 0.4).is_err());
        assert!(inverse_reparam(-0.1, 0.0).is_err());
    }

    #[test]
    fn layout_round_trip() {
        let lay = Layout::new(2, Family::Psychm);
        let v = [0.1, 0.2, 0.3, 1.0, 1.0, 0.4, 0.5, 0.6];
        assert_eq!(lay.len(), 8);
        let p = lay.decode_psychm(&v);
        assert_eq!(p.selection.gamma, 1.0 / 3.0);
        assert_eq!(p.target.weights, vec![0.4, 0.5]);
        let back = lay.encode_psychm(&p).unwrap();
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
        let spm = Layout::new(3, Family::Spm);
        assert_eq!(spm.len(), 8);
        assert_eq!(spm.target(), 4);
        assert_eq!(spm.bias(), 7);
    }

    #[test]
    fn perfect_labeled_fit_has_near_zero_ll() {
        let data = one_row(&[0.0], true);
        let lay = Layout::new(1, Family::Spm);
        let free = FreeParams::new(lay, vec![0.0, 40.0, 0.0, 40.0]).unwrap();
        let ll = conditional_log_likelihood(&data, &free).unwrap();
        assert!(ll <= 0.0 && ll > -1e-11, "{ll}");
    }

    #[test]
    fn unlabeled_quarter_posterior() {
        let data = one_row(&[0.0], false);
        let lay = Layout::new(1, Family::Spm);
        let free = FreeParams::new(lay, vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        let ll = conditional_log_likelihood(&data, &free).unwrap();
        assert!((ll - libm::log(0.75)).abs() < 1e-15);
        assert!((ll + 0.287_682_072_451_780_9).abs() < 1e-15);
    }

    #[test]
    fn penalty_arithmetic() {
        let data = Dataset::new(vec![0.5, -0.5], 2, vec![true], None).unwrap();
        let lay = Layout::new(2, Family::Spm);
        let free = FreeParams::new(lay, vec![3.0, 4.0, 0.2, 1.0, 0.0, -0.1]).unwrap();
        let reg = RegConfig::l2(1.0, 2.0);
        let base = -conditional_log_likelihood(&data, &free).unwrap();
        assert_eq!(loss(&data, &free, &RegConfig::none()).unwrap(), base);
        let with = loss(&data, &free, &reg).unwrap();
        assert!((with - base - 27.0).abs() < 1e-12);

        let zero_w = FreeParams::new(lay, vec![0.0, 0.0, 0.2, 0.0, 0.0, -0.1]).unwrap();
        assert_eq!(
            loss(&data, &zero_w, &RegConfig::l2(5.0, 7.0)).unwrap(),
            loss(&data, &zero_w, &RegConfig::none()).unwrap()
        );
    }

    #[test]
    fn gradient_doubles_with_duplicated_data() {
        let data = Dataset::new(
            vec![0.3, -1.0, 1.2, 0.4, -0.7, 0.9],
            2,
            vec![true, false, false],
            None,
        )
        .unwrap();
        let twice = data.repeated(2);
        let lay = Layout::new(2, Family::Psychm);
        let free = FreeParams::new(lay, vec![0.4, -0.3, 0.1, 0.5, 0.2, 0.7, 0.1, -0.2]).unwrap();
        let g1 = loss_gradient(&data, &free, &RegConfig::none()).unwrap();
        let g2 = loss_gradient(&twice, &free, &RegConfig::none()).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        let reg = RegConfig::l2(0.5, 0.25);
        let p1 = loss_gradient(&data, &free, &reg).unwrap();
        let p2 = loss_gradient(&twice, &free, &reg).unwrap();
        for i in 0..lay.len() {
            let pen1 = p1[i] - g1[i];
            let pen2 = p2[i] - g2[i];
            assert!((pen1 - pen2).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_surrogates_have_zero_rate_gradient() {
        let data = Dataset::new(vec![0.3, -1.0, 1.2], 1, vec![true, false, false], None).unwrap();
        let lay = Layout::new(1, Family::Psychm);
        let free = FreeParams::new(lay, vec![0.4, -0.3, 0.0, 0.0, 0.7, 0.1]).unwrap();
        let g = loss_gradient(&data, &free, &RegConfig::none()).unwrap();
        assert_eq!((g[2], g[3]), (0.0, 0.0));
    }

    #[test]
    fn l1_subgradient_is_zero_at_zero() {
        let data = Dataset::new(vec![0.0, 0.0], 2, vec![false], None).unwrap();
        let lay = Layout::new(2, Family::Spm);
        let free = FreeParams::zeros(lay);
        let reg = RegConfig {
            c_alpha: 3.0,
            c_a: 3.0,
            norm_alpha: Norm::L1,
            norm_a: Norm::L1,
        };
        let g = loss_gradient(&data, &free, &reg).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g[3], 0.0);
    }

    #[test]
    fn errors() {
        let data = one_row(&[0.0, 1.0], true);
        let wrong = FreeParams::zeros(Layout::new(3, Family::Spm));
        assert!(conditional_log_likelihood(&data, &wrong).is_err());
        assert!(FreeParams::new(Layout::new(2, Family::Spm), vec![0.0; 3]).is_err());
        let bad = RegConfig::l2(-1.0, 0.0);
        assert!(loss(&data, &FreeParams::zeros(Layout::new(2, Family::Spm)), &bad).is_err());
    }

    #[test]
    fn logistic_matches_saturated_spm_selection() {
        let data = Dataset::new(
            vec![0.3, -1.0, 1.2, 0.4, -0.7, 0.9],
            2,
            vec![true, false, true],
            None,
        )
        .unwrap();
        let target = [0.8, -0.4, 0.3];
        let logi = LogisticObjective::new(&data, data.labels(), 0.0, Norm::L2Squared).unwrap();
        let lay = Layout::new(2, Family::Spm);
        let v = [0.0, 0.0, 40.0, 0.8, -0.4, 0.3];
        assert_eq!(sigmoid(40.0), 1.0);
        let spm = AnnotationObjective::new(&data, Family::Spm, RegConfig::none())
            .unwrap()
            .log_likelihood(&v)
            .unwrap();
        assert_eq!(lay.len(), v.len());
        assert!((spm - logi.log_likelihood(&target)).abs() < 1e-9);
    }
}
