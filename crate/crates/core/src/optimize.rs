//! Deterministic first-order minimizers: Adam, Nesterov-accelerated Adam and
//! limited-memory BFGS with a strong-Wolfe line search.
//!
//! All methods keep the best iterate seen, so the reported loss never exceeds
//! the loss at the starting point.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{dot, norm2, sqrt};

const ADAM_EPSILON: f64 = 1e-8;
const ARMIJO_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;
const REFINE_C2: f64 = 1e-4;
const MAX_LINE_EVALS: usize = 40;
const LOSS_NOISE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    AdaptiveMoment,
    AdaptiveMomentNesterov,
    LimitedMemoryQuasiNewton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerConfig {
    pub method: Method,
    /// Learning rate for the adaptive-moment methods.
    pub step_size: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Number of curvature pairs kept by the quasi-Newton method.
    pub history_size: usize,
    pub moment_decays: (f64, f64),
}

/// Optimizer fields that replace a base configuration one by one, leaving
/// unset fields at their per-kind defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerOverrides {
    pub method: Option<Method>,
    pub step_size: Option<f64>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub history_size: Option<usize>,
    pub moment_decays: Option<(f64, f64)>,
}

impl OptimizerOverrides {
    pub fn apply(&self, base: OptimizerConfig) -> OptimizerConfig {
        OptimizerConfig {
            method: self.method.unwrap_or(base.method),
            step_size: self.step_size.unwrap_or(base.step_size),
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            grad_tol: self.grad_tol.unwrap_or(base.grad_tol),
            history_size: self.history_size.unwrap_or(base.history_size),
            moment_decays: self.moment_decays.unwrap_or(base.moment_decays),
        }
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveMoment,
            step_size: 1e-2,
            max_iters: 2000,
            grad_tol: 1e-6,
            history_size: 10,
            moment_decays: (0.9, 0.999),
        }
    }
}

impl OptimizerConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (b1, b2) = self.moment_decays;
        let ok = self.step_size > 0.0
            && self.step_size.is_finite()
            && self.max_iters >= 1
            && self.grad_tol > 0.0
            && self.history_size >= 1
            && b1 > 0.0
            && b1 < 1.0
            && b2 > 0.0
            && b2 < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!(
                "invalid optimizer config: {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimResult {
    pub final_params: Vec<f64>,
    pub final_loss: f64,
    pub final_grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `objective` given its `gradient` separately.
pub fn minimize<F, G>(objective: F, gradient: G, init: &[f64], cfg: &OptimizerConfig) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    minimize_fused(
        |x, g| {
            let grad = gradient(x);
            g.copy_from_slice(&grad);
            objective(x)
        },
        init,
        cfg,
    )
}

/// Minimizes a function that returns its value and writes its gradient in one pass.
pub fn minimize_fused<FG>(mut fg: FG, init: &[f64], cfg: &OptimizerConfig) -> Result<OptimResult>
where
    FG: FnMut(&[f64], &mut [f64]) -> f64,
{
    cfg.validate()?;
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            iteration: 0,
            params: init.to_vec(),
        });
    }
    match cfg.method {
        Method::AdaptiveMoment => adam(&mut fg, init, cfg, false),
        Method::AdaptiveMomentNesterov => adam(&mut fg, init, cfg, true),
        Method::LimitedMemoryQuasiNewton => lbfgs(&mut fg, init, cfg),
    }
}

struct Best {
    params: Vec<f64>,
    loss: f64,
    grad_norm: f64,
}

impl Best {
    fn offer(&mut self, x: &[f64], loss: f64, grad_norm: f64) {
        if loss < self.loss || (loss == self.loss && grad_norm < self.grad_norm) {
            self.params.copy_from_slice(x);
            self.loss = loss;
            self.grad_norm = grad_norm;
        }
    }

    fn finish(self, iterations: usize, tol: f64) -> OptimResult {
        OptimResult {
            converged: self.grad_norm <= tol,
            final_params: self.params,
            final_loss: self.loss,
            final_grad_norm: self.grad_norm,
            iterations,
        }
    }
}

fn evaluate<FG>(fg: &mut FG, x: &[f64], g: &mut [f64], iteration: usize) -> Result<f64>
where
    FG: FnMut(&[f64], &mut [f64]) -> f64,
{
    let f = fg(x, g);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            iteration,
            params: x.to_vec(),
        });
    }
    Ok(f)
}

fn adam<FG>(fg: &mut FG, init: &[f64], cfg: &OptimizerConfig, nesterov: bool) -> Result<OptimResult>
where
    FG: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = init.len();
    let (b1, b2) = cfg.moment_decays;
    let mut x = init.to_vec();
    let mut g = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let f0 = evaluate(fg, &x, &mut g, 0)?;
    let mut best = Best {
        params: x.clone(),
        loss: f0,
        grad_norm: norm2(&g),
    };
    let mut grad_norm = best.grad_norm;
    let mut iters = 0;
    let (mut b1t, mut b2t) = (1.0, 1.0);
    while grad_norm > cfg.grad_tol && iters < cfg.max_iters {
        iters += 1;
        b1t *= b1;
        b2t *= b2;
        for i in 0..n {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / (1.0 - b1t);
            let v_hat = v[i] / (1.0 - b2t);
            let direction = if nesterov {
                b1 * m_hat + (1.0 - b1) * g[i] / (1.0 - b1t)
            } else {
                m_hat
            };
            x[i] -= cfg.step_size * direction / (sqrt(v_hat) + ADAM_EPSILON);
        }
        let f = evaluate(fg, &x, &mut g, iters)?;
        grad_norm = norm2(&g);
        best.offer(&x, f, grad_norm);
    }
    Ok(best.finish(iters, cfg.grad_tol))
}

/// L-BFGS stops once the last [`LBFGS_STALL_WINDOW`] accepted steps together
/// lowered the loss by less than this fraction of its magnitude.
pub const LBFGS_REL_DECREASE: f64 = 1e-11;
pub const LBFGS_STALL_WINDOW: usize = 10;

fn lbfgs<FG>(fg: &mut FG, init: &[f64], cfg: &OptimizerConfig) -> Result<OptimResult>
where
    FG: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = init.len();
    let mut x = init.to_vec();
    let mut g = vec![0.0; n];
    let mut f = evaluate(fg, &x, &mut g, 0)?;
    let mut best = Best {
        params: x.clone(),
        loss: f,
        grad_norm: norm2(&g),
    };
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.history_size);
    let mut dir = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut x_try = vec![0.0; n];
    let mut g_try = vec![0.0; n];
    let mut alphas = vec![0.0; cfg.history_size];
    let mut iters = 0;
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(LBFGS_STALL_WINDOW + 1);
    recent.push_back(f);

    while norm2(&g) > cfg.grad_tol && iters < cfg.max_iters {
        two_loop(&g, &history, &mut dir, &mut alphas);
        let mut slope = dot(&g, &dir);
        if slope.is_nan() || slope >= 0.0 {
            history.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
            slope = -dot(&g, &g);
        }
        let step = if history.is_empty() {
            (1.0 / norm2(&g)).min(1.0)
        } else {
            1.0
        };

        let accepted = wolfe_search(fg, &x, f, slope, &dir, step, &mut x_new, &mut g_new);
        let Some(point) = accepted else {
            break;
        };
        let f_new = refine(fg, &x, f, slope, &dir, point, [&mut x_new, &mut x_try], [&mut g_new, &mut g_try]);
        iters += 1;

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm2(&s) * norm2(&y) && sy > 0.0 {
            if history.len() == cfg.history_size {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        recent.push_back(f_new);
        let stalled = recent.len() > LBFGS_STALL_WINDOW && {
            let old = recent.pop_front().unwrap();
            old - f_new <= LBFGS_REL_DECREASE * old.abs().max(f_new.abs())
        };
        f = f_new;
        best.offer(&x, f, norm2(&g));
        if stalled {
            break;
        }
    }
    Ok(best.finish(iters, cfg.grad_tol))
}

#[derive(Clone, Copy)]
struct LinePoint {
    step: f64,
    f: f64,
    slope: f64,
}

/// Strong-Wolfe line search along `dir` (bracketing, then zoom with
/// safeguarded cubic interpolation). On success returns the accepted point,
/// whose parameters and gradient are left in `x_new` and `g_new`. Non-finite trial points count as overshooting.
#[allow(clippy::too_many_arguments)]
fn wolfe_search<FG>(
    fg: &mut FG,
    x: &[f64],
    f0: f64,
    slope0: f64,
    dir: &[f64],
    first_step: f64,
    x_new: &mut [f64],
    g_new: &mut [f64],
) -> Option<LinePoint>
where
    FG: FnMut(&[f64], &mut [f64]) -> f64,
{
    let evals = core::cell::Cell::new(0);
    let mut probe = |step: f64, x_new: &mut [f64], g_new: &mut [f64]| {
        evals.set(evals.get() + 1);
        for ((xn, xi), di) in x_new.iter_mut().zip(x).zip(dir) {
            *xn = xi + step * di;
        }
        let f = fg(x_new, g_new);
        if f.is_finite() && g_new.iter().all(|v| v.is_finite()) {
            LinePoint {
                step,
                f,
                slope: dot(g_new, dir),
            }
        } else {
            LinePoint {
                step,
                f: f64::INFINITY,
                slope: f64::NAN,
            }
        }
    };
    // Near a minimum the decrease can drop below what f64 resolves in the
    // loss; allow for that rounding so the slope test can still decide.
    let noise = LOSS_NOISE * f0.abs();
    let sufficient = |p: &LinePoint| p.f <= f0 + ARMIJO_C1 * p.step * slope0 + noise;
    let flat = |p: &LinePoint| p.slope.abs() <= -WOLFE_C2 * slope0;

    let mut prev = LinePoint {
        step: 0.0,
        f: f0,
        slope: slope0,
    };
    let mut step = first_step;
    let (mut lo, mut hi) = loop {
        let cur = probe(step, x_new, g_new);
        if !sufficient(&cur) || (prev.step > 0.0 && cur.f >= prev.f) {
            break (prev, cur);
        }
        if flat(&cur) {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            break (cur, prev);
        }
        if evals.get() >= MAX_LINE_EVALS {
            return Some(cur);
        }
        prev = cur;
        step *= 2.0;
    };

    while evals.get() < MAX_LINE_EVALS {
        let width = hi.step - lo.step;
        if width.abs() <= f64::EPSILON * lo.step.abs().max(hi.step.abs()) {
            break;
        }
        let trial = interpolate(&lo, &hi).clamp(
            lo.step.min(hi.step) + 0.1 * width.abs(),
            lo.step.max(hi.step) - 0.1 * width.abs(),
        );
        let cur = probe(trial, x_new, g_new);
        if !sufficient(&cur) || cur.f >= lo.f {
            hi = cur;
        } else {
            if flat(&cur) {
                return Some(cur);
            }
            if cur.slope * (hi.step - lo.step) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    // Best point with sufficient decrease, if the search moved at all.
    (lo.step > 0.0).then(|| probe(lo.step, x_new, g_new))
}

/// One extra evaluation at the minimizer of the cubic through the start and
/// the accepted point, kept if it is lower. On a quadratic this makes every
/// search exact, and with it the conjugacy that ends the run in about
/// `dim` steps. Returns the loss of the point left in `x[0]`, `g[0]`.
#[allow(clippy::too_many_arguments)]
fn refine<FG>(
    fg: &mut FG,
    x0: &[f64],
    f0: f64,
    slope0: f64,
    dir: &[f64],
    point: LinePoint,
    x: [&mut Vec<f64>; 2],
    g: [&mut Vec<f64>; 2],
) -> f64
where
    FG: FnMut(&[f64], &mut [f64]) -> f64,
{
    if point.slope.abs() <= -REFINE_C2 * slope0 {
        return point.f;
    }
    let origin = LinePoint {
        step: 0.0,
        f: f0,
        slope: slope0,
    };
    let step = interpolate(&origin, &point).min(1e3 * point.step);
    if step.is_nan() || step <= 0.0 || (step - point.step).abs() <= 1e-9 * point.step {
        return point.f;
    }
    let [x_new, x_try] = x;
    let [g_new, g_try] = g;
    for ((xt, xi), di) in x_try.iter_mut().zip(x0).zip(dir) {
        *xt = xi + step * di;
    }
    let f = fg(x_try, g_try);
    if f < point.f && g_try.iter().all(|v| v.is_finite()) {
        core::mem::swap(x_new, x_try);
        core::mem::swap(g_new, g_try);
        f
    } else {
        point.f
    }
}

/// Minimizer of the cubic (or, lacking slopes, the quadratic) through the
/// two bracket ends; the midpoint when neither model is usable.
fn interpolate(lo: &LinePoint, hi: &LinePoint) -> f64 {
    let mid = 0.5 * (lo.step + hi.step);
    let delta = hi.step - lo.step;
    if !hi.f.is_finite() {
        return mid;
    }
    if hi.slope.is_finite() {
        let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (lo.step - hi.step);
        let disc = d1 * d1 - lo.slope * hi.slope;
        if disc >= 0.0 {
            let d2 = delta.signum() * sqrt(disc);
            let denom = hi.slope - lo.slope + 2.0 * d2;
            if denom != 0.0 {
                let step = hi.step - delta * (hi.slope + d2 - d1) / denom;
                if step.is_finite() {
                    return step;
                }
            }
        }
    }
    let curv = hi.f - lo.f - lo.slope * delta;
    if curv > 0.0 {
        lo.step - lo.slope * delta * delta / (2.0 * curv)
    } else {
        mid
    }
}

/// Two-loop recursion: writes `-H g` into `dir`.
fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, dir: &mut [f64], alphas: &mut [f64]) {
    dir.copy_from_slice(g);
    for (k, (s, y, rho)) in history.iter().enumerate().rev() {
        let a = rho * dot(s, dir);
        alphas[k] = a;
        dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
    }
    if let Some((s, y, _)) = history.back() {
        let scale = dot(s, y) / dot(y, y);
        dir.iter_mut().for_each(|d| *d *= scale);
    }
    for (k, (s, y, rho)) in history.iter().enumerate() {
        let b = rho * dot(y, dir);
        let a = alphas[k];
        dir.iter_mut().zip(s).for_each(|(d, si)| *d += (a - b) * si);
    }
    dir.iter_mut().for_each(|d| *d = -*d);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64], g: &mut [f64]) -> f64 {
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = 2.0 * xi;
        }
        dot(x, x)
    }

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a)
    }

    #[test]
    fn sphere_converges_for_every_method() {
        for method in [
            Method::AdaptiveMoment,
            Method::AdaptiveMomentNesterov,
            Method::LimitedMemoryQuasiNewton,
        ] {
            let cfg = OptimizerConfig {
                method,
                step_size: 0.1,
                max_iters: 20_000,
                ..OptimizerConfig::default()
            };
            let r = minimize_fused(sphere, &[3.0, 4.0], &cfg).unwrap();
            assert!(r.converged, "{method:?}: {r:?}");
            assert!(r.final_grad_norm <= 1e-6);
            assert!(norm2(&r.final_params) < 1e-6);
        }
    }

    #[test]
    fn rosenbrock_quasi_newton() {
        let cfg = OptimizerConfig {
            max_iters: 500,
            ..OptimizerConfig::with_method(Method::LimitedMemoryQuasiNewton)
        };
        let r = minimize_fused(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert!(r.final_loss < 1e-6, "{r:?}");
        assert!((r.final_params[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn stationary_start_is_kept() {
        for method in [Method::AdaptiveMoment, Method::LimitedMemoryQuasiNewton] {
            let r = minimize_fused(sphere, &[0.0, 0.0, 0.0], &OptimizerConfig::with_method(method)).unwrap();
            assert!(r.converged);
            assert_eq!(r.iterations, 0);
            assert_eq!(r.final_params, vec![0.0; 3]);
        }
    }

    #[test]
    fn separate_objective_and_gradient() {
        let r = minimize(
            |x| (x[0] - 2.0).powi(2),
            |x| vec![2.0 * (x[0] - 2.0)],
            &[0.0],
            &OptimizerConfig::with_method(Method::LimitedMemoryQuasiNewton),
        )
        .unwrap();
        assert!((r.final_params[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let err = minimize_fused(
            |x: &[f64], g: &mut [f64]| {
                g[0] = 1.0;
                if x[0] < 0.5 {
                    f64::NAN
                } else {
                    x[0]
                }
            },
            &[0.0],
            &OptimizerConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { iteration: 0, .. }));

        let err = minimize_fused(
            |x: &[f64], g: &mut [f64]| {
                g[0] = 1.0;
                if x[0] < 0.995 {
                    f64::INFINITY
                } else {
                    x[0]
                }
            },
            &[1.0],
            &OptimizerConfig::default(),
        )
        .unwrap_err();
        match err {
            Error::NonFinite { iteration, params } => {
                assert_eq!(iteration, 1);
                assert!(params[0] < 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = OptimizerConfig {
            grad_tol: 0.0,
            ..OptimizerConfig::default()
        };
        assert!(minimize_fused(sphere, &[1.0], &cfg).is_err());
    }
}
