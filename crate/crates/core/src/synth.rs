//! Synthetic `(X, y, l)` triplets with a psychometric annotation process.
//!
//! Each dataset draws from four ChaCha streams of the master seed: parameters,
//! features, classes and annotation flags. Every row consumes exactly one
//! value from the class and flag streams, so changing one stage never shifts
//! the random numbers seen by another.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{validate_rates, Affine, Psychometric, PsychmParams};

pub const STREAM_PARAMS: u64 = 0;
pub const STREAM_FEATURES: u64 = 1;
pub const STREAM_CLASSES: u64 = 2;
pub const STREAM_FLAGS: u64 = 3;

/// Seeded ChaCha8 generator positioned on `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FeatureDistribution {
    /// i.i.d. `N(0, 1)` coordinates.
    #[default]
    StandardNormal,
    /// i.i.d. uniform coordinates on `[-1, 1]`.
    UniformCube,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeneratorConfig {
    pub n: usize,
    pub d: usize,
    /// Standard deviation of the Gaussian part of both weight vectors.
    pub rho1: f64,
    /// Standard deviation of both biases.
    pub rho2: f64,
    /// Scale of the Rademacher offset added to both weight vectors.
    pub k: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub x_dist: FeatureDistribution,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            d: 5,
            rho1: 10.0,
            rho2: 1.0,
            k: 5.0,
            gamma: 0.05,
            lambda: 0.05,
            x_dist: FeatureDistribution::StandardNormal,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        validate_rates(self.gamma, self.lambda)?;
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidParameter("n and d must be positive".into()));
        }
        if !(self.rho1 >= 0.0 && self.rho2 >= 0.0 && self.k >= 0.0)
            || !(self.rho1.is_finite() && self.rho2.is_finite() && self.k.is_finite())
        {
            return Err(Error::InvalidParameter(
                "rho1, rho2 and k must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

fn weight_vector<R: Rng>(rng: &mut R, d: usize, rho1: f64, k: f64) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            let r = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            rho1 * z + k * r
        })
        .collect()
}

/// Draws the selection and target parameters from the parameter stream of `cfg.seed`.
pub fn sample_params(cfg: &GeneratorConfig) -> Result<PsychmParams> {
    cfg.validate()?;
    sample_params_with(&mut stream_rng(cfg.seed, STREAM_PARAMS), cfg)
}

/// `alpha, a ~ N(0, rho1^2 I) + k R` with `R` Rademacher; `beta, b ~ N(0, rho2^2)`.
pub fn sample_params_with<R: Rng>(rng: &mut R, cfg: &GeneratorConfig) -> Result<PsychmParams> {
    let alpha = weight_vector(rng, cfg.d, cfg.rho1, cfg.k);
    let a = weight_vector(rng, cfg.d, cfg.rho1, cfg.k);
    let z_beta: f64 = StandardNormal.sample(rng);
    let z_b: f64 = StandardNormal.sample(rng);
    let (beta, b) = (cfg.rho2 * z_beta, cfg.rho2 * z_b);
    PsychmParams::new(
        Psychometric::new(Affine::new(alpha, beta), cfg.gamma, cfg.lambda)?,
        Affine::new(a, b),
    )
}

/// Draws fresh parameters and a dataset from them.
pub fn generate(cfg: &GeneratorConfig) -> Result<Dataset> {
    let params = sample_params(cfg)?;
    generate_with_params(cfg, &params)
}

/// Draws `cfg.n` rows under fixed `params`, ignoring the rates and weight
/// scales in `cfg`.
pub fn generate_with_params(cfg: &GeneratorConfig, params: &PsychmParams) -> Result<Dataset> {
    if cfg.n == 0 {
        return Err(Error::EmptyDataset);
    }
    let d = params.dim();
    let mut x_rng = stream_rng(cfg.seed, STREAM_FEATURES);
    let mut y_rng = stream_rng(cfg.seed, STREAM_CLASSES);
    let mut l_rng = stream_rng(cfg.seed, STREAM_FLAGS);

    let mut x = Vec::with_capacity(cfg.n * d);
    let mut y = Vec::with_capacity(cfg.n);
    let mut l = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let start = x.len();
        for _ in 0..d {
            let v = match cfg.x_dist {
                FeatureDistribution::StandardNormal => StandardNormal.sample(&mut x_rng),
                FeatureDistribution::UniformCube => x_rng.gen_range(-1.0..=1.0),
            };
            x.push(v);
        }
        let row = &x[start..];
        let uy: f64 = y_rng.gen();
        let ul: f64 = l_rng.gen();
        let yi = uy < crate::model::sigmoid(params.target.logit(row));
        let li = yi && ul < params.selection.eval_unchecked(row);
        y.push(yi);
        l.push(li);
    }
    Ok(Dataset::new(x, d, l, Some(y))?.with_true_params(params.clone()))
}

/// Seeded shuffle into two disjoint parts; the first holds `round(fraction * n)` rows.
pub fn split(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n = data.len();
    let first = libm::round(fraction * n as f64) as usize;
    if first == 0 || first == n {
        return Err(Error::EmptyDataset);
    }
    let perm = permutation(n, seed);
    Ok((data.select(&perm[..first]), data.select(&perm[first..])))
}

/// Fisher–Yates permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = GeneratorConfig::default();
        assert_eq!((c.n, c.d), (5000, 5));
        assert_eq!((c.rho1, c.rho2, c.k), (10.0, 1.0, 5.0));
        assert_eq!((c.gamma, c.lambda), (0.05, 0.05));
    }

    #[test]
    fn degenerate_weight_draws() {
        let cfg = GeneratorConfig {
            rho1: 0.0,
            k: 0.0,
            ..Default::default()
        };
        let p = sample_params(&cfg).unwrap();
        assert!(p.selection.base.weights.iter().all(|&w| w == 0.0));
        assert!(p.target.weights.iter().all(|&w| w == 0.0));

        let cfg = GeneratorConfig {
            rho1: 0.0,
            k: 5.0,
            ..Default::default()
        };
        for seed in 0..20 {
            let p = sample_params(&GeneratorConfig { seed, ..cfg.clone() }).unwrap();
            assert!(p.selection.base.weights.iter().all(|&w| w.abs() == 5.0));
        }
    }

    #[test]
    fn generated_data_is_nfp_and_deterministic() {
        let cfg = GeneratorConfig {
            n: 500,
            seed: 9,
            ..Default::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        let y = a.truth().unwrap();
        assert!(a.labels().iter().zip(y).all(|(&l, &y)| !l || y));
    }

    #[test]
    fn split_sizes_and_partition() {
        let cfg = GeneratorConfig {
            n: 5000,
            seed: 1,
            ..Default::default()
        };
        let data = generate(&cfg).unwrap();
        let (tr, te) = split(&data, 0.5, 3).unwrap();
        assert_eq!((tr.len(), te.len()), (2500, 2500));
        assert!(tr.true_params.is_some() && te.truth().is_some());
        let (tr2, _) = split(&data, 0.5, 3).unwrap();
        assert_eq!(tr, tr2);

        let mut all: Vec<Vec<u64>> = tr
            .rows()
            .chain(te.rows())
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        let mut orig: Vec<Vec<u64>> = data
            .rows()
            .map(|r| r.iter().map(|v| v.to_bits()).collect())
            .collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);

        let tiny = data.select(&[0]);
        assert!(split(&tiny, 0.5, 0).is_err());
        assert!(split(&data, 1.0, 0).is_err());
    }
}
