//! k-fold cross-validated choice of the two penalty coefficients, scored by
//! the Brier score of the predicted annotation probability `h(x)` against `l`.
//!
//! A [`CvPlan`] exposes its fold fits as independent jobs so callers can run
//! them in any order or in parallel; [`CvPlan::reduce`] merges results by
//! candidate index, so the outcome does not depend on scheduling.

use alloc::vec::Vec;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{fit, FitOptions};
use crate::metrics::brier;
use crate::model::ModelKind;
use crate::objective::{Norm, RegConfig};
use crate::synth::permutation;

pub const DEFAULT_GRID: [f64; 5] = [0.0, 0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvConfig {
    pub folds: usize,
    pub grid_alpha: Vec<f64>,
    pub grid_a: Vec<f64>,
    pub norm_alpha: Norm,
    pub norm_a: Norm,
    /// Seed of the fold assignment.
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 3,
            grid_alpha: DEFAULT_GRID.to_vec(),
            grid_a: DEFAULT_GRID.to_vec(),
            norm_alpha: Norm::L2Squared,
            norm_a: Norm::L2Squared,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_alpha.is_empty() || self.grid_a.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if self.folds < 2 {
            return Err(Error::InvalidParameter("at least two folds are required".into()));
        }
        if self
            .grid_alpha
            .iter()
            .chain(&self.grid_a)
            .any(|c| !(c.is_finite() && *c >= 0.0))
        {
            return Err(Error::InvalidParameter(
                "grid values must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Every `(c_alpha, c_a)` pair, `c_alpha` varying slowest.
    pub fn candidates(&self) -> Vec<RegConfig> {
        self.grid_alpha
            .iter()
            .flat_map(|&c_alpha| {
                self.grid_a.iter().map(move |&c_a| RegConfig {
                    c_alpha,
                    c_a,
                    norm_alpha: self.norm_alpha,
                    norm_a: self.norm_a,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CvSelection {
    pub reg: RegConfig,
    /// Mean held-out Brier per candidate, `None` where a fold fit failed.
    pub mean_brier: Vec<Option<f64>>,
    /// Number of model fits performed.
    pub fits: usize,
}

/// Fold assignment and deduplicated fit jobs for one cross-validation run.
#[derive(Debug, Clone)]
pub struct CvPlan<'a> {
    data: &'a Dataset,
    kind: ModelKind,
    opts: FitOptions,
    candidates: Vec<RegConfig>,
    /// Candidate index -> index into `distinct`.
    distinct_of: Vec<usize>,
    distinct: Vec<RegConfig>,
    folds: Vec<Vec<usize>>,
}

fn effective(kind: ModelKind, reg: &RegConfig) -> RegConfig {
    if kind.has_selection() {
        *reg
    } else {
        // Kinds without a selection function ignore c_alpha.
        RegConfig { c_alpha: 0.0, ..*reg }
    }
}

fn same_reg(a: &RegConfig, b: &RegConfig) -> bool {
    a.c_alpha.to_bits() == b.c_alpha.to_bits()
        && a.c_a.to_bits() == b.c_a.to_bits()
        && a.norm_alpha == b.norm_alpha
        && a.norm_a == b.norm_a
}

impl<'a> CvPlan<'a> {
    pub fn new(data: &'a Dataset, kind: ModelKind, cv: &CvConfig, opts: &FitOptions) -> Result<Self> {
        cv.validate()?;
        if data.len() < cv.folds {
            return Err(Error::InvalidParameter(alloc::format!(
                "{} rows cannot fill {} folds",
                data.len(),
                cv.folds
            )));
        }
        if kind.needs_truth() {
            data.require_truth()?;
        }
        let candidates = cv.candidates();
        let mut distinct: Vec<RegConfig> = Vec::new();
        let mut distinct_of = Vec::with_capacity(candidates.len());
        for c in &candidates {
            let e = effective(kind, c);
            let idx = match distinct.iter().position(|d| same_reg(d, &e)) {
                Some(i) => i,
                None => {
                    distinct.push(e);
                    distinct.len() - 1
                }
            };
            distinct_of.push(idx);
        }
        let perm = permutation(data.len(), cv.seed);
        let mut folds = alloc::vec![Vec::new(); cv.folds];
        for (pos, &row) in perm.iter().enumerate() {
            folds[pos % cv.folds].push(row);
        }
        Ok(Self {
            data,
            kind,
            opts: opts.clone(),
            candidates,
            distinct_of,
            distinct,
            folds,
        })
    }

    pub fn candidates(&self) -> &[RegConfig] {
        &self.candidates
    }

    /// Number of fit jobs; zero when the grid holds a single candidate.
    pub fn job_count(&self) -> usize {
        if self.candidates.len() == 1 {
            0
        } else {
            self.distinct.len() * self.folds.len()
        }
    }

    /// Held-out Brier score of job `job` (distinct candidate `job / folds`, fold `job % folds`).
    pub fn run_job(&self, job: usize) -> Result<f64> {
        let k = self.folds.len();
        let reg = &self.distinct[job / k];
        let fold = job % k;
        let train_idx: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != fold)
            .flat_map(|(_, rows)| rows.iter().copied())
            .collect();
        let train = self.data.select(&train_idx);
        let test = self.data.select(&self.folds[fold]);
        let model = fit(self.kind, &train, reg, &self.opts)?;
        let truth = match self.kind {
            ModelKind::RealOracle => test.require_truth()?,
            _ => test.labels(),
        };
        let predictions = match self.kind {
            ModelKind::RealOracle => model.scores(&test),
            _ => model.annotation_probabilities(&test),
        };
        brier(&predictions, truth)
    }

    /// Picks the candidate with the lowest mean held-out Brier score. Exact
    /// ties go to the larger total penalty, then the larger `c_a`.
    pub fn reduce(&self, results: &[Result<f64>]) -> Result<CvSelection> {
        if self.candidates.len() == 1 {
            return Ok(CvSelection {
                reg: self.candidates[0],
                mean_brier: alloc::vec![None],
                fits: 0,
            });
        }
        if results.len() != self.job_count() {
            return Err(Error::LengthMismatch {
                left: results.len(),
                right: self.job_count(),
            });
        }
        let k = self.folds.len();
        let distinct_means: Vec<Option<f64>> = results
            .chunks(k)
            .map(|chunk| {
                let mut sum = 0.0;
                for r in chunk {
                    sum += *r.as_ref().ok()?;
                }
                Some(sum / k as f64)
            })
            .collect();
        let mean_brier: Vec<Option<f64>> = self.distinct_of.iter().map(|&d| distinct_means[d]).collect();

        let mut best: Option<usize> = None;
        for (i, m) in mean_brier.iter().enumerate() {
            let Some(m) = *m else { continue };
            best = match best {
                None => Some(i),
                Some(b) => {
                    let mb = mean_brier[b].unwrap();
                    if m < mb || (m == mb && prefers_heavier(&self.candidates[i], &self.candidates[b])) {
                        Some(i)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        match best {
            Some(i) => Ok(CvSelection {
                reg: self.candidates[i],
                mean_brier,
                fits: results.len(),
            }),
            None => Err(results
                .iter()
                .find_map(|r| r.as_ref().err().cloned())
                .unwrap_or(Error::EmptyGrid)),
        }
    }

    /// Runs every job in order on the current thread.
    pub fn run(&self) -> Result<CvSelection> {
        let results: Vec<Result<f64>> = (0..self.job_count()).map(|j| self.run_job(j)).collect();
        self.reduce(&results)
    }
}

fn prefers_heavier(a: &RegConfig, b: &RegConfig) -> bool {
    let (ta, tb) = (a.c_alpha + a.c_a, b.c_alpha + b.c_a);
    if ta != tb {
        return ta > tb;
    }
    if a.c_a != b.c_a {
        return a.c_a > b.c_a;
    }
    a.c_alpha > b.c_alpha
}

/// Cross-validated penalty selection for `kind`.
pub fn select_hyperparams(
    data: &Dataset,
    kind: ModelKind,
    cv: &CvConfig,
    opts: &FitOptions,
) -> Result<CvSelection> {
    CvPlan::new(data, kind, cv, opts)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy() -> Dataset {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let l: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        Dataset::new(x, 1, l, None).unwrap()
    }

    #[test]
    fn empty_grid_is_an_error() {
        let cv = CvConfig {
            grid_a: vec![],
            ..CvConfig::default()
        };
        let opts = FitOptions::for_kind(ModelKind::Naive, 1);
        assert_eq!(
            select_hyperparams(&toy(), ModelKind::Naive, &cv, &opts).unwrap_err(),
            Error::EmptyGrid
        );
    }

    #[test]
    fn singleton_grid_needs_no_fits() {
        let cv = CvConfig {
            grid_alpha: vec![0.5],
            grid_a: vec![2.0],
            ..CvConfig::default()
        };
        let opts = FitOptions::for_kind(ModelKind::Spm, 1);
        let sel = select_hyperparams(&toy(), ModelKind::Spm, &cv, &opts).unwrap();
        assert_eq!((sel.reg.c_alpha, sel.reg.c_a), (0.5, 2.0));
        assert!(sel.fits <= cv.folds);
    }

    #[test]
    fn ties_go_to_heavier_penalty() {
        // c_alpha does not affect the naive fit, so both pairs tie exactly.
        let cv = CvConfig {
            grid_alpha: vec![0.0, 5.0],
            grid_a: vec![1.0],
            ..CvConfig::default()
        };
        let opts = FitOptions::for_kind(ModelKind::Naive, 1);
        let sel = select_hyperparams(&toy(), ModelKind::Naive, &cv, &opts).unwrap();
        assert_eq!(sel.mean_brier[0], sel.mean_brier[1]);
        assert_eq!((sel.reg.c_alpha, sel.reg.c_a), (5.0, 1.0));
        assert_eq!(sel.fits, cv.folds);
    }

    #[test]
    fn too_few_rows() {
        let data = Dataset::new(vec![0.0, 1.0], 1, vec![true, false], None).unwrap();
        let opts = FitOptions::for_kind(ModelKind::Naive, 1);
        assert!(select_hyperparams(&data, ModelKind::Naive, &CvConfig::default(), &opts).is_err());
    }
}
