//! Classification metrics and the pairwise quantile significance test.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::ModelKind;

/// Scores at or above this value count as positive predictions.
pub const DECISION_THRESHOLD: f64 = 0.5;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    if a == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

pub fn threshold(scores: &[f64]) -> Vec<bool> {
    scores.iter().map(|&s| s >= DECISION_THRESHOLD).collect()
}

/// Mean squared difference between scores and 0/1 outcomes.
pub fn brier(scores: &[f64], truth: &[bool]) -> Result<f64> {
    check_lengths(scores.len(), truth.len())?;
    let sum: f64 = scores
        .iter()
        .zip(truth)
        .map(|(&s, &t)| {
            let e = s - if t { 1.0 } else { 0.0 };
            e * e
        })
        .sum();
    Ok(sum / scores.len() as f64)
}

pub fn accuracy(pred: &[bool], truth: &[bool]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// F1 on the positive class; 0 when precision and recall are both 0.
pub fn f1(pred: &[bool], truth: &[bool]) -> Result<f64> {
    check_lengths(pred.len(), truth.len())?;
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    if precision + recall == 0.0 {
        Ok(0.0)
    } else {
        Ok(2.0 * (precision * recall) / (precision + recall))
    }
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc_roc(scores: &[f64], truth: &[bool]) -> Result<f64> {
    check_lengths(scores.len(), truth.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the number of (positive, negative) wins, so ties stay integral.
    let mut twice_wins: u64 = 0;
    let mut negatives_below: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0u64, 0u64);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if truth[order[j]] {
                pos += 1;
            } else {
                neg += 1;
            }
            j += 1;
        }
        twice_wins += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
        i = j;
    }
    let wins = twice_wins as f64 / 2.0;
    Ok(wins / (positives as f64 * negatives as f64))
}

/// Empirical quantile with linear interpolation between order statistics
/// (position `q * (n - 1)` in the sorted sample).
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(alloc::format!("quantile {q} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    if frac == 0.0 {
        Ok(sorted[lo])
    } else {
        Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
    }
}

/// Metrics of one model on one test set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricReport {
    pub model: ModelKind,
    pub trial_id: usize,
    pub f1: f64,
    pub accuracy: f64,
    /// `None` when the test truth holds a single class.
    pub auc: Option<f64>,
    pub brier: f64,
}

impl MetricReport {
    pub fn compute(model: ModelKind, trial_id: usize, scores: &[f64], truth: &[bool]) -> Result<Self> {
        let pred = threshold(scores);
        let auc = match auc_roc(scores, truth) {
            Ok(v) => Some(v),
            Err(Error::SingleClass) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            model,
            trial_id,
            f1: f1(&pred, truth)?,
            accuracy: accuracy(&pred, truth)?,
            auc,
            brier: brier(scores, truth)?,
        })
    }

    /// The metric oriented so that higher is better (Brier negated).
    pub fn oriented(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::F1 => Some(self.f1),
            Metric::Accuracy => Some(self.accuracy),
            Metric::Auc => self.auc,
            Metric::Brier => Some(-self.brier),
        }
    }

    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Brier => Some(self.brier),
            m => self.oriented(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    Accuracy,
    F1,
    Auc,
    Brier,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Accuracy, Metric::F1, Metric::Auc, Metric::Brier];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::F1 => "f1",
            Metric::Auc => "auc",
            Metric::Brier => "brier",
        }
    }
}

/// Outcome of comparing `better` against `worse` on per-trial differences.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairTest {
    pub first: ModelKind,
    pub second: ModelKind,
    /// Quantile of `score(first) - score(second)` over trials.
    pub quantile_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignificanceMatrix {
    pub quantile: f64,
    /// One entry per ordered pair of distinct models, in input order.
    pub pairs: Vec<PairTest>,
}

impl SignificanceMatrix {
    pub fn get(&self, first: ModelKind, second: ModelKind) -> Option<&PairTest> {
        self.pairs.iter().find(|p| p.first == first && p.second == second)
    }

    pub fn is_significant(&self, first: ModelKind, second: ModelKind) -> bool {
        self.get(first, second).is_some_and(|p| p.significant)
    }
}

/// Default quantile: `(1 - level) / 2` at level 0.9.
pub const DEFAULT_QUANTILE: f64 = 0.05;

/// Quantile for a significance level read as a two-sided interval.
pub fn conventional_quantile(level: f64) -> f64 {
    (1.0 - level) / 2.0
}

/// Quantile for a significance level read literally as `level / 2`.
pub fn literal_quantile(level: f64) -> f64 {
    level / 2.0
}

/// `first` is significantly better than `second` when the `quantile` of the
/// per-trial differences `S(first) - S(second)` is non-negative. Scores must
/// already be oriented so that higher is better.
///
/// If both directions of a pair pass (only possible when the two quantiles are
/// exactly zero), neither is marked significant.
pub fn significance_matrix(scores: &[(ModelKind, Vec<f64>)], quantile_rule: f64) -> Result<SignificanceMatrix> {
    let trials = scores.first().map(|(_, v)| v.len()).unwrap_or(0);
    for (_, v) in scores {
        if v.len() != trials {
            return Err(Error::LengthMismatch {
                left: v.len(),
                right: trials,
            });
        }
    }
    if trials < 2 && !scores.is_empty() {
        return Err(Error::InvalidParameter("at least two trials are required".into()));
    }
    let mut pairs = Vec::new();
    for (i, (mi, si)) in scores.iter().enumerate() {
        for (j, (mj, sj)) in scores.iter().enumerate() {
            if i == j {
                continue;
            }
            let forward: Vec<f64> = si.iter().zip(sj).map(|(a, b)| a - b).collect();
            let backward: Vec<f64> = forward.iter().map(|d| -d).collect();
            let q = quantile(&forward, quantile_rule)?;
            let q_back = quantile(&backward, quantile_rule)?;
            pairs.push(PairTest {
                first: *mi,
                second: *mj,
                quantile_value: q,
                significant: q >= 0.0 && q_back < 0.0,
            });
        }
    }
    Ok(SignificanceMatrix {
        quantile: quantile_rule,
        pairs,
    })
}
