//! Per-model summaries of trial reports and the pairwise significance tests.

use std::collections::BTreeMap;

use pulearn_core::metrics::{significance_matrix, Metric, MetricReport};
use pulearn_core::{ModelKind, SignificanceMatrix};
use serde::Serialize;

use crate::error::Result;

/// Mean and standard error over the trials where the metric is defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub model: ModelKind,
    pub mean: Option<f64>,
    pub std_err: Option<f64>,
    pub count: usize,
}

impl Summary {
    pub fn of(model: ModelKind, values: &[f64]) -> Self {
        let n = values.len();
        let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
        let std_err = match mean {
            Some(m) if n > 1 => {
                let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
                Some((var / n as f64).sqrt())
            }
            _ => None,
        };
        Self {
            model,
            mean,
            std_err,
            count: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricTable {
    pub metric: Metric,
    pub rows: Vec<Summary>,
    /// `None` with fewer than two models or two complete trials.
    pub significance: Option<SignificanceMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub models: Vec<ModelKind>,
    pub tables: Vec<MetricTable>,
}

impl ResultTable {
    /// Summarizes `reports` for `models`. Significance uses the trials in
    /// which every model has a value, with Brier negated.
    pub fn build(models: &[ModelKind], reports: &[MetricReport], quantile: f64) -> Result<Self> {
        let mut tables = Vec::with_capacity(Metric::ALL.len());
        for metric in Metric::ALL {
            let rows = models
                .iter()
                .map(|&m| {
                    let values: Vec<f64> = reports
                        .iter()
                        .filter(|r| r.model == m)
                        .filter_map(|r| r.value(metric))
                        .collect();
                    Summary::of(m, &values)
                })
                .collect();
            tables.push(MetricTable {
                metric,
                rows,
                significance: significance_for(models, reports, metric, quantile)?,
            });
        }
        Ok(Self {
            models: models.to_vec(),
            tables,
        })
    }

    pub fn table(&self, metric: Metric) -> &MetricTable {
        self.tables
            .iter()
            .find(|t| t.metric == metric)
            .expect("every metric has a table")
    }

    pub fn mean(&self, metric: Metric, model: ModelKind) -> Option<f64> {
        self.table(metric).rows.iter().find(|r| r.model == model)?.mean
    }

    /// Significance results as `{metric: {"m1_vs_m2": {...}}}`.
    pub fn significance_json(&self) -> serde_json::Value {
        let mut out = serde_json::Map::new();
        for t in &self.tables {
            let mut pairs = serde_json::Map::new();
            if let Some(sig) = &t.significance {
                for p in &sig.pairs {
                    pairs.insert(
                        format!("{}_vs_{}", p.first, p.second),
                        serde_json::json!({
                            "quantile_value": p.quantile_value,
                            "significant": p.significant,
                        }),
                    );
                }
            }
            out.insert(t.metric.as_str().into(), serde_json::Value::Object(pairs));
        }
        serde_json::Value::Object(out)
    }
}

fn significance_for(
    models: &[ModelKind],
    reports: &[MetricReport],
    metric: Metric,
    quantile: f64,
) -> Result<Option<SignificanceMatrix>> {
    if models.len() < 2 {
        return Ok(None);
    }
    // trial -> oriented score per model, in `models` order.
    let mut by_trial: BTreeMap<usize, Vec<Option<f64>>> = BTreeMap::new();
    for r in reports {
        if let Some(k) = models.iter().position(|&m| m == r.model) {
            by_trial.entry(r.trial_id).or_insert_with(|| vec![None; models.len()])[k] = r.oriented(metric);
        }
    }
    let complete: Vec<Vec<f64>> = by_trial
        .into_values()
        .filter_map(|row| row.into_iter().collect::<Option<Vec<f64>>>())
        .collect();
    if complete.len() < 2 {
        return Ok(None);
    }
    let scores: Vec<(ModelKind, Vec<f64>)> = models
        .iter()
        .enumerate()
        .map(|(k, &m)| (m, complete.iter().map(|row| row[k]).collect()))
        .collect();
    Ok(Some(significance_matrix(&scores, quantile)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(model: ModelKind, trial_id: usize, f1: f64, auc: Option<f64>) -> MetricReport {
        MetricReport {
            model,
            trial_id,
            f1,
            accuracy: f1,
            auc,
            brier: 1.0 - f1,
        }
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(ModelKind::Naive, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, Some(2.5));
        // sample variance 5/3, over n = 4
        assert!((s.std_err.unwrap() - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let one = Summary::of(ModelKind::Naive, &[0.7]);
        assert_eq!((one.mean, one.std_err, one.count), (Some(0.7), None, 1));
        assert_eq!(Summary::of(ModelKind::Naive, &[]).mean, None);
    }

    #[test]
    fn missing_auc_is_excluded() {
        let (a, b) = (ModelKind::Spm, ModelKind::Naive);
        let reports = vec![
            report(a, 0, 0.9, Some(0.9)),
            report(b, 0, 0.8, Some(0.7)),
            report(a, 1, 0.9, None),
            report(b, 1, 0.7, Some(0.6)),
            report(a, 2, 0.8, Some(0.8)),
            report(b, 2, 0.6, Some(0.5)),
        ];
        let t = ResultTable::build(&[a, b], &reports, 0.05).unwrap();
        let auc = t.table(Metric::Auc);
        assert_eq!(auc.rows[0].count, 2);
        assert!((auc.rows[0].mean.unwrap() - 0.85).abs() < 1e-15);
        assert_eq!(auc.rows[1].count, 3);
        assert!(auc.significance.as_ref().unwrap().is_significant(a, b));
        assert!(t.table(Metric::Brier).significance.as_ref().unwrap().is_significant(a, b));
        let json = t.significance_json();
        assert_eq!(json["f1"]["spm_vs_naive"]["significant"], true);
        assert_eq!(json["f1"]["naive_vs_spm"]["significant"], false);
    }

    #[test]
    fn single_model_or_trial_has_no_significance() {
        let r = vec![report(ModelKind::Spm, 0, 0.9, None)];
        let t = ResultTable::build(&[ModelKind::Spm], &r, 0.05).unwrap();
        assert!(t.tables.iter().all(|t| t.significance.is_none()));
        let r = vec![report(ModelKind::Spm, 0, 0.9, None), report(ModelKind::Naive, 0, 0.8, None)];
        let t = ResultTable::build(&[ModelKind::Spm, ModelKind::Naive], &r, 0.05).unwrap();
        assert!(t.table(Metric::F1).significance.is_none());
    }
}
