use proptest::collection::vec;
use proptest::prelude::*;
use pulearn_core::metrics::{accuracy, auc_roc, brier, f1, quantile, significance_matrix, threshold};
use pulearn_core::{MetricReport, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every positive-negative pair, ties counted one half.
fn brute_force_auc(scores: &[f64], truth: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (s, &t) in scores.iter().zip(truth) {
        if !t {
            continue;
        }
        for (r, &u) in scores.iter().zip(truth) {
            if u {
                continue;
            }
            pairs += 1.0;
            if s > r {
                wins += 1.0;
            } else if s == r {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Linear-interpolation order statistic on a sorted copy.
fn sorted_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

#[test]
fn auc_matches_all_pairs_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..300 {
        let n = rng.gen_range(2..=200);
        // coarse scores force plenty of ties on some cases
        let grain = if case % 3 == 0 { 10.0 } else { 1e6 };
        let scores: Vec<f64> = (0..n).map(|_| (rng.gen::<f64>() * grain).round() / grain).collect();
        let mut truth: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        truth[0] = true;
        truth[1] = false;
        assert_eq!(auc_roc(&scores, &truth).unwrap(), brute_force_auc(&scores, &truth), "case {case}");
    }
}

#[test]
fn metric_examples() {
    assert_eq!(brier(&[0.9, 0.2], &[true, false]).unwrap(), (0.01 + 0.04) / 2.0);
    assert_eq!(brier(&[0.5; 3], &[true, false, true]).unwrap(), 0.25);
    assert_eq!(brier(&[1.0, 0.0], &[true, false]).unwrap(), 0.0);

    // TP=8, FP=2, FN=4
    let mut pred = vec![true; 10];
    let mut truth = vec![true; 8];
    truth.extend([false, false]);
    pred.extend([false; 4]);
    truth.extend([true; 4]);
    let (p, r) = (0.8, 2.0 / 3.0);
    assert!((f1(&pred, &truth).unwrap() - 2.0 * p * r / (p + r)).abs() < 1e-15);
    assert_eq!(f1(&[false, false], &[true, false]).unwrap(), 0.0);
    assert_eq!(f1(&[true, false], &[true, false]).unwrap(), 1.0);

    assert_eq!(auc_roc(&[0.1, 0.4, 0.35, 0.8], &[false, false, true, true]).unwrap(), 0.75);
    assert_eq!(auc_roc(&[0.3; 4], &[false, true, false, true]).unwrap(), 0.5);
    assert_eq!(auc_roc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]).unwrap(), 1.0);
    assert!(auc_roc(&[0.1, 0.2], &[true, true]).is_err());

    assert_eq!(accuracy(&[true, false, true, true], &[true, false, false, true]).unwrap(), 0.75);
    assert_eq!(accuracy(&[true, false], &[false, true]).unwrap(), 0.0);
    assert!(accuracy(&[true], &[true, false]).is_err());
    assert!(brier(&[], &[]).is_err());
}

#[test]
fn quantile_agrees_with_sorting() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let n = rng.gen_range(1..60);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let q = rng.gen::<f64>();
        assert!((quantile(&v, q).unwrap() - sorted_quantile(&v, q)).abs() <= 1e-15);
        assert_eq!(quantile(&v, 0.0).unwrap(), v.iter().cloned().fold(f64::INFINITY, f64::min));
    }
}

fn pair(first: &[f64], second: &[f64], q: f64) -> (bool, bool) {
    let m = significance_matrix(
        &[(ModelKind::Psychm, first.to_vec()), (ModelKind::Naive, second.to_vec())],
        q,
    )
    .unwrap();
    (
        m.is_significant(ModelKind::Psychm, ModelKind::Naive),
        m.is_significant(ModelKind::Naive, ModelKind::Psychm),
    )
}

#[test]
fn significance_against_order_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for negative_share in [0.04, 0.06] {
        let negatives = (500.0 * negative_share) as usize;
        let d: Vec<f64> = (0..500)
            .map(|i| {
                if i < negatives {
                    -0.01 - rng.gen_range(0.0..0.001)
                } else {
                    rng.gen_range(0.001..0.05)
                }
            })
            .collect();
        let base: Vec<f64> = (0..500).map(|_| rng.gen_range(0.3..0.6)).collect();
        let first: Vec<f64> = base.iter().zip(&d).map(|(b, x)| b + x).collect();
        // differences as the test sees them, after the floating-point subtraction
        let seen: Vec<f64> = first.iter().zip(&base).map(|(a, b)| a - b).collect();
        let oracle = sorted_quantile(&seen, 0.05) >= 0.0;
        assert_eq!(pair(&first, &base, 0.05).0, oracle, "share {negative_share}");
        assert_eq!(oracle, negative_share < 0.05);
    }

    // strict dominance and anti-dominance
    let lo = vec![0.1, 0.2, 0.3];
    let hi = vec![0.2, 0.25, 0.9];
    for q in [0.01, 0.05, 0.45, 0.99] {
        assert_eq!(pair(&hi, &lo, q), (true, false));
    }
    assert!(significance_matrix(&[(ModelKind::Spm, vec![0.1, 0.2]), (ModelKind::Naive, vec![0.1])], 0.05).is_err());
}

proptest! {
    #[test]
    fn zero_quantile_is_min_rule(d in vec(-1.0f64..1.0, 2..40)) {
        let base = vec![0.0; d.len()];
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // both directions pass only when every difference is 0
        let expected = min >= 0.0 && max > 0.0;
        prop_assert_eq!(pair(&d, &base, 0.0).0, expected);
    }

    #[test]
    fn complementary_quantiles_never_both_pass(d in vec(-1.0f64..1.0, 2..40), q in 0.0f64..1.0) {
        prop_assume!(d.iter().all(|&x| x != 0.0));
        let base = vec![0.0; d.len()];
        if pair(&d, &base, q).0 {
            prop_assert!(!pair(&d, &base, 1.0 - q).1);
        }
    }

    #[test]
    fn metrics_ignore_order_and_duplication(
        rows in vec((0.0f64..1.0, any::<bool>()), 2..80),
        rot in 0usize..80,
    ) {
        let mut rows = rows;
        rows[0].1 = true;
        rows[1].1 = false;
        let report = |r: &[(f64, bool)]| {
            let s: Vec<f64> = r.iter().map(|p| p.0).collect();
            let t: Vec<bool> = r.iter().map(|p| p.1).collect();
            MetricReport::compute(ModelKind::Naive, 0, &s, &t).unwrap()
        };
        let base = report(&rows);
        let mut shuffled = rows.clone();
        shuffled.reverse();
        let k = rot % shuffled.len();
        shuffled.rotate_left(k);
        let doubled: Vec<(f64, bool)> = rows.iter().chain(&rows).cloned().collect();
        for other in [report(&shuffled), report(&doubled)] {
            prop_assert!((other.brier - base.brier).abs() <= 1e-12);
            prop_assert_eq!(other.f1, base.f1);
            prop_assert_eq!(other.accuracy, base.accuracy);
            prop_assert!((other.auc.unwrap() - base.auc.unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn threshold_is_at_one_half() {
    assert_eq!(threshold(&[0.49, 0.5, 0.51]), vec![false, true, true]);
}
