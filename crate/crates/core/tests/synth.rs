use pulearn_core::model::sigmoid;
use pulearn_core::synth::{generate, generate_with_params, sample_params_with, split, stream_rng, STREAM_PARAMS};
use pulearn_core::{Affine, FeatureDistribution, GeneratorConfig, Psychometric, PsychmParams};

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[test]
fn weight_spread_adds_gaussian_and_rademacher_variance() {
    let cfg = GeneratorConfig::default();
    let mut rng = stream_rng(7, STREAM_PARAMS);
    let draws: Vec<PsychmParams> = (0..10_000).map(|_| sample_params_with(&mut rng, &cfg).unwrap()).collect();
    let expected = (100.0f64 + 25.0).sqrt();
    for j in 0..cfg.d {
        let alpha: Vec<f64> = draws.iter().map(|p| p.selection.base.weights[j]).collect();
        let a: Vec<f64> = draws.iter().map(|p| p.target.weights[j]).collect();
        for (name, v) in [("alpha", &alpha), ("a", &a)] {
            let s = sample_std(v);
            assert!((s - expected).abs() <= 0.3, "{name}[{j}] std {s}");
        }
    }
    let beta: Vec<f64> = draws.iter().map(|p| p.selection.base.bias).collect();
    assert!((sample_std(&beta) - 1.0).abs() <= 0.03);
}

#[test]
fn pure_rademacher_and_zero_limits() {
    let mut rng = stream_rng(3, STREAM_PARAMS);
    let cfg = GeneratorConfig { rho1: 0.0, k: 5.0, ..Default::default() };
    let p = sample_params_with(&mut rng, &cfg).unwrap();
    assert!(p.selection.base.weights.iter().chain(&p.target.weights).all(|w| w.abs() == 5.0));
    let cfg = GeneratorConfig { rho1: 0.0, k: 0.0, ..Default::default() };
    let p = sample_params_with(&mut rng, &cfg).unwrap();
    assert!(p.selection.base.weights.iter().chain(&p.target.weights).all(|&w| w == 0.0));
}

#[test]
fn flat_target_gives_balanced_classes() {
    let cfg = GeneratorConfig { seed: 5, ..Default::default() };
    let params = PsychmParams::new(
        Psychometric::new(Affine::new(vec![1.0; 5], 0.0), 0.05, 0.05).unwrap(),
        Affine::new(vec![0.0; 5], 0.0),
    )
    .unwrap();
    let data = generate_with_params(&cfg, &params).unwrap();
    let n = data.len() as f64;
    let mean = data.truth().unwrap().iter().filter(|&&y| y).count() as f64 / n;
    let sigma = (0.25 / n).sqrt();
    assert!((mean - 0.5).abs() <= 3.0 * sigma, "mean(y) = {mean}");
}

#[test]
fn labeling_rate_matches_selection_function() {
    for seed in 0..5 {
        let data = generate(&GeneratorConfig { seed, ..Default::default() }).unwrap();
        let params = data.true_params.clone().unwrap();
        let y = data.truth().unwrap();
        let (mut labeled, mut expected, mut var, mut positives) = (0.0, 0.0, 0.0, 0.0);
        for ((x, &yi), &li) in data.rows().zip(y).zip(data.labels()) {
            if yi {
                // psychometric function written out from its definition
                let p = &params.selection;
                let u: f64 = p.base.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + p.base.bias;
                let s = p.gamma + (1.0 - p.gamma - p.lambda) * sigmoid(u);
                positives += 1.0;
                expected += s;
                var += s * (1.0 - s);
                labeled += f64::from(u8::from(li));
            }
        }
        let sigma = var.sqrt() / positives;
        let (rate, mean_s) = (labeled / positives, expected / positives);
        assert!((rate - mean_s).abs() <= 3.0 * sigma, "seed {seed}: {rate} vs {mean_s}");
    }
}

#[test]
fn no_false_positives_and_label_frequency() {
    for seed in 0..200 {
        let cfg = GeneratorConfig {
            n: 300,
            d: 1 + (seed as usize % 6),
            gamma: 0.2,
            lambda: 0.1,
            x_dist: if seed % 2 == 0 { FeatureDistribution::StandardNormal } else { FeatureDistribution::UniformCube },
            seed,
            ..Default::default()
        };
        let data = generate(&cfg).unwrap();
        let y = data.truth().unwrap();
        assert!(data.labels().iter().zip(y).all(|(&l, &y)| !l || y));
        let count = |v: &[bool]| v.iter().filter(|&&b| b).count();
        assert!(count(data.labels()) <= count(y));
        if cfg.x_dist == FeatureDistribution::UniformCube {
            assert!(data.features().iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn generation_is_seeded() {
    let cfg = GeneratorConfig { n: 500, seed: 77, ..Default::default() };
    let a = generate(&cfg).unwrap();
    let b = generate(&cfg).unwrap();
    let bits = |d: &pulearn_core::Dataset| d.features().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a, b);
    let c = generate(&GeneratorConfig { seed: 78, ..cfg }).unwrap();
    assert_ne!(bits(&a), bits(&c));
}

#[test]
fn split_partitions_rows() {
    let data = generate(&GeneratorConfig { seed: 9, ..Default::default() }).unwrap();
    let (train, test) = split(&data, 0.5, 4).unwrap();
    assert_eq!((train.len(), test.len()), (2500, 2500));
    assert_eq!(split(&data, 0.5, 4).unwrap(), (train.clone(), test.clone()));
    assert!(train.truth().is_some() && test.truth().is_some());
    assert_eq!(train.true_params, data.true_params);
    assert_eq!(test.true_params, data.true_params);

    let key = |d: &pulearn_core::Dataset| {
        let y = d.truth().unwrap();
        let mut rows: Vec<(Vec<u64>, bool, bool)> = d
            .rows()
            .zip(d.labels())
            .zip(y)
            .map(|((x, &l), &y)| (x.iter().map(|v| v.to_bits()).collect(), l, y))
            .collect();
        rows.sort();
        rows
    };
    let mut union = key(&train);
    union.extend(key(&test));
    union.sort();
    assert_eq!(union, key(&data));

    assert!(split(&data, 0.0, 1).is_err());
    assert!(split(&data, 1.0, 1).is_err());
    let tiny = generate(&GeneratorConfig { n: 1, ..Default::default() }).unwrap();
    assert!(split(&tiny, 0.5, 1).is_err());
}
