// SPDX-License-Identifier: Apache-2.0

mod common;

use cast_core::bundle::{generate_synthetic, HiddenStateBundle, SyntheticSpec};
use cast_core::error::CastError;
use cast_core::estimation::{Estimator, EstimatorKind};
use cast_core::metrics::MetricName;
use cast_core::statistics::{
    bootstrap_ci, bootstrap_replicates, compare_estimators, rff_dim_sweep, sample_size_sweep, threshold_sweep,
    BootstrapOptions, BootstrapResult, RffSweepOptions, SampleSweepOptions, DEFAULT_THRESHOLD_GRID,
};
use cast_core::analysis::RffOptions;
use common::{gaussian, median};
use ndarray::Array2;

/// Feature 0 holds the sequence id and feature 1 the position inside it.
fn fingerprint_bundle(lens: &[usize]) -> HiddenStateBundle {
    let m: usize = lens.iter().sum();
    let noise = gaussian(m, 4, 5);
    let mut layer = Array2::<f32>::zeros((m, 6));
    let mut row = 0;
    for (s, &len) in lens.iter().enumerate() {
        for p in 0..len {
            layer[[row, 0]] = s as f32;
            layer[[row, 1]] = p as f32;
            for k in 0..4 {
                layer[[row, 2 + k]] = noise[[row, k]] as f32;
            }
            row += 1;
        }
    }
    let next = layer.mapv(|x| 0.5 * x + 1.0);
    HiddenStateBundle::new("fingerprint", vec![layer, next], lens.to_vec()).unwrap()
}

#[test]
fn replicates_copy_whole_sequences() {
    let lens = [3, 5, 2, 7, 4, 6];
    let bundle = fingerprint_bundle(&lens);
    for rep in bootstrap_replicates(&bundle, 20, 9).unwrap() {
        assert_eq!(rep.sequences.len(), lens.len());
        let expected: usize = rep.sequences.iter().map(|&s| lens[s]).sum();
        assert_eq!(rep.rows.len(), expected);
        let h = bundle.layer_rows_f64(0, &rep.rows);
        let mut r = 0;
        for &s in &rep.sequences {
            for p in 0..lens[s] {
                assert_eq!(h[[r, 0]], s as f64);
                assert_eq!(h[[r, 1]], p as f64);
                r += 1;
            }
        }
    }
}

#[test]
fn bootstrap_is_deterministic_per_seed() {
    let spec = SyntheticSpec::uniform(3, 6, 200, 6, 0.2, 0.2, 11).with_sequence_length(10);
    let (bundle, _) = generate_synthetic(&spec).unwrap();
    let opts = BootstrapOptions {
        seed: 5,
        ..BootstrapOptions::default()
    };
    let a = bootstrap_ci(&bundle, 1, &MetricName::BOOTSTRAP, &opts).unwrap();
    let b = bootstrap_ci(&bundle, 1, &MetricName::BOOTSTRAP, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 8);
    let c = bootstrap_ci(&bundle, 1, &MetricName::BOOTSTRAP, &BootstrapOptions { seed: 6, ..opts.clone() }).unwrap();
    assert_ne!(a, c);
    for r in &a {
        assert_eq!(r.samples.len(), 20);
        let lo = r.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= r.ci_low && r.ci_low <= r.ci_high && r.ci_high <= hi);
    }
    let csv = BootstrapResult::to_csv(&a).unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("layer,axis,value,metric,estimate,ci_low,ci_high,cv\n"));
}

#[test]
fn noise_free_bundle_gives_zero_width_rank_interval() {
    let spec = SyntheticSpec::uniform(2, 8, 320, 4, 0.1, 0.0, 12);
    let (bundle, _) = generate_synthetic(&spec).unwrap();
    let r = bootstrap_ci(&bundle, 0, &[MetricName::EffectiveRank], &BootstrapOptions::default()).unwrap();
    assert_eq!(r[0].point_estimate, 4.0);
    assert_eq!((r[0].ci_low, r[0].ci_high), (4.0, 4.0));
}

#[test]
fn point_estimate_usually_inside_bootstrap_range() {
    let mut inside = 0;
    for seed in 0..50 {
        let spec = SyntheticSpec::uniform(2, 5, 200, 5, 0.3, 0.3, 1000 + seed).with_sequence_length(10);
        let (bundle, _) = generate_synthetic(&spec).unwrap();
        let opts = BootstrapOptions {
            seed,
            ..BootstrapOptions::default()
        };
        let r = &bootstrap_ci(&bundle, 0, &[MetricName::TransformationEntropy], &opts).unwrap()[0];
        let lo = r.samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if (lo..=hi).contains(&r.point_estimate) {
            inside += 1;
        }
    }
    assert!(inside >= 40, "only {inside}/50 inside");
}

#[test]
fn bootstrap_rejects_single_sequence() {
    let bundle = fingerprint_bundle(&[9]);
    assert!(matches!(
        bootstrap_ci(&bundle, 0, &[MetricName::EffectiveRank], &BootstrapOptions::default()),
        Err(CastError::InsufficientSequences(1))
    ));
}

#[test]
fn sample_sweep_contracts() {
    let spec = SyntheticSpec::uniform(3, 8, 400, 8, 0.2, 0.3, 13).with_sequence_length(10);
    let (bundle, _) = generate_synthetic(&spec).unwrap();
    let metrics = [MetricName::EffectiveRank, MetricName::TransformationEntropy, MetricName::ResidualNorm];
    let t = sample_size_sweep(&bundle, &[4, 40], &metrics, &SampleSweepOptions::default()).unwrap();
    assert_eq!(t.rows().len(), 2 * metrics.len() * 2);
    for layer in 0..2 {
        for m in metrics {
            assert_eq!(t.cell(layer, 40.0, m).unwrap().cv, Some(0.0));
            assert!(t.cell(layer, 4.0, m).unwrap().cv.unwrap() >= 0.0);
        }
    }
    assert!(matches!(
        sample_size_sweep(&bundle, &[41], &metrics, &SampleSweepOptions::default()),
        Err(CastError::SizeTooLarge { requested: 41, available: 40 })
    ));
}

#[test]
fn sample_sweep_variation_shrinks_with_size() {
    let spec = SyntheticSpec::uniform(4, 8, 3000, 8, 0.3, 0.5, 14).with_sequence_length(10);
    let (bundle, _) = generate_synthetic(&spec).unwrap();
    let metrics = [MetricName::EffectiveRank, MetricName::TransformationEntropy];
    let t = sample_size_sweep(&bundle, &[3, 200], &metrics, &SampleSweepOptions::default()).unwrap();
    for m in metrics {
        let small = median((0..3).map(|l| t.cell(l, 3.0, m).unwrap().cv.unwrap()).collect());
        let large = median((0..3).map(|l| t.cell(l, 200.0, m).unwrap().cv.unwrap()).collect());
        assert!(large <= small, "{m}: {large} > {small}");
    }
}

#[test]
fn threshold_sweep_covers_grid_and_is_monotone() {
    let spec = SyntheticSpec::uniform(4, 16, 300, 10, 0.8, 0.01, 15);
    let (bundle, _) = generate_synthetic(&spec).unwrap();
    let t = threshold_sweep(&bundle, &DEFAULT_THRESHOLD_GRID, &Estimator::Pinv { rcond: None }).unwrap();
    assert_eq!(t.records.len(), 8 * 3);
    for layer in 0..3 {
        let ranks: Vec<f64> = DEFAULT_THRESHOLD_GRID
            .iter()
            .map(|&e| t.cell(layer, e, MetricName::EffectiveRank).unwrap().estimate)
            .collect();
        assert!(ranks.windows(2).all(|w| w[0] >= w[1]), "{ranks:?}");
    }
    let json = t.to_json();
    assert_eq!(json["layers"].as_array().unwrap().len(), 3);
}

#[test]
fn rff_sweep_rank_bound_and_residual_trend() {
    let dims = [25, 50, 100, 200];
    let mut medians = vec![Vec::new(); dims.len()];
    for seed in 0..5 {
        let spec = SyntheticSpec::uniform(4, 6, 500, 6, 0.2, 0.2, 20 + seed);
        let (bundle, _) = generate_synthetic(&spec).unwrap();
        let opts = RffSweepOptions {
            seed,
            rff: RffOptions::default(),
            ..RffSweepOptions::default()
        };
        let t = rff_dim_sweep(&bundle, &dims, &opts).unwrap();
        assert_eq!(t.records.len(), 3 * dims.len());
        for r in &t.records {
            let er = r.cells.iter().find(|c| c.metric == MetricName::EffectiveRank).unwrap().estimate;
            assert!(er <= r.value);
        }
        for (k, &d) in dims.iter().enumerate() {
            let per_layer = (0..3)
                .map(|l| t.cell(l, d as f64, MetricName::ResidualNorm).unwrap().estimate)
                .collect();
            medians[k].push(median(per_layer));
        }
    }
    let trend: Vec<f64> = medians.into_iter().map(median).collect();
    assert!(trend.windows(2).all(|w| w[1] <= w[0]), "{trend:?}");
}

#[test]
fn estimator_comparison_ordering() {
    // Transition 1 maps a rank-6 input, so its centered input is numerically
    // rank deficient.
    let mut spec = SyntheticSpec::uniform(3, 16, 800, 16, 0.05, 0.05, 16);
    spec.ranks = vec![6, 16];
    let (bundle, _) = generate_synthetic(&spec).unwrap();
    let configs: Vec<Estimator> = [
        EstimatorKind::Pinv,
        EstimatorKind::Ridge,
        EstimatorKind::ElasticNet,
        EstimatorKind::TruncatedSvd,
    ]
    .into_iter()
    .map(Estimator::default_for)
    .collect();
    for transition in 0..2 {
        let rows = compare_estimators(&bundle, transition, &configs, 1e-5).unwrap();
        assert_eq!(rows.len(), 4);
        let pinv = rows[0].reconstruction_error;
        assert!(rows.iter().all(|r| pinv <= r.reconstruction_error + 1e-9));
        assert!(rows.iter().all(|r| r.seconds > 0.0));
    }
    assert!(compare_estimators(&bundle, 0, &configs[..1], 1e-5).is_err());
}
