// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cast_bench::{fixture, layer};
use cast_core::analysis::transition_pair;
use cast_core::kernel::{cka_matrix_from_layers, median_bandwidth, rff_map, sample_rff, CkaOptions, KernelKind};
use cast_core::{svd, Estimator};

fn bench_svd(c: &mut Criterion) {
    let mut g = c.benchmark_group("svd");
    for dim in [64, 256] {
        let h = layer(&fixture(2, 2048, dim), 0);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &h, |b, h| {
            b.iter(|| svd(black_box(h.view()), true).unwrap())
        });
    }
    g.finish();
}

fn bench_estimators(c: &mut Criterion) {
    let bundle = fixture(2, 2048, 128);
    let pair = transition_pair(&bundle, 0, None).unwrap();
    let mut g = c.benchmark_group("estimate");
    g.sample_size(20);
    for est in [
        Estimator::Pinv { rcond: None },
        Estimator::Ridge { lambda: 1e-3 },
        Estimator::TruncatedSvd { k: Some(32), rcond: None },
    ] {
        g.bench_function(est.kind().as_str(), |b| b.iter(|| est.fit(black_box(&pair)).unwrap()));
    }
    g.finish();
}

fn bench_rff(c: &mut Criterion) {
    let h = layer(&fixture(2, 2048, 64), 0);
    let gamma = median_bandwidth(h.view(), 2000, 1).unwrap();
    let mut g = c.benchmark_group("rff_map");
    for features in [250, 1000] {
        let params = sample_rff(KernelKind::Rbf, gamma, features, 64, 3).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(features), &params, |b, p| {
            b.iter(|| rff_map(black_box(h.view()), p).unwrap())
        });
    }
    g.finish();
}

fn bench_cka(c: &mut Criterion) {
    let bundle = fixture(6, 512, 32);
    let layers: Vec<_> = (0..bundle.num_layers()).map(|i| layer(&bundle, i)).collect();
    let opts = CkaOptions::default();
    let mut g = c.benchmark_group("cka");
    g.sample_size(10);
    g.bench_function("matrix_6x512", |b| b.iter(|| cka_matrix_from_layers(black_box(&layers), &opts).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_svd, bench_estimators, bench_rff, bench_cka);
criterion_main!(benches);
