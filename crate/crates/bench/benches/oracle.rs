use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use edgeworth_core::oracle::{find_all_pure_equilibria, verify_candidate, DEFAULT_GRID_CAP};
use edgeworth_core::{quantum_threshold, Duopoly, GridSpec, MarketParams, RationingRule};

fn game(k: f64, gamma: Option<f64>) -> Duopoly {
    Duopoly::new(MarketParams::new(1.0, k).unwrap(), RationingRule::Proportional, gamma).unwrap()
}

fn verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_candidate");
    for n in [501, 2001, 8001] {
        group.bench_with_input(BenchmarkId::new("quantum", n), &n, |b, &n| {
            let g = game(0.3, Some(1.0));
            b.iter(|| verify_candidate(black_box(&g), n, 1e-9).unwrap())
        });
    }
    group.finish();
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("find_all_pure_equilibria");
    group.sample_size(10);
    for n in [101, 201, 401] {
        group.bench_with_input(BenchmarkId::new("classical", n), &n, |b, &n| {
            let g = game(0.2, None);
            let grid = GridSpec::new(0.0, 1.0, n).unwrap();
            b.iter(|| find_all_pure_equilibria(black_box(&g), &grid, 1e-9, DEFAULT_GRID_CAP).unwrap())
        });
    }
    group.finish();
}

fn threshold(c: &mut Criterion) {
    c.bench_function("quantum_threshold_501", |b| {
        b.iter(|| {
            (0..501)
                .map(|j| quantum_threshold(1.0, black_box(j as f64 * 0.01)))
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, verify, search, threshold);
criterion_main!(benches);
