//! Scan throughput: rayon-parallel map versus the sequential reference path
//! on the same grid, plus a single-trajectory baseline.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use helfrich::{default_grid, scan, scan_seq, SolverConfig};

fn bench_scan(c: &mut Criterion) {
    let config = SolverConfig::default();
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for n in [32usize, 128] {
        let grid = default_grid(3.0, n);
        group.bench_with_input(BenchmarkId::new("parallel", n), &grid, |b, grid| {
            b.iter(|| scan(1.0, grid, &config))
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &grid, |b, grid| {
            b.iter(|| scan_seq(1.0, grid, &config))
        });
    }
    group.finish();
}

fn bench_profile(c: &mut Criterion) {
    let config = SolverConfig::default();
    let params = helfrich::ShootingParams::new(1.0, 0.8).unwrap();
    c.bench_function("integrate_profile", |b| {
        b.iter(|| helfrich::integrate_profile(&params, &config).unwrap())
    });
}

criterion_group!(benches, bench_scan, bench_profile);
criterion_main!(benches);
