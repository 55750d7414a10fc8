use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tessfact_core::capacity::n_opt_upper;
use tessfact_core::mp::{
    monte_carlo_sweep, predicted_error, sample_demand, Ensemble, MonteCarloConfig,
};
use tessfact_core::svd::svd;
use tessfact_core::{build_tessellation, factorize_lossless, factorize_lossy, SchemeParams};

fn bench_svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("svd");
    for n in [16, 64, 128] {
        let p = SchemeParams::new(n, 2 * n, 0, 1, n, 2 * n);
        let a = sample_demand(&p, Ensemble::Gaussian, 1, 0).into_inner();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}x{}", 2 * n)),
            &a,
            |b, a| b.iter(|| svd(black_box(a)).unwrap()),
        );
    }
    group.finish();
}

fn bench_tessellation(c: &mut Criterion) {
    let p = SchemeParams::new(1000, 1500, 0, 2, 7, 11);
    c.bench_function("tessellation/1000x1500", |b| {
        b.iter(|| build_tessellation(black_box(&p)).unwrap())
    });
}

fn bench_factorize(c: &mut Criterion) {
    let mut group = c.benchmark_group("factorize");
    let p = SchemeParams::new(120, 200, 0, 1, 30, 50);
    let f = sample_demand(&p, Ensemble::Gaussian, 2, 0);
    let full = n_opt_upper(&p).unwrap();
    group.bench_function("lossless/120x200", |b| {
        b.iter(|| factorize_lossless(black_box(&f), &p.with_servers(full)).unwrap())
    });
    group.bench_function("lossy/120x200/half", |b| {
        b.iter(|| factorize_lossy(black_box(&f), &p, full / 2, false).unwrap())
    });
    group.finish();
}

fn bench_prediction(c: &mut Criterion) {
    let p = SchemeParams::new(400, 400, 0, 1, 100, 200);
    c.bench_function("predicted_error/400x400", |b| {
        b.iter(|| predicted_error(black_box(&p), 400).unwrap())
    });
    let config = MonteCarloConfig::new(8, 3);
    let small = SchemeParams::new(60, 100, 0, 1, 30, 50);
    c.bench_function("monte_carlo_sweep/60x100/8", |b| {
        b.iter(|| monte_carlo_sweep(black_box(&small), &[4, 16, 40], &config).unwrap())
    });
}

criterion_group!(
    benches,
    bench_svd,
    bench_tessellation,
    bench_factorize,
    bench_prediction
);
criterion_main!(benches);
