use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qplane::qspecial::{bessel_j, helmholtz_residuals, neumann_n, Solution};
use qplane::{GreenParams, PrecisionMode, QContext};

fn bench_bessel(c: &mut Criterion) {
    let mut group = c.benchmark_group("bessel_j");
    for q in [0.3, 0.5, 0.9] {
        let ctx = QContext::new(q).unwrap();
        group.bench_with_input(BenchmarkId::new("double", q), &ctx, |b, ctx| {
            b.iter(|| bessel_j(ctx, black_box(2.5)).unwrap())
        });
    }
    let ext = QContext::new(0.5)
        .unwrap()
        .with_precision(PrecisionMode::Extended);
    group.bench_function("extended/0.5", |b| {
        b.iter(|| bessel_j(&ext, black_box(2.5)).unwrap())
    });
    group.finish();
}

fn bench_neumann(c: &mut Criterion) {
    let ctx = QContext::new(0.5).unwrap();
    let params = GreenParams::new(&ctx, 0.37, 0.5772).unwrap();
    c.bench_function("neumann_n", |b| {
        b.iter(|| neumann_n(&ctx, &params, black_box(4.0)).unwrap())
    });
}

fn bench_residuals(c: &mut Criterion) {
    let ctx = QContext::new(0.5).unwrap();
    let mut group = c.benchmark_group("helmholtz_residuals");
    group.sample_size(10);
    group.bench_function("bessel", |b| {
        b.iter(|| helmholtz_residuals(&ctx, Solution::Bessel, 0.37, -20, 20).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_bessel, bench_neumann, bench_residuals);
criterion_main!(benches);
