use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use volterra_bench::dense_series;
use volterra_core::criteria::ladder::{radial_integral, tg_ladder};
use volterra_core::spaces::weighted_sup_norm;
use volterra_core::symbols::lookup;
use volterra_core::{apply_tg, DiskGrid, FunctionHandle, LadderConfig, QuadratureConfig};

fn operators(c: &mut Criterion) {
    let g = dense_series(256);
    let f = dense_series(256);
    c.bench_function("apply_tg deg 256", |b| b.iter(|| apply_tg(black_box(&g), black_box(&f))));
}

fn norms(c: &mut Criterion) {
    let h = FunctionHandle::series(dense_series(256));
    let grid = DiskGrid::default();
    c.bench_function("weighted sup deg 256", |b| b.iter(|| weighted_sup_norm(black_box(&h), 1.0, &grid)));
}

fn integrals(c: &mut Criterion) {
    let g = lookup("cayley").unwrap();
    let quad = QuadratureConfig::default();
    c.bench_function("radial integral t=1-2^-20", |b| {
        b.iter(|| radial_integral(&g, 0.0, black_box(0.3), 1.0 - (-20f64).exp2(), &quad))
    });
    let cfg = LadderConfig {
        angles: 64,
        k_max: 24,
        ..LadderConfig::default()
    };
    let mut group = c.benchmark_group("ladder");
    group.sample_size(10);
    group.bench_function("cayley 64 angles", |b| b.iter(|| tg_ladder(&g, 0.0, 1.0, &cfg)));
    group.finish();
}

criterion_group!(benches, operators, norms, integrals);
criterion_main!(benches);
