//! Benchmarks along the hot paths: the dense eigensolve, the closed-form
//! heat kernel, the lattice kernel quadratures, the torus multiplier rule,
//! and the oscillatory cutoff sweep.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use loglap::asym::{a_sd, CutoffSpec};
use loglap::graph::random_connected_graph;
use loglap::heat::heat_kernel_zd;
use loglap::lattice::{w_log, w_s};
use loglap::spectral::{decompose, TimeQuadratureSpec};
use loglap::torus::{multiplier_kernel, MultiplierKind, TorusQuadratureSpec};
use std::hint::black_box;

fn bench_decompose(c: &mut Criterion) {
    let g = random_connected_graph(64, 7);
    c.bench_function("decompose_random_64", |b| {
        b.iter(|| decompose(black_box(&g)).unwrap())
    });
}

fn bench_bochner(c: &mut Criterion) {
    let g = random_connected_graph(40, 3);
    let dec = decompose(&g).unwrap();
    let u: Vec<f64> = (0..40).map(|i| ((i * i) as f64).sin()).collect();
    let q = TimeQuadratureSpec::default();
    c.bench_function("bochner_frac_40_vertices", |b| {
        b.iter(|| dec.bochner_frac(black_box(0.5), &u, &q).unwrap())
    });
}

fn bench_heat_kernel(c: &mut Criterion) {
    c.bench_function("heat_kernel_zd_d3", |b| {
        b.iter(|| heat_kernel_zd(3, black_box(1.7), &[2, -1, 4]).unwrap())
    });
}

fn bench_lattice_kernels(c: &mut Criterion) {
    c.bench_function("w_s_half_k5", |b| {
        b.iter(|| w_s(1, 0.5, &[black_box(5)], 1e-10).unwrap())
    });
    c.bench_function("w_log_d2_k3", |b| {
        b.iter(|| w_log(2, &[black_box(3), 1], 1e-10).unwrap())
    });
}

fn bench_multiplier(c: &mut Criterion) {
    let q = TorusQuadratureSpec {
        points_per_dim: 64,
        ..Default::default()
    };
    c.bench_function("log_multiplier_d2_64pts", |b| {
        b.iter_batched(
            || q,
            |q| multiplier_kernel(2, MultiplierKind::LogPhi, &[2, 1], &q).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_cutoff_limit(c: &mut Criterion) {
    let spec = CutoffSpec {
        n_list: vec![200.0, 400.0],
        ..Default::default()
    };
    c.bench_function("a_sd_scales_200_400", |b| {
        b.iter(|| a_sd(1, black_box(0.5), &spec).unwrap())
    });
}

criterion_group!(
    benches,
    bench_decompose,
    bench_bochner,
    bench_heat_kernel,
    bench_lattice_kernels,
    bench_multiplier,
    bench_cutoff_limit
);
criterion_main!(benches);
