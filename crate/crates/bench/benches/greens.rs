use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use thermocp_bench::above_gold;
use thermocp_core::greens::{scatter_complex, scatter_imag_axis, scatter_real_axis};
use thermocp_core::QuadratureOptions;

fn imaginary_axis(c: &mut Criterion) {
    let opts = QuadratureOptions::default();
    let mut group = c.benchmark_group("scatter_imag_axis");
    for z in [1e-7, 1e-6, 1e-5] {
        let g = above_gold(z);
        group.bench_with_input(BenchmarkId::from_parameter(z), &g, |b, g| {
            b.iter(|| scatter_imag_axis(g, black_box(2.0e14), &opts).unwrap())
        });
    }
    group.finish();
}

fn real_axis(c: &mut Criterion) {
    let opts = QuadratureOptions::default();
    let g = above_gold(1e-6);
    let mut group = c.benchmark_group("scatter_real_axis");
    for omega in [1.32e11, 1.15e14, 2.37e15] {
        group.bench_with_input(BenchmarkId::from_parameter(omega), &omega, |b, &w| {
            b.iter(|| scatter_real_axis(&g, black_box(w), &opts).unwrap())
        });
    }
    group.finish();
}

fn complex_frequency(c: &mut Criterion) {
    let opts = QuadratureOptions::default();
    let g = above_gold(1e-6);
    c.bench_function("scatter_complex", |b| {
        b.iter(|| scatter_complex(&g, black_box(Complex64::new(2.37e15, 1e8)), &opts).unwrap())
    });
}

criterion_group!(benches, imaginary_axis, real_axis, complex_frequency);
criterion_main!(benches);
