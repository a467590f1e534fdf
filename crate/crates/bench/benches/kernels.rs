use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ifit_core::bounds::Bounds;
use ifit_core::global::bridge_knn;
use ifit_core::mathkit::{l1_trust_step, mv_least_squares, robust_scatter};
use ifit_core::sampling::RngStream;
use ifit_core::SimArchive;
use nalgebra::{DMatrix, DVector};

fn bench_trust_step(c: &mut Criterion) {
    let p = 4;
    let mut rng = RngStream::new(1, 0);
    let a = DMatrix::from_fn(p, p, |_, _| rng.standard_normal());
    let omega = &a * a.transpose() + DMatrix::<f64>::identity(p, p);
    let g = DVector::from_fn(p, |_, _| rng.standard_normal());
    let theta = DVector::from_fn(p, |_, _| rng.uniform() * 2.0 - 1.0);
    let bounds = Bounds::new(vec![-5.0; p], vec![5.0; p]).unwrap();
    c.bench_function("l1_trust_step_p4", |b| {
        b.iter(|| l1_trust_step(black_box(&omega), &g, &theta, &bounds, 0.1).unwrap())
    });
}

fn bench_robust_scatter(c: &mut Criterion) {
    let mut rng = RngStream::new(2, 0);
    let residuals = DMatrix::from_fn(1000, 8, |_, _| rng.standard_normal());
    c.bench_function("robust_scatter_1000x8", |b| {
        b.iter(|| robust_scatter(black_box(&residuals)).unwrap())
    });
}

fn bench_bridge(c: &mut Criterion) {
    let mut rng = RngStream::new(3, 0);
    let mut archive = SimArchive::new(DVector::zeros(8));
    for _ in 0..2000 {
        archive.push(
            DVector::from_fn(4, |_, _| rng.uniform()),
            DVector::from_fn(8, |_, _| rng.standard_normal()),
        );
    }
    let d0 = DVector::from_element(4, 1.0);
    c.bench_function("bridge_knn_n2000", |b| {
        b.iter(|| bridge_knn(black_box(&archive), &d0, 1234))
    });
}

fn bench_local_regression(c: &mut Criterion) {
    let mut rng = RngStream::new(4, 0);
    let center = DVector::from_element(4, 0.5);
    let thetas: Vec<DVector<f64>> =
        (0..4000).map(|_| DVector::from_fn(4, |_, _| rng.uniform())).collect();
    let stats: Vec<DVector<f64>> = thetas
        .iter()
        .map(|_| DVector::from_fn(8, |_, _| rng.standard_normal()))
        .collect();
    c.bench_function("mv_least_squares_4000x4x8", |b| {
        b.iter(|| mv_least_squares(black_box(&thetas), &stats, &center).unwrap())
    });
}

criterion_group!(
    kernels,
    bench_trust_step,
    bench_robust_scatter,
    bench_bridge,
    bench_local_regression
);
criterion_main!(kernels);
