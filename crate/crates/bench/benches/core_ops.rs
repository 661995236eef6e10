use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tengauss_bench::{bench_data, bench_params};
use tengauss_core::estimation::{fit, flip_flop_fit};
use tengauss_core::tensor::fold;
use tengauss_core::DenseTensor;

fn tensor_ops(c: &mut Criterion) {
    let t = DenseTensor::from_fn(vec![16, 16, 16], |idx| {
        ((idx[0] * 7 + idx[1] * 3 + idx[2]) as f64 * 0.37).sin()
    })
    .unwrap();

    c.bench_function("unfold_mode2_16x16x16", |b| {
        b.iter(|| black_box(&t).unfold(1).unwrap())
    });

    let unfolded = t.unfold(1).unwrap();
    c.bench_function("fold_mode2_16x16x16", |b| {
        b.iter(|| fold(black_box(&unfolded), t.shape()).unwrap())
    });

    let u = nalgebra::DMatrix::<f64>::from_fn(16, 16, |i, j| ((i + 2 * j) as f64 * 0.11).cos());
    c.bench_function("mode_product_16x16x16", |b| {
        b.iter(|| black_box(&t).mode_n_product(&u, 1).unwrap())
    });
}

fn density_and_sampling(c: &mut Criterion) {
    let params = bench_params(&[8, 8, 8], 1);
    let x = params.sample(1, 2).unwrap().get(0).clone();
    c.bench_function("log_pdf_8x8x8", |b| {
        b.iter(|| params.log_pdf(black_box(&x)).unwrap())
    });

    c.bench_function("sample_100_of_8x8x8", |b| {
        b.iter(|| params.sample(100, black_box(3)).unwrap())
    });
}

fn estimators(c: &mut Criterion) {
    let (_, data) = bench_data(&[4, 5, 6], 1000, 7);
    c.bench_function("fit_4x5x6_T1000", |b| {
        b.iter(|| fit(black_box(&data), true).unwrap())
    });

    let (_, small) = bench_data(&[4, 5], 500, 9);
    c.bench_function("flip_flop_4x5_T500", |b| {
        b.iter(|| flip_flop_fit(black_box(&small), 50, 1e-8).unwrap())
    });
}

criterion_group!(benches, tensor_ops, density_and_sampling, estimators);
criterion_main!(benches);
