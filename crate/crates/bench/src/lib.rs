//! Shared fixtures for the benchmark targets.

use tengauss_core::rng::seeded;
use tengauss_core::{SampleSet, TensorGaussianParams};

pub fn bench_params(shape: &[usize], seed: u64) -> TensorGaussianParams {
    TensorGaussianParams::random(shape, &mut seeded(seed)).expect("valid shape")
}

pub fn bench_data(shape: &[usize], count: usize, seed: u64) -> (TensorGaussianParams, SampleSet) {
    let params = bench_params(shape, seed);
    let data = params.sample(count, seed ^ 0xBEEF).expect("valid params");
    (params, data)
}
