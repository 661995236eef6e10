//! Multivariate distribution: dense-oracle agreement, sampling moments and
//! fit round-trips.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use tengauss_core::estimation::fit;
use tengauss_core::multivariate::{
    multi_fit, random_multi_params, stack, MultiSampleSet, MultiTensorGaussianParams,
};
use tengauss_core::rng::seeded;
use tengauss_core::{inner, DenseTensor, SampleSet, TensorGaussianParams};
use tengauss_oracle::{dense_gaussian_logpdf, naive_kron_seq, naive_kron_vec_seq, MomentAccumulator};

/// Dense stacked mean/covariance assembled with the oracle's Kronecker
/// routines, independent of `assemble_mean`/`assemble_cov`.
fn oracle_assembly(params: &MultiTensorGaussianParams) -> (DVector<f64>, DMatrix<f64>) {
    let m = params.num_variates();
    let k = params.num_elements();
    let n_modes = params.order();
    let mut mean = DVector::<f64>::zeros(m * k);
    for i in 0..m {
        let descending: Vec<DVector<f64>> = (0..n_modes)
            .rev()
            .map(|n| params.mu(i, n).clone())
            .collect();
        let block = naive_kron_vec_seq(&descending) * params.alphas()[i];
        mean.rows_mut(i * k, k).copy_from(&block);
    }
    let mut cov = DMatrix::<f64>::zeros(m * k, m * k);
    for i in 0..m {
        for j in 0..m {
            let block = if params.is_undefined(i, j) {
                DMatrix::zeros(k, k)
            } else {
                let descending: Vec<DMatrix<f64>> = (0..n_modes)
                    .rev()
                    .map(|n| params.theta(n, i, j).unwrap().clone())
                    .collect();
                naive_kron_seq(&descending) * params.sigma()[(i, j)]
            };
            cov.view_mut((i * k, j * k), (k, k)).copy_from(&block);
        }
    }
    (mean, cov)
}

#[test]
fn joint_log_pdf_matches_the_dense_oracle() {
    let mut rng = seeded(641);
    let params = random_multi_params(2, &[2, 3], &mut rng).unwrap();
    let (mean, cov) = oracle_assembly(&params);
    let data = params.multi_sample(5, 11).unwrap();
    for t in 0..data.len() {
        let obs: Vec<DenseTensor> = (0..2).map(|i| data.variate(i).get(t).clone()).collect();
        let fast = params.joint_log_pdf(&obs).unwrap();
        let z = stack(&obs).unwrap();
        let dense = dense_gaussian_logpdf(&mean, &cov, &z);
        assert!((fast - dense).abs() <= 1e-8, "sample {t}: {fast} vs {dense}");
    }
}

#[test]
fn assembled_cov_matches_the_oracle_assembly() {
    let mut rng = seeded(642);
    let params = random_multi_params(3, &[2, 2], &mut rng).unwrap();
    let (_, cov_oracle) = oracle_assembly(&params);
    let cov = params.assemble_cov().unwrap();
    let err = (cov.matrix() - &cov_oracle).norm() / cov_oracle.norm();
    assert!(err <= 1e-12);
}

fn independent_pair(seed: u64) -> MultiTensorGaussianParams {
    let mut rng = seeded(seed);
    let a = TensorGaussianParams::random(&[2, 3], &mut rng).unwrap();
    let b = TensorGaussianParams::random(&[2, 3], &mut rng).unwrap();
    let mut undefined = BTreeSet::new();
    undefined.insert((0, 1));
    let mut sigma = DMatrix::<f64>::zeros(2, 2);
    sigma[(0, 0)] = a.sigma2();
    sigma[(1, 1)] = b.sigma2();
    let thetas = (0..2)
        .map(|n| {
            let dim = a.shape()[n];
            vec![
                vec![a.theta(n).clone(), DMatrix::zeros(dim, dim)],
                vec![DMatrix::zeros(dim, dim), b.theta(n).clone()],
            ]
        })
        .collect();
    MultiTensorGaussianParams::new(
        vec![2, 3],
        vec![a.alpha(), b.alpha()],
        vec![a.mus().to_vec(), b.mus().to_vec()],
        sigma,
        thetas,
        undefined,
    )
    .unwrap()
}

#[test]
fn diagonal_sigma_gives_independent_streams() {
    let params = independent_pair(643);
    let t = 100_000;
    let data = params.multi_sample(t, 4).unwrap();
    let k = params.num_elements();

    // empirical cross-covariance between the two vectorized variates
    let mut acc = MomentAccumulator::new(2 * k);
    for tt in 0..t {
        let z = stack(&[
            data.variate(0).get(tt).clone(),
            data.variate(1).get(tt).clone(),
        ])
        .unwrap();
        acc.push(&z);
    }
    let cov = acc.covariance();
    let cross = cov.view((0, k), (k, k)).norm();
    let var0 = cov.view((0, 0), (k, k)).norm();
    let var1 = cov.view((k, k), (k, k)).norm();
    assert!(cross <= 0.03 * (var0 * var1).sqrt(), "cross leakage {cross}");
}

#[test]
fn scaling_sigma_scales_the_sample_variance() {
    let mut rng = seeded(644);
    let params = random_multi_params(2, &[2, 2], &mut rng).unwrap();
    let doubled = MultiTensorGaussianParams::new(
        params.shape().to_vec(),
        params.alphas().to_vec(),
        params.mus().to_vec(),
        params.sigma() * 2.0,
        (0..params.order())
            .map(|n| {
                (0..2)
                    .map(|i| {
                        (0..2)
                            .map(|j| params.stored_block(n, i, j).clone())
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        params.undefined_pairs().clone(),
    )
    .unwrap();

    let t = 100_000;
    let variance_of = |p: &MultiTensorGaussianParams, seed: u64| -> f64 {
        let data = p.multi_sample(t, seed).unwrap();
        let mut total = 0.0;
        for i in 0..2 {
            let set = data.variate(i);
            let mean = tengauss_core::estimation::sample_mean(set);
            total += set
                .iter()
                .map(|x| x.sub(&mean).unwrap().frobenius_norm_sq())
                .sum::<f64>()
                / t as f64;
        }
        total
    };
    let base = variance_of(&params, 21);
    let double = variance_of(&doubled, 22);
    let ratio = double / base;
    assert!((ratio - 2.0).abs() <= 0.06, "variance ratio {ratio}");
}

#[test]
fn multi_fit_round_trip() {
    let mut rng = seeded(645);
    let truth = random_multi_params(2, &[2, 3], &mut rng).unwrap();
    let data = truth.multi_sample(5000, 33).unwrap();
    let fitted = multi_fit(&data, true).unwrap();

    for i in 0..2 {
        for j in 0..2 {
            let rel =
                (fitted.sigma()[(i, j)] / truth.sigma()[(i, j)] - 1.0).abs();
            assert!(rel <= 0.08, "sigma[{i}][{j}] relative error {rel}");
        }
    }
    for n in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let err =
                    (fitted.theta(n, i, j).unwrap() - truth.theta(n, i, j).unwrap()).norm();
                assert!(err <= 0.08, "theta[{n}][{i}][{j}] error {err}");
            }
        }
    }
    // estimated unit traces are exact
    for n in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                if let Some(theta) = fitted.theta(n, i, j) {
                    assert!((theta.trace() - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn multi_fit_reduces_to_the_univariate_fit() {
    let mut rng = seeded(646);
    let truth = TensorGaussianParams::random(&[2, 3], &mut rng).unwrap();
    let data = truth.sample(100, 5).unwrap();
    let uni = fit(&data, true).unwrap();
    let multi = multi_fit(&MultiSampleSet::new(vec![data]).unwrap(), true).unwrap();

    assert_eq!(multi.num_variates(), 1);
    assert!((multi.sigma()[(0, 0)] - uni.params.sigma2()).abs() <= 1e-14);
    assert!((multi.alphas()[0] - uni.params.alpha()).abs() <= 1e-14);
    for n in 0..2 {
        assert_eq!(multi.theta(n, 0, 0).unwrap(), uni.params.theta(n));
        assert_eq!(multi.mu(0, n), uni.params.mu(n));
    }
}

#[test]
fn exactly_orthogonal_residuals_flag_the_pair_undefined() {
    // residual streams with pattern (+,+,−,−) against (+,−,+,−): the cross
    // moments cancel exactly, σ̂₁₂ = 0
    let a = DenseTensor::new(vec![2], vec![1.0, 2.0]).unwrap();
    let b = DenseTensor::new(vec![2], vec![0.5, -1.5]).unwrap();
    let first = SampleSet::new(vec![a.clone(), a.clone(), a.scale(-1.0), a.scale(-1.0)]).unwrap();
    let second = SampleSet::new(vec![b.clone(), b.scale(-1.0), b.clone(), b.scale(-1.0)]).unwrap();
    let data = MultiSampleSet::new(vec![first, second]).unwrap();
    let fitted = multi_fit(&data, false).unwrap();
    assert!(fitted.is_undefined(0, 1));
    assert_eq!(fitted.sigma()[(0, 1)], 0.0);
    assert!(fitted.theta(0, 0, 1).is_none());
    // the stored raw cross-moment is exactly zero as well
    assert_eq!(fitted.cross_moment(0, 0, 1).norm(), 0.0);
    // diagonal blocks stay fully defined
    assert!(fitted.theta(0, 0, 0).is_some());
}

#[test]
fn expected_inner_product_is_representation_invariant() {
    let mut rng = seeded(647);
    let params = random_multi_params(2, &[2, 3], &mut rng).unwrap();
    let data = params.multi_sample(500, 9).unwrap();

    let from_tensors: f64 = (0..data.len())
        .map(|t| inner(data.variate(0).get(t), data.variate(1).get(t)).unwrap())
        .sum::<f64>()
        / data.len() as f64;
    let from_vectors: f64 = (0..data.len())
        .map(|t| {
            data.variate(0)
                .get(t)
                .vectorize()
                .dot(&data.variate(1).get(t).vectorize())
        })
        .sum::<f64>()
        / data.len() as f64;
    assert!((from_tensors - from_vectors).abs() <= 1e-12 * from_tensors.abs().max(1.0));
    for mode in 0..2 {
        let from_unfoldings: f64 = (0..data.len())
            .map(|t| {
                let a = data.variate(0).get(t).unfold(mode).unwrap();
                let b = data.variate(1).get(t).unfold(mode).unwrap();
                a.matrix().iter().zip(b.matrix().iter()).map(|(x, y)| x * y).sum::<f64>()
            })
            .sum::<f64>()
            / data.len() as f64;
        assert!(
            (from_tensors - from_unfoldings).abs() <= 1e-12 * from_tensors.abs().max(1.0),
            "mode {mode}"
        );
    }
}

#[test]
fn mode_n_stacked_cov_matches_empirical_moments() {
    let mut rng = seeded(648);
    let params = random_multi_params(2, &[2, 2], &mut rng).unwrap();
    let t = 100_000;
    let data = params.multi_sample(t, 71).unwrap();
    let means: Vec<DenseTensor> = (0..2)
        .map(|i| tengauss_core::estimation::sample_mean(data.variate(i)))
        .collect();
    for mode in 0..2 {
        let expected = params.mode_n_stacked_cov(mode).unwrap();
        let dim = params.shape()[mode];
        let mut empirical = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
        for tt in 0..t {
            let unfolds: Vec<DMatrix<f64>> = (0..2)
                .map(|i| {
                    data.variate(i)
                        .get(tt)
                        .sub(&means[i])
                        .unwrap()
                        .unfold(mode)
                        .unwrap()
                        .into_matrix()
                })
                .collect();
            for i in 0..2 {
                for j in 0..2 {
                    let block = &unfolds[i] * unfolds[j].transpose();
                    let mut view = empirical.view_mut((i * dim, j * dim), (dim, dim));
                    view += block;
                }
            }
        }
        empirical /= t as f64;
        let err = (&empirical - expected.matrix()).norm() / expected.matrix().norm();
        assert!(err <= 0.03, "mode {mode} stacked covariance error {err}");

        // partial trace recovers Σ exactly up to the unit-trace rounding
        let pt = tengauss_core::kernels::partial_trace(&expected).unwrap();
        assert!((&pt - params.sigma()).norm() <= 1e-12 * params.sigma().norm());
    }
}
