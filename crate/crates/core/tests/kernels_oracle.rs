//! The symmetric factorization kernels checked against independent
//! brute-force oracles (textbook Cholesky, Jacobi eigensolver, loop-based
//! Kronecker products).

use nalgebra::DMatrix;
use proptest::prelude::*;
use tengauss_core::kernels::{
    cholesky, kron, leading_singular_vector, logdet_spd, sym_eig,
};
use tengauss_oracle::{jacobi_sym_eig, naive_cholesky, naive_kron, naive_logdet};

/// Deterministic SPD test matrix of size `dim` derived from `seed`.
fn spd_matrix(dim: usize, seed: u64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |i, j| {
        ((seed as f64 + 1.0) * 0.7 + (i * dim + j) as f64 * 1.31).sin()
    });
    let mut a = &g * g.transpose();
    for d in 0..dim {
        a[(d, d)] += 0.5;
    }
    a
}

fn sym_matrix(dim: usize, seed: u64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |i, j| {
        ((seed as f64) * 0.3 + (i + 3 * j) as f64 * 0.83).cos()
    });
    (&g + g.transpose()) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cholesky_and_logdet_match_the_naive_oracle(dim in 1usize..=8, seed in 0u64..500) {
        let a = spd_matrix(dim, seed);
        let l = cholesky(&a).unwrap();
        let l_oracle = naive_cholesky(&a).unwrap();
        prop_assert!((l - &l_oracle).abs().max() <= 1e-10 * l_oracle.abs().max().max(1.0));

        let ld = logdet_spd(&a).unwrap();
        let ld_oracle = naive_logdet(&a).unwrap();
        prop_assert!((ld - ld_oracle).abs() <= 1e-10 * ld_oracle.abs().max(1.0));
    }

    #[test]
    fn sym_eig_matches_the_jacobi_oracle(dim in 1usize..=8, seed in 0u64..500) {
        let a = sym_matrix(dim, seed);
        let (values, vectors) = sym_eig(&a).unwrap();
        let (oracle_values, _) = jacobi_sym_eig(&a);
        for i in 0..dim {
            prop_assert!((values[i] - oracle_values[i]).abs() <= 1e-9 * oracle_values.amax().max(1.0));
        }
        // descending order and the eigen equation
        for i in 1..dim {
            prop_assert!(values[i] <= values[i - 1] + 1e-12);
        }
        for i in 0..dim {
            let residual = &a * vectors.column(i) - vectors.column(i) * values[i];
            prop_assert!(residual.amax() <= 1e-10 * a.abs().max().max(1.0));
        }
    }

    #[test]
    fn kron_mixed_product_property(seed in 0u64..500) {
        // (A⊗B)(C⊗D) = (AC)⊗(BD)
        let a = sym_matrix(2, seed);
        let b = sym_matrix(3, seed + 7);
        let c = sym_matrix(2, seed + 13);
        let d = sym_matrix(3, seed + 29);
        let lhs = kron(&a, &b) * kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        let scale = rhs.abs().max().max(1.0);
        prop_assert!((lhs - rhs).abs().max() <= 1e-12 * scale);
    }

    #[test]
    fn kron_trace_is_multiplicative(seed in 0u64..500) {
        let a = spd_matrix(2, seed);
        let b = spd_matrix(3, seed + 3);
        let c = spd_matrix(2, seed + 11);
        let assembled = kron(&kron(&a, &b), &c);
        let expected = a.trace() * b.trace() * c.trace();
        prop_assert!((assembled.trace() - expected).abs() <= 1e-11 * expected.abs().max(1.0));
    }

    #[test]
    fn kron_agrees_with_the_loop_oracle(seed in 0u64..500) {
        let a = sym_matrix(3, seed);
        let b = sym_matrix(2, seed + 17);
        prop_assert_eq!(kron(&a, &b), naive_kron(&a, &b));
    }
}

#[test]
fn leading_singular_vector_matches_full_svd_oracle() {
    for seed in 0..20u64 {
        let m = DMatrix::from_fn(3, 5, |i, j| ((seed + 1) as f64 * 0.9 + (i * 5 + j) as f64).sin());
        let (u, sigma) = leading_singular_vector(&m).unwrap();
        let (u_oracle, sigma_oracle, _) = tengauss_oracle::naive_leading_singular(&m);
        assert!((sigma - sigma_oracle).abs() <= 1e-10 * sigma_oracle.max(1.0));
        // up to sign
        let aligned = if u.dot(&u_oracle) < 0.0 { -&u } else { u.clone() };
        assert!((aligned - u_oracle).amax() <= 1e-8, "seed {seed}");
    }
}
