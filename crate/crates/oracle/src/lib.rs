//! Brute-force reference implementations for test verification.
//!
//! Everything here is deliberately naive and independent of the main
//! crates' code paths: textbook Cholesky elimination, a classical Jacobi
//! eigensolver, loop-based Kronecker products and a dense Gaussian
//! log-density assembled from them. Test suites compare the optimized
//! implementations against these.

use nalgebra::{DMatrix, DVector};

/// Textbook Cholesky elimination (lower factor). Returns `None` on a
/// non-positive pivot.
pub fn naive_cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square input required");
    let mut l = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// `ln det` via [`naive_cholesky`].
pub fn naive_logdet(a: &DMatrix<f64>) -> Option<f64> {
    let l = naive_cholesky(a)?;
    Some(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Forward/back substitution solve of `A x = b` through the naive factor.
pub fn naive_spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let l = naive_cholesky(a)?;
    let n = a.nrows();
    let mut y = DVector::<f64>::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = DVector::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    Some(x)
}

/// Classical Jacobi eigensolver for symmetric matrices; eigenvalues sorted
/// descending, eigenvectors as columns.
pub fn jacobi_sym_eig(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square input required");
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let values = DVector::from_fn(n, |i, _| m[(order[i], order[i])]);
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    (values, vectors)
}

/// Leading singular triple `(u, σ, v)` via the Jacobi eigensolver applied
/// to `MᵀM` (the route the main crate does *not* take).
pub fn naive_leading_singular(m: &DMatrix<f64>) -> (DVector<f64>, f64, DVector<f64>) {
    let gram = m.transpose() * m;
    let (values, vectors) = jacobi_sym_eig(&gram);
    let sigma = values[0].max(0.0).sqrt();
    let v = vectors.column(0).clone_owned();
    let u = if sigma > 0.0 {
        (m * &v) / sigma
    } else {
        DVector::zeros(m.nrows())
    };
    (u, sigma, v)
}

/// Loop-based Kronecker product.
pub fn naive_kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::<f64>::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Left fold of [`naive_kron`].
pub fn naive_kron_seq(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = naive_kron(&acc, m);
    }
    acc
}

/// Kronecker product of column vectors.
pub fn naive_kron_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::<f64>::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

pub fn naive_kron_vec_seq(vecs: &[DVector<f64>]) -> DVector<f64> {
    let mut acc = vecs[0].clone();
    for v in &vecs[1..] {
        acc = naive_kron_vec(&acc, v);
    }
    acc
}

/// Dense multivariate Gaussian log-density
/// `−(n/2)·ln 2π − ½·ln det Σ − ½·(x−m)ᵀΣ⁻¹(x−m)` computed entirely with
/// the naive routines above. Panics if `cov` is not positive definite.
pub fn dense_gaussian_logpdf(mean: &DVector<f64>, cov: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    let n = mean.len() as f64;
    let logdet = naive_logdet(cov).expect("oracle covariance must be SPD");
    let residual = x - mean;
    let solved = naive_spd_solve(cov, &residual).expect("oracle covariance must be SPD");
    -0.5 * n * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet - 0.5 * residual.dot(&solved)
}

/// Online mean/covariance accumulator for empirical moment checks.
pub struct MomentAccumulator {
    count: usize,
    sum: DVector<f64>,
    sum_outer: DMatrix<f64>,
}

impl MomentAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            sum: DVector::zeros(dim),
            sum_outer: DMatrix::zeros(dim, dim),
        }
    }

    pub fn push(&mut self, x: &DVector<f64>) {
        self.count += 1;
        self.sum += x;
        self.sum_outer += x * x.transpose();
    }

    pub fn mean(&self) -> DVector<f64> {
        &self.sum / self.count as f64
    }

    /// Population (1/T) covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        &self.sum_outer / self.count as f64 - &mean * mean.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_agrees_with_hand_example() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]);
        let l = naive_cholesky(&a).unwrap();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((l[(1, 0)] - 1.0).abs() < 1e-14);
        assert!((l[(1, 1)] - 2.0).abs() < 1e-14);
        assert!(naive_cholesky(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_none());
    }

    #[test]
    fn jacobi_solves_a_known_spectrum() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (values, vectors) = jacobi_sym_eig(&a);
        assert!((values[0] - 3.0).abs() < 1e-12);
        assert!((values[1] - 1.0).abs() < 1e-12);
        let residual = &a * vectors.column(0) - vectors.column(0) * values[0];
        assert!(residual.amax() < 1e-12);
    }

    #[test]
    fn spd_solve_inverts() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let b = DVector::from_column_slice(&[1.0, -2.0, 0.7]);
        let x = naive_spd_solve(&a, &b).unwrap();
        assert!((&a * x - b).amax() < 1e-12);
    }

    #[test]
    fn gaussian_logpdf_standard_normal() {
        let mean = DVector::zeros(1);
        let cov = DMatrix::identity(1, 1);
        let x = DVector::zeros(1);
        let expected = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((dense_gaussian_logpdf(&mean, &cov, &x) - expected).abs() < 1e-14);
    }
}
