//! The identifiable tensor-valued Gaussian distribution.
//!
//! A random tensor `𝓧` of shape `I₁ × … × I_N` follows the distribution when
//! its vectorization is Gaussian with mean `α·(μ⁽ᴺ⁾⊗…⊗μ⁽¹⁾)` and covariance
//! `σ²·(Θ⁽ᴺ⁾⊗…⊗Θ⁽¹⁾)`, subject to `‖μ⁽ⁿ⁾‖ = 1` and `trace(Θ⁽ⁿ⁾) = 1` for
//! every mode. The constraints make the parametrization identifiable:
//! distinct parameter values generate distinct distributions, which is what
//! permits the closed-form maximum likelihood estimators in
//! [`crate::estimation`].
//!
//! `Θ⁽ⁿ⁾` acts as a covariance *density*: its `(i,j)` entry is the fraction
//! of the total variance `σ²` assigned to the covariance between elements
//! `i` and `j` of the mode-n fibers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernels::{self, SpdMatrix};
use crate::rng::sample_stream;
use crate::tensor::{fold_matrix, inner, outer_rank1, tensorize, DenseTensor};

/// Tolerance for the unit-norm and unit-trace constraints.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Parameter set `{α, μ⁽ⁿ⁾, σ², Θ⁽ⁿ⁾}` of the identifiable tensor Gaussian.
///
/// Construction checks structural consistency only (vector/matrix sizes
/// against the shape); the numeric constraints are checked by [`validate`],
/// which reports violations instead of failing, so invalid parameter values
/// can be represented and inspected. Operations that require validity
/// (density, sampling) reject invalid parameters.
///
/// [`validate`]: TensorGaussianParams::validate
#[derive(Debug, Clone)]
pub struct TensorGaussianParams {
    shape: Vec<usize>,
    alpha: f64,
    mus: Vec<DVector<f64>>,
    sigma2: f64,
    thetas: Vec<DMatrix<f64>>,
}

/// Outcome of [`TensorGaussianParams::validate`]: empty means all
/// constraints hold.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<ConstraintViolation>,
}

/// A single violated constraint together with the measured value.
#[derive(Debug, Clone)]
pub struct ConstraintViolation {
    pub constraint: String,
    pub measured: f64,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            let items: Vec<String> = self
                .violations
                .iter()
                .map(|v| format!("{} (measured {:.6e})", v.constraint, v.measured))
                .collect();
            write!(f, "{}", items.join("; "))
        }
    }
}

impl TensorGaussianParams {
    pub fn new(
        shape: Vec<usize>,
        alpha: f64,
        mus: Vec<DVector<f64>>,
        sigma2: f64,
        thetas: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::ShapeMismatch(format!("invalid shape {:?}", shape)));
        }
        if mus.len() != shape.len() || thetas.len() != shape.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} mean factors and {} covariance densities for an order-{} shape",
                mus.len(),
                thetas.len(),
                shape.len()
            )));
        }
        for (n, ((mu, theta), &dim)) in mus.iter().zip(&thetas).zip(&shape).enumerate() {
            if mu.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "mu[{}] has length {}, mode extent is {}",
                    n + 1,
                    mu.len(),
                    dim
                )));
            }
            if theta.nrows() != dim || theta.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "theta[{}] is {}x{}, mode extent is {}",
                    n + 1,
                    theta.nrows(),
                    theta.ncols(),
                    dim
                )));
            }
        }
        Ok(Self {
            shape,
            alpha,
            mus,
            sigma2,
            thetas,
        })
    }

    /// Canonical parameters: `μ⁽ⁿ⁾ = e₁` and `Θ⁽ⁿ⁾ = I/I_n` for every mode.
    pub fn canonical(shape: Vec<usize>, alpha: f64, sigma2: f64) -> Result<Self> {
        let mus = shape
            .iter()
            .map(|&dim| {
                let mut v = DVector::zeros(dim);
                v[0] = 1.0;
                v
            })
            .collect();
        let thetas = shape
            .iter()
            .map(|&dim| DMatrix::<f64>::identity(dim, dim) / dim as f64)
            .collect();
        Self::new(shape, alpha, mus, sigma2, thetas)
    }

    /// Draws a random valid parameter set; used by the Monte Carlo harness
    /// to fix ground truth from a seed.
    ///
    /// Mean factors are normalized Gaussian vectors regenerated until the
    /// largest-magnitude entry is separated enough (gap ≥ 0.1) that the sign
    /// convention stays stable under estimation noise. Covariance densities
    /// are trace-normalized Gram matrices with a ridge keeping the spectrum
    /// well conditioned.
    pub fn random<R: Rng>(shape: &[usize], rng: &mut R) -> Result<Self> {
        let mut mus = Vec::with_capacity(shape.len());
        let mut thetas = Vec::with_capacity(shape.len());
        for &dim in shape {
            let mut mu = DVector::zeros(dim);
            for _ in 0..100 {
                for v in mu.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let norm = mu.norm();
                if norm == 0.0 {
                    continue;
                }
                mu /= norm;
                kernels::fix_sign(&mut mu);
                if dim == 1 || sign_gap(&mu) >= 0.1 {
                    break;
                }
            }
            mus.push(mu);

            let g: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
            let mut a: DMatrix<f64> = &g * g.transpose();
            let ridge = 0.25 * a.trace() / dim as f64;
            for d in 0..dim {
                a[(d, d)] += ridge;
            }
            let trace = a.trace();
            thetas.push(a / trace);
        }
        let alpha = 1.5 + 2.5 * rng.random::<f64>();
        let sigma2 = 0.5 + 1.5 * rng.random::<f64>();
        Self::new(shape.to_vec(), alpha, mus, sigma2, thetas)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    /// Total number of tensor entries K.
    pub fn num_elements(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn mus(&self) -> &[DVector<f64>] {
        &self.mus
    }

    pub fn mu(&self, mode: usize) -> &DVector<f64> {
        &self.mus[mode]
    }

    pub fn thetas(&self) -> &[DMatrix<f64>] {
        &self.thetas
    }

    pub fn theta(&self, mode: usize) -> &DMatrix<f64> {
        &self.thetas[mode]
    }

    /// Checks every numeric constraint, reporting all violations with their
    /// measured values. Never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (n, mu) in self.mus.iter().enumerate() {
            let norm = mu.norm();
            if !((norm - 1.0).abs() <= CONSTRAINT_TOL) {
                report.violations.push(ConstraintViolation {
                    constraint: format!("unit norm of mu[{}]", n + 1),
                    measured: norm,
                });
            }
        }
        for (n, theta) in self.thetas.iter().enumerate() {
            let trace = theta.trace();
            if !((trace - 1.0).abs() <= CONSTRAINT_TOL) {
                report.violations.push(ConstraintViolation {
                    constraint: format!("unit trace of theta[{}]", n + 1),
                    measured: trace,
                });
            }
            match spd_defect(theta) {
                SpdDefect::None => {}
                SpdDefect::Asymmetric(asym) => report.violations.push(ConstraintViolation {
                    constraint: format!("symmetry of theta[{}]", n + 1),
                    measured: asym,
                }),
                SpdDefect::NotPositive(min_eig) => report.violations.push(ConstraintViolation {
                    constraint: format!("positive definiteness of theta[{}]", n + 1),
                    measured: min_eig,
                }),
            }
        }
        if !(self.sigma2 >= 0.0) {
            report.violations.push(ConstraintViolation {
                constraint: "nonnegative sigma2".into(),
                measured: self.sigma2,
            });
        }
        if !(self.alpha >= 0.0) {
            report.violations.push(ConstraintViolation {
                constraint: "nonnegative alpha".into(),
                measured: self.alpha,
            });
        }
        report
    }

    /// Errors with the full violation list unless all constraints hold.
    pub fn checked(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidParams(report.to_string()))
        }
    }

    /// The mean tensor `α · (μ⁽¹⁾∘…∘μ⁽ᴺ⁾)`.
    pub fn mean_tensor(&self) -> DenseTensor {
        outer_rank1(&self.mus)
            .expect("parameter structure is validated on construction")
            .scale(self.alpha)
    }

    /// Covariance between the entries at two multi-indices:
    /// `σ² · ∏ₙ Θ⁽ⁿ⁾[i_n, j_n]`.
    pub fn element_cov(&self, idx_i: &[usize], idx_j: &[usize]) -> Result<f64> {
        for (name, idx) in [("first", idx_i), ("second", idx_j)] {
            if idx.len() != self.order() {
                return Err(Error::ShapeMismatch(format!(
                    "{name} index has length {}, tensor order is {}",
                    idx.len(),
                    self.order()
                )));
            }
            for (n, (&i, &dim)) in idx.iter().zip(&self.shape).enumerate() {
                if i >= dim {
                    return Err(Error::ShapeMismatch(format!(
                        "{name} index {} out of range for mode {} of extent {}",
                        i, n, dim
                    )));
                }
            }
        }
        let mut cov = self.sigma2;
        for (n, theta) in self.thetas.iter().enumerate() {
            cov *= theta[(idx_i[n], idx_j[n])];
        }
        Ok(cov)
    }

    /// Mode-n fiber covariance `σ²·Θ⁽ⁿ⁾`.
    pub fn mode_n_cov(&self, mode: usize) -> Result<SpdMatrix> {
        self.checked()?;
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        if self.sigma2 == 0.0 {
            return Err(Error::DegenerateDistribution(
                "mode covariance of a point mass (sigma2 = 0)".into(),
            ));
        }
        SpdMatrix::new(&self.thetas[mode] * self.sigma2)
    }

    pub(crate) fn theta_factors(&self) -> Result<Vec<SpdMatrix>> {
        self.thetas.iter().map(|t| SpdMatrix::new(t.clone())).collect()
    }

    /// Exact log-density at `x`, exploiting separability:
    ///
    /// `−(K/2)·ln(2πσ²) − Σₙ (K/(2Iₙ))·ln det(Θ⁽ⁿ⁾) − (1/2σ²)·⟨S̃, S⟩`
    ///
    /// with `S = x − mean` and `S̃ = S ×₁ Θ⁽¹⁾⁻¹ … ×_N Θ⁽ᴺ⁾⁻¹`. The K×K
    /// covariance is never assembled and the Θ inverses are applied as
    /// per-mode Cholesky solves.
    pub fn log_pdf(&self, x: &DenseTensor) -> Result<f64> {
        self.checked()?;
        let factors = self.theta_factors()?;
        self.log_pdf_prepared(&factors, x)
    }

    pub(crate) fn log_pdf_prepared(
        &self,
        factors: &[SpdMatrix],
        x: &DenseTensor,
    ) -> Result<f64> {
        if x.shape() != self.shape.as_slice() {
            return Err(Error::ShapeMismatch(format!(
                "observation shape {:?} does not match parameter shape {:?}",
                x.shape(),
                self.shape
            )));
        }
        if self.sigma2 == 0.0 {
            return Err(Error::DegenerateDistribution(
                "log-density of a point mass (sigma2 = 0)".into(),
            ));
        }
        let k = self.num_elements() as f64;
        let mut value = -0.5 * k * (2.0 * std::f64::consts::PI * self.sigma2).ln();
        for (&dim, factor) in self.shape.iter().zip(factors) {
            value -= 0.5 * k / dim as f64 * factor.logdet();
        }
        let centered = x.sub(&self.mean_tensor())?;
        let mut whitened = centered.clone();
        for (mode, factor) in factors.iter().enumerate() {
            let unfolded = whitened.unfold(mode)?;
            let solved = factor.solve(unfolded.matrix())?;
            whitened = fold_matrix(&solved, mode, whitened.shape())?;
        }
        value -= 0.5 / self.sigma2 * inner(&whitened, &centered)?;
        Ok(value)
    }

    /// Draws `count` samples, reproducibly in `seed`.
    ///
    /// Each sample is `mean + σ·(W ×₁ L⁽¹⁾ … ×_N L⁽ᴺ⁾)` where `W` is a
    /// white-noise tensor and `L⁽ⁿ⁾` the Cholesky factor of `Θ⁽ⁿ⁾`; the
    /// Kronecker square root is never assembled. Sample `t` uses its own
    /// generator stream, so batches can be produced in parallel without
    /// changing the output.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleSet> {
        self.checked()?;
        if count == 0 {
            return Err(Error::EmptyInput("requested zero samples".into()));
        }
        let mean = self.mean_tensor();
        if self.sigma2 == 0.0 {
            return SampleSet::new(vec![mean; count]);
        }
        let factors: Vec<DMatrix<f64>> = self
            .theta_factors()?
            .into_iter()
            .map(|f| f.chol_lower().clone())
            .collect();
        let sigma = self.sigma2.sqrt();
        let k = self.num_elements();
        let mut samples = Vec::with_capacity(count);
        for t in 0..count {
            let mut rng = sample_stream(seed, t as u64);
            let white: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            let mut noise = tensorize(&white, &self.shape)?;
            for (mode, l) in factors.iter().enumerate() {
                noise = noise.mode_n_product(l, mode)?;
            }
            samples.push(mean.add(&noise.scale(sigma))?);
        }
        SampleSet::new(samples)
    }
}

enum SpdDefect {
    None,
    Asymmetric(f64),
    NotPositive(f64),
}

fn spd_defect(m: &DMatrix<f64>) -> SpdDefect {
    if !m.is_square() {
        return SpdDefect::Asymmetric(f64::INFINITY);
    }
    let asym = kernels::max_asymmetry(m);
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if asym > 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return SpdDefect::Asymmetric(asym);
    }
    if kernels::cholesky(m).is_ok() {
        SpdDefect::None
    } else {
        // report the smallest eigenvalue as the measured defect
        let min_eig = kernels::sym_eig(m)
            .map(|(vals, _)| vals[vals.len() - 1])
            .unwrap_or(f64::NAN);
        SpdDefect::NotPositive(min_eig)
    }
}

/// Gap between the largest and second-largest entry magnitudes.
fn sign_gap(v: &DVector<f64>) -> f64 {
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for &x in v.iter() {
        let a = x.abs();
        if a > first {
            second = first;
            first = a;
        } else if a > second {
            second = a;
        }
    }
    first - second
}

/// T samples of a common shape.
#[derive(Debug, Clone)]
pub struct SampleSet {
    shape: Vec<usize>,
    samples: Vec<DenseTensor>,
}

impl SampleSet {
    pub fn new(samples: Vec<DenseTensor>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::EmptyInput("sample set must be nonempty".into()))?;
        let shape = first.shape().to_vec();
        for (t, s) in samples.iter().enumerate() {
            if s.shape() != shape.as_slice() {
                return Err(Error::ShapeMismatch(format!(
                    "sample {} has shape {:?}, expected {:?}",
                    t,
                    s.shape(),
                    shape
                )));
            }
        }
        Ok(Self { shape, samples })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Sample count T.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[DenseTensor] {
        &self.samples
    }

    pub fn get(&self, t: usize) -> &DenseTensor {
        &self.samples[t]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DenseTensor> {
        self.samples.iter()
    }
}

/// Distinct-parameter counts of the unstructured multivariate Gaussian
/// versus the tensor model, for a given shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamCounts {
    /// `½(K² + K) + K`: unstructured covariance plus mean.
    pub eta_multi: u128,
    /// `Σ I_n + ½ Σ (I_n² + I_n)`: separable mean plus covariance factors.
    pub eta_tensor: u128,
}

impl ParamCounts {
    pub fn ratio(&self) -> f64 {
        self.eta_tensor as f64 / self.eta_multi as f64
    }
}

/// Parameter counts for the full versus the Kronecker-separable model.
pub fn param_counts(shape: &[usize]) -> ParamCounts {
    let k: u128 = shape.iter().map(|&d| d as u128).product();
    let eta_multi = (k * k + k) / 2 + k;
    let sum_i: u128 = shape.iter().map(|&d| d as u128).sum();
    let sum_sq: u128 = shape.iter().map(|&d| (d as u128) * (d as u128)).sum();
    let eta_tensor = sum_i + (sum_sq + sum_i) / 2;
    ParamCounts {
        eta_multi,
        eta_tensor,
    }
}

/// Mean-only parameter counts: the K entries of an unstructured mean tensor
/// versus the `1 + Σ I_n` values of its rank-1 representation.
pub fn mean_param_counts(shape: &[usize]) -> (u128, u128) {
    let k: u128 = shape.iter().map(|&d| d as u128).product();
    let rank1: u128 = 1 + shape.iter().map(|&d| d as u128).sum::<u128>();
    (k, rank1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn canonical_params_validate() {
        let params = TensorGaussianParams::canonical(vec![2, 3, 4], 1.0, 1.0).unwrap();
        assert!(params.validate().is_ok());
    }

    #[test]
    fn trace_violation_is_reported() {
        let mut params = TensorGaussianParams::canonical(vec![2, 2], 1.0, 1.0).unwrap();
        params.thetas[0] = DMatrix::<f64>::identity(2, 2); // trace 2
        let report = params.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].constraint.contains("unit trace of theta[1]"));
        assert_relative_eq!(report.violations[0].measured, 2.0);
    }

    #[test]
    fn spd_violation_reports_eigenvalue() {
        let mut params = TensorGaussianParams::canonical(vec![2, 2], 1.0, 1.0).unwrap();
        // trace 1 but indefinite: eigenvalues 1.1 and -0.1
        params.thetas[0] = DMatrix::from_row_slice(2, 2, &[0.5, 0.6, 0.6, 0.5]);
        let report = params.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0]
            .constraint
            .contains("positive definiteness of theta[1]"));
        assert_relative_eq!(report.violations[0].measured, -0.1, epsilon = 1e-12);
    }

    #[test]
    fn mean_tensor_cases() {
        let zero_mean = TensorGaussianParams::canonical(vec![2, 3], 0.0, 1.0).unwrap();
        assert!(zero_mean.mean_tensor().data().iter().all(|&v| v == 0.0));

        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        let mu = DVector::from_column_slice(&[inv_sqrt2, inv_sqrt2]);
        let params = TensorGaussianParams::new(
            vec![2, 2],
            2.0,
            vec![mu.clone(), mu],
            1.0,
            vec![
                DMatrix::<f64>::identity(2, 2) / 2.0,
                DMatrix::<f64>::identity(2, 2) / 2.0,
            ],
        )
        .unwrap();
        let mean = params.mean_tensor();
        for v in mean.data() {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn element_cov_diagonal_and_degenerate() {
        let params = TensorGaussianParams::canonical(vec![2, 3, 4], 1.0, 2.0).unwrap();
        let k = 24.0;
        assert_relative_eq!(
            params.element_cov(&[1, 2, 3], &[1, 2, 3]).unwrap(),
            2.0 / k,
            epsilon = 1e-14
        );

        let degenerate = TensorGaussianParams::canonical(vec![2, 2], 1.0, 0.0).unwrap();
        assert_eq!(degenerate.element_cov(&[0, 0], &[1, 1]).unwrap(), 0.0);

        assert!(params.element_cov(&[2, 0, 0], &[0, 0, 0]).is_err());
    }

    #[test]
    fn mode_n_cov_has_unit_trace_times_sigma2() {
        let mut rng = crate::rng::seeded(11);
        let params = TensorGaussianParams::random(&[2, 3], &mut rng).unwrap();
        for n in 0..2 {
            let cov = params.mode_n_cov(n).unwrap();
            assert_relative_eq!(cov.matrix().trace(), params.sigma2(), epsilon = 1e-12);
        }
        let canonical = TensorGaussianParams::canonical(vec![4], 0.0, 1.0).unwrap();
        let cov = canonical.mode_n_cov(0).unwrap();
        assert_relative_eq!(
            cov.matrix(),
            &(DMatrix::<f64>::identity(4, 4) / 4.0),
            epsilon = 1e-14
        );
    }

    #[test]
    fn log_pdf_standard_normal_scalar() {
        let params = TensorGaussianParams::canonical(vec![1], 0.0, 1.0).unwrap();
        let x = DenseTensor::zeros(vec![1]).unwrap();
        let expected = -0.5 * (2.0 * std::f64::consts::PI).ln();
        assert_relative_eq!(params.log_pdf(&x).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn log_pdf_peaks_at_the_mean() {
        let mut rng = crate::rng::seeded(5);
        let params = TensorGaussianParams::random(&[2, 3], &mut rng).unwrap();
        let mean = params.mean_tensor();
        let at_mean = params.log_pdf(&mean).unwrap();
        for trial in 0..20 {
            let perturbation = DenseTensor::from_fn(vec![2, 3], |idx| {
                ((idx[0] + 2 * idx[1] + trial) as f64 * 0.7).sin() * 0.3
            })
            .unwrap();
            let shifted = mean.add(&perturbation).unwrap();
            assert!(params.log_pdf(&shifted).unwrap() < at_mean);
        }
    }

    #[test]
    fn log_pdf_rejects_degenerate_and_mismatched() {
        let params = TensorGaussianParams::canonical(vec![2, 2], 1.0, 0.0).unwrap();
        let x = DenseTensor::zeros(vec![2, 2]).unwrap();
        assert!(matches!(
            params.log_pdf(&x),
            Err(Error::DegenerateDistribution(_))
        ));

        let ok = TensorGaussianParams::canonical(vec![2, 2], 1.0, 1.0).unwrap();
        let bad = DenseTensor::zeros(vec![4]).unwrap();
        assert!(matches!(ok.log_pdf(&bad), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn sampling_point_mass_returns_the_mean() {
        let params = TensorGaussianParams::canonical(vec![2, 3], 1.5, 0.0).unwrap();
        let set = params.sample(3, 42).unwrap();
        let mean = params.mean_tensor();
        for s in set.iter() {
            assert_eq!(s, &mean);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let params = TensorGaussianParams::canonical(vec![2, 2], 1.0, 1.0).unwrap();
        let a = params.sample(4, 7).unwrap();
        let b = params.sample(4, 7).unwrap();
        let c = params.sample(4, 8).unwrap();
        for t in 0..4 {
            assert_eq!(a.get(t), b.get(t));
        }
        assert_ne!(a.get(0), c.get(0));
    }

    #[test]
    fn param_count_example_and_reductions() {
        let counts = param_counts(&[2, 2, 2]);
        assert_eq!(counts.eta_multi, 44);
        assert_eq!(counts.eta_tensor, 15);
        assert_relative_eq!(counts.ratio(), 15.0 / 44.0, epsilon = 1e-15);

        // order-1: no structure to exploit
        let flat = param_counts(&[7]);
        assert_eq!(flat.eta_multi, flat.eta_tensor);
        assert_relative_eq!(flat.ratio(), 1.0);

        let (full, rank1) = mean_param_counts(&[721, 1440, 20]);
        assert_eq!(full, 20_764_800);
        assert_eq!(rank1, 2_182);
    }

    #[test]
    fn param_ratio_decreases_with_order() {
        for i in 2..=10usize {
            let mut prev = f64::INFINITY;
            for n in 1..=8usize {
                let ratio = param_counts(&vec![i; n]).ratio();
                assert!(ratio < prev, "ratio not decreasing at I={i}, N={n}");
                prev = ratio;
            }
        }
    }

    #[test]
    fn sample_set_rejects_empty_and_mixed_shapes() {
        assert!(SampleSet::new(vec![]).is_err());
        let a = DenseTensor::zeros(vec![2, 2]).unwrap();
        let b = DenseTensor::zeros(vec![4]).unwrap();
        assert!(SampleSet::new(vec![a, b]).is_err());
    }
}
