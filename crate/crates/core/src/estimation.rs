//! Closed-form maximum likelihood estimation.
//!
//! For T samples the estimators are fully explicit:
//! - the mean parameters `(α, μ⁽ⁿ⁾)` come from the rank-1 canonical polyadic
//!   decomposition of the sample mean, evaluated via the multilinear SVD;
//! - `σ̂² = (1/T)·Σₜ‖S(t)‖²_F` over the centered tensors `S(t)`;
//! - `Θ̂⁽ⁿ⁾ = (1/(T·σ̂²)) Σₜ S₍ₙ₎(t)·S₍ₙ₎(t)ᵀ`, which has unit trace exactly.
//!
//! The legacy flip-flop iteration over unconstrained factors `R⁽ⁿ⁾` is kept
//! as a comparison baseline; it identifies only the composition
//! `R⁽ᴺ⁾⊗…⊗R⁽¹⁾`, not the factors themselves.

use nalgebra::{DMatrix, DVector};

use crate::distribution::{SampleSet, TensorGaussianParams};
use crate::error::{Error, Result};
use crate::kernels::{leading_singular_vector, SpdMatrix};
use crate::tensor::{fold_matrix, outer_rank1, DenseTensor};

/// Fraction of the mean-square data scale below which the residual variance
/// is treated as zero (a point mass). Covers exact duplicates up to the
/// rounding left by rank-1 mean reconstruction.
const DEGENERACY_CUTOFF: f64 = 1e-24;

/// Unconstrained mean/covariance factors produced by the flip-flop baseline.
///
/// The factors are only identified up to reciprocal rescaling; downstream
/// comparisons must use the assembled composition.
#[derive(Debug, Clone)]
pub struct LegacyKroneckerParams {
    pub mean: DenseTensor,
    /// Per-mode covariance factors R⁽ⁿ⁾ (unconstrained scale).
    pub covs: Vec<DMatrix<f64>>,
}

/// Result of [`fit`].
#[derive(Debug, Clone)]
pub struct EstimationReport {
    /// Estimated parameters. When `degenerate` is set, `sigma2` is zero and
    /// the covariance densities are canonical placeholders (`I/I_n`).
    pub params: TensorGaussianParams,
    /// The samples carried no residual variance (point mass); Θ̂ undefined.
    pub degenerate: bool,
    pub bessel_applied: bool,
    /// Sample count T.
    pub sample_count: usize,
    /// Whether T clears the uniqueness threshold `T > max_n(I_n²/K)`.
    pub identifiable: bool,
    /// `‖α̂·outer(μ̂)‖²_F / ‖sample mean‖²_F` — fraction of the sample-mean
    /// energy captured by its rank-1 representation.
    pub rank1_explained_variance: f64,
}

/// Arithmetic mean `(1/T)·Σₜ 𝓧(t)`.
pub fn sample_mean(data: &SampleSet) -> DenseTensor {
    let mut acc = DenseTensor::zeros(data.shape().to_vec()).expect("sample sets have valid shapes");
    for x in data.iter() {
        acc.axpy(1.0, x).expect("uniform shapes");
    }
    acc.scale(1.0 / data.len() as f64)
}

/// Best rank-1 canonical polyadic decomposition of a rank-1 tensor, via the
/// multilinear SVD: `μ⁽ⁿ⁾` is the leading left singular vector of the mode-n
/// unfolding and `α` the magnitude of the core `M ×₁ μ⁽¹⁾ᵀ … ×_N μ⁽ᴺ⁾ᵀ`.
///
/// Signs follow the convention of [`crate::kernels::sym_eig`]; a negative
/// core is absorbed by negating `μ⁽¹⁾`. For input of higher rank the result
/// is the multilinear-SVD rank-1 truncation.
pub fn rank1_cpd(m: &DenseTensor) -> Result<(f64, Vec<DVector<f64>>)> {
    if m.data().iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInput(
            "rank-1 decomposition of a zero tensor".into(),
        ));
    }
    let mut mus = Vec::with_capacity(m.order());
    for mode in 0..m.order() {
        let unfolded = m.unfold(mode)?;
        let (u, _) = leading_singular_vector(unfolded.matrix())?;
        mus.push(u);
    }
    let projections: Vec<DMatrix<f64>> = mus
        .iter()
        .map(|u| DMatrix::from_row_slice(1, u.len(), u.as_slice()))
        .collect();
    let refs: Vec<Option<&DMatrix<f64>>> = projections.iter().map(Some).collect();
    let core = m.multi_mode_product(&refs)?.data()[0];
    if core < 0.0 {
        mus[0].neg_mut();
    }
    Ok((core.abs(), mus))
}

/// ML uniqueness condition for the covariance densities:
/// `T > max_n(I_n² / K)`. Evaluated exactly in integer arithmetic; the
/// boundary is strict.
pub fn identifiability_check(shape: &[usize], t: usize) -> bool {
    let k: u128 = shape.iter().map(|&d| d as u128).product();
    let max_sq = shape
        .iter()
        .map(|&d| (d as u128) * (d as u128))
        .max()
        .unwrap_or(0);
    (t as u128) * k > max_sq
}

/// Closed-form ML fit of the identifiable parameters.
///
/// Bessel's correction (`T/(T−1)`) is applied to `σ̂²` only; `Θ̂⁽ⁿ⁾` always
/// uses the uncorrected value in its denominator so the unit-trace identity
/// holds exactly. An identifiability violation is flagged, not fatal: the
/// estimators remain computable and rank deficiency surfaces in later SPD
/// checks.
pub fn fit(data: &SampleSet, bessel: bool) -> Result<EstimationReport> {
    let t = data.len();
    let shape = data.shape().to_vec();
    let mean = sample_mean(data);
    let mean_energy = mean.frobenius_norm_sq();

    let (alpha, mus, explained) = if mean_energy == 0.0 {
        let mus: Vec<DVector<f64>> = shape
            .iter()
            .map(|&dim| {
                let mut v = DVector::zeros(dim);
                v[0] = 1.0;
                v
            })
            .collect();
        // a zero mean is reconstructed exactly by the zero rank-1 tensor
        (0.0, mus, 1.0)
    } else {
        let (alpha, mus) = rank1_cpd(&mean)?;
        (alpha, mus, alpha * alpha / mean_energy)
    };

    let rank1_mean = outer_rank1(&mus)?.scale(alpha);
    let centered: Vec<DenseTensor> = data
        .iter()
        .map(|x| x.sub(&rank1_mean))
        .collect::<Result<_>>()?;

    let second_moment: f64 =
        data.iter().map(DenseTensor::frobenius_norm_sq).sum::<f64>() / t as f64;
    let sigma2_raw: f64 =
        centered.iter().map(DenseTensor::frobenius_norm_sq).sum::<f64>() / t as f64;
    let identifiable = identifiability_check(&shape, t);

    if sigma2_raw <= DEGENERACY_CUTOFF * second_moment {
        let params = TensorGaussianParams::new(
            shape.clone(),
            alpha,
            mus,
            0.0,
            shape
                .iter()
                .map(|&dim| DMatrix::<f64>::identity(dim, dim) / dim as f64)
                .collect(),
        )?;
        return Ok(EstimationReport {
            params,
            degenerate: true,
            bessel_applied: false,
            sample_count: t,
            identifiable,
            rank1_explained_variance: explained,
        });
    }

    let mut thetas = Vec::with_capacity(shape.len());
    for mode in 0..shape.len() {
        let dim = shape[mode];
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        for s in &centered {
            let unfolded = s.unfold(mode)?;
            acc += unfolded.matrix() * unfolded.matrix().transpose();
        }
        thetas.push(acc / (t as f64 * sigma2_raw));
    }

    let apply_bessel = bessel && t > 1;
    let sigma2 = if apply_bessel {
        sigma2_raw * t as f64 / (t as f64 - 1.0)
    } else {
        sigma2_raw
    };

    Ok(EstimationReport {
        params: TensorGaussianParams::new(shape, alpha, mus, sigma2, thetas)?,
        degenerate: false,
        bessel_applied: apply_bessel,
        sample_count: t,
        identifiable,
        rank1_explained_variance: explained,
    })
}

/// Legacy flip-flop estimator with the default initialization
/// `R⁽ⁿ⁾ = I/I_n`, cycling modes 1..N.
pub fn flip_flop_fit(
    data: &SampleSet,
    max_iters: usize,
    tol: f64,
) -> Result<LegacyKroneckerParams> {
    let init = data
        .shape()
        .iter()
        .map(|&dim| DMatrix::<f64>::identity(dim, dim) / dim as f64)
        .collect();
    flip_flop_fit_from(data, init, max_iters, tol)
}

/// Flip-flop iteration from an explicit initialization.
///
/// Each update is
/// `R⁽ⁿ⁾ ← (I_n/(T·K))·Σₜ S₍ₙ₎(t)·(⊗_{i≠n} R⁽ⁱ⁾⁻¹)·S₍ₙ₎(t)ᵀ`,
/// applied via mode-wise Cholesky solves (no Kronecker assembly), sweeping
/// modes in order with the latest factors. Convergence is declared when the
/// relative Frobenius change of the assembled composition between sweeps
/// drops below `tol`; the change is evaluated through per-factor inner
/// products, again without assembling the composition.
pub fn flip_flop_fit_from(
    data: &SampleSet,
    init: Vec<DMatrix<f64>>,
    max_iters: usize,
    tol: f64,
) -> Result<LegacyKroneckerParams> {
    let shape = data.shape().to_vec();
    let n_modes = shape.len();
    let t = data.len();
    let k: usize = shape.iter().product();
    if init.len() != n_modes {
        return Err(Error::DimensionMismatch(format!(
            "{} initial factors for an order-{} tensor",
            init.len(),
            n_modes
        )));
    }
    for (n, (r, &dim)) in init.iter().zip(&shape).enumerate() {
        if r.nrows() != dim || r.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "initial factor {} is {}x{}, mode extent is {}",
                n,
                r.nrows(),
                r.ncols(),
                dim
            )));
        }
    }

    let mean = sample_mean(data);
    let centered: Vec<DenseTensor> = data
        .iter()
        .map(|x| x.sub(&mean))
        .collect::<Result<_>>()?;

    let mut covs = init;
    let scale = 1.0 / (t as f64 * k as f64);
    for _sweep in 0..max_iters {
        let previous = covs.clone();
        for mode in 0..n_modes {
            let mut factors: Vec<Option<SpdMatrix>> = Vec::with_capacity(n_modes);
            for (i, r) in covs.iter().enumerate() {
                factors.push(if i == mode {
                    None
                } else {
                    Some(SpdMatrix::new(r.clone())?)
                });
            }
            let dim = shape[mode];
            let mut acc = DMatrix::<f64>::zeros(dim, dim);
            for s in &centered {
                let mut weighted = s.clone();
                for (i, factor) in factors.iter().enumerate() {
                    if let Some(f) = factor {
                        let unfolded = weighted.unfold(i)?;
                        let solved = f.solve(unfolded.matrix())?;
                        weighted = fold_matrix(&solved, i, weighted.shape())?;
                    }
                }
                let wn = weighted.unfold(mode)?;
                let sn = s.unfold(mode)?;
                acc += wn.matrix() * sn.matrix().transpose();
            }
            let r = acc * (dim as f64 * scale);
            covs[mode] = (&r + r.transpose()) * 0.5;
        }
        if composition_rel_change(&covs, &previous) < tol {
            break;
        }
    }

    Ok(LegacyKroneckerParams { mean, covs })
}

/// Relative Frobenius distance between two Kronecker compositions, computed
/// from the factors: `‖⊗A − ⊗B‖² = ∏‖Aₙ‖² + ∏‖Bₙ‖² − 2·∏⟨Aₙ,Bₙ⟩`.
fn composition_rel_change(current: &[DMatrix<f64>], previous: &[DMatrix<f64>]) -> f64 {
    let mut cur_sq = 1.0;
    let mut prev_sq = 1.0;
    let mut cross = 1.0;
    for (a, b) in current.iter().zip(previous) {
        cur_sq *= a.norm_squared();
        prev_sq *= b.norm_squared();
        cross *= a.dot(b);
    }
    let dist_sq = (cur_sq + prev_sq - 2.0 * cross).max(0.0);
    (dist_sq / prev_sq.max(f64::MIN_POSITIVE)).sqrt()
}

/// Joint log-likelihood `Σₜ ln p(𝓧(t))` under identifiable parameters.
pub fn log_likelihood(params: &TensorGaussianParams, data: &SampleSet) -> Result<f64> {
    params.checked()?;
    let factors = params.theta_factors()?;
    let mut total = 0.0;
    for x in data.iter() {
        total += params.log_pdf_prepared(&factors, x)?;
    }
    Ok(total)
}

/// Joint log-likelihood under legacy factors: the Gaussian with mean `𝓜`
/// and covariance `R⁽ᴺ⁾⊗…⊗R⁽¹⁾`, evaluated separably.
pub fn legacy_log_likelihood(params: &LegacyKroneckerParams, data: &SampleSet) -> Result<f64> {
    let shape = params.mean.shape();
    if data.shape() != shape {
        return Err(Error::ShapeMismatch(format!(
            "data shape {:?} does not match mean shape {:?}",
            data.shape(),
            shape
        )));
    }
    let k: usize = shape.iter().product();
    let factors: Vec<SpdMatrix> = params
        .covs
        .iter()
        .map(|r| SpdMatrix::new(r.clone()))
        .collect::<Result<_>>()?;
    let mut log_norm = -0.5 * k as f64 * (2.0 * std::f64::consts::PI).ln();
    for (&dim, factor) in shape.iter().zip(&factors) {
        log_norm -= 0.5 * k as f64 / dim as f64 * factor.logdet();
    }
    let mut total = 0.0;
    for x in data.iter() {
        let centered = x.sub(&params.mean)?;
        let mut weighted = centered.clone();
        for (mode, factor) in factors.iter().enumerate() {
            let unfolded = weighted.unfold(mode)?;
            let solved = factor.solve(unfolded.matrix())?;
            weighted = fold_matrix(&solved, mode, weighted.shape())?;
        }
        total += log_norm - 0.5 * crate::tensor::inner(&weighted, &centered)?;
    }
    Ok(total)
}
