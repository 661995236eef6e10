//! The M-variate tensor-valued Gaussian.
//!
//! M tensor variables of a common shape are stacked into a vector of length
//! `M·K` whose covariance is Khatri-Rao separable: block `(i,j)` equals
//! `σ_ij·(Θ_ij⁽ᴺ⁾⊗…⊗Θ_ij⁽¹⁾)` with every defined `Θ_ij⁽ⁿ⁾` of unit trace.
//! The scale `σ_ij` is the expected inner product `E⟨𝓧_i, 𝓧_j⟩`, which is
//! invariant to the data representation — that is what makes the stacked
//! parametrization identifiable.
//!
//! Near-independent pairs are degenerate for the density factors: when
//! `σ_ij ≈ 0` the equation defining `Θ_ij⁽ⁿ⁾` divides by (almost) zero, so
//! such blocks are flagged *undefined* and the well-behaved raw cross-moment
//! `C_ij⁽ⁿ⁾ = σ_ij·Θ_ij⁽ⁿ⁾` is stored in their place. Undefined blocks
//! contribute zero to every assembly.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;

use crate::distribution::SampleSet;
use crate::error::{Error, Result};
use crate::estimation::{identifiability_check, rank1_cpd, sample_mean};
use crate::kernels::{self, khatri_rao_block, BlockMatrix, SpdMatrix};
use crate::rng::sample_stream;
use crate::tensor::{inner, outer_rank1, tensorize, DenseTensor};
use rand::Rng;

/// Hard guard on the stacked dimension `M·K` for the dense-assembly paths
/// (joint density and sampling).
pub const DENSE_CAPACITY: usize = 4096;

/// Relative tolerance below which a cross scale `σ_ij` counts as zero and
/// the corresponding Θ blocks are marked undefined.
pub const UNDEFINED_TOL: f64 = 1e-12;

/// Parameters `{α_z, μ_z⁽ⁿ⁾, Σ_zz, Θ_zz⁽ⁿ⁾}` of the M-variate tensor
/// Gaussian.
///
/// Construction checks the structural and algebraic invariants (dimensions,
/// symmetry relations, unit traces, `σ_ii > 0`, undefined ⇒ `σ_ij ≈ 0`).
/// Positive definiteness is validated where it is needed: assembling the
/// stacked covariance factorizes it and rejects invalid combinations, so
/// rank-deficient small-sample estimates remain representable.
#[derive(Debug, Clone)]
pub struct MultiTensorGaussianParams {
    shape: Vec<usize>,
    alphas: Vec<f64>,
    /// `mus[i][n]` is the mode-n mean factor of variate i.
    mus: Vec<Vec<DVector<f64>>>,
    /// M×M matrix of expected inner products; diagonal strictly positive.
    sigma: DMatrix<f64>,
    /// `thetas[n][i][j]`: covariance density blocks; undefined slots hold
    /// the raw cross-moment instead.
    thetas: Vec<Vec<Vec<DMatrix<f64>>>>,
    /// Unordered pairs `(i, j)` with `i < j` whose Θ blocks are undefined.
    undefined: BTreeSet<(usize, usize)>,
}

impl MultiTensorGaussianParams {
    pub fn new(
        shape: Vec<usize>,
        alphas: Vec<f64>,
        mus: Vec<Vec<DVector<f64>>>,
        sigma: DMatrix<f64>,
        thetas: Vec<Vec<Vec<DMatrix<f64>>>>,
        undefined: BTreeSet<(usize, usize)>,
    ) -> Result<Self> {
        let m = alphas.len();
        let n_modes = shape.len();
        if m == 0 {
            return Err(Error::EmptyInput("variate count must be ≥ 1".into()));
        }
        if n_modes == 0 || shape.iter().any(|&d| d == 0) {
            return Err(Error::ShapeMismatch(format!("invalid shape {:?}", shape)));
        }
        if mus.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} mean factor sets for {} variates",
                mus.len(),
                m
            )));
        }
        for (i, (per_variate, &alpha)) in mus.iter().zip(&alphas).enumerate() {
            if per_variate.len() != n_modes {
                return Err(Error::DimensionMismatch(format!(
                    "variate {} has {} mean factors, order is {}",
                    i + 1,
                    per_variate.len(),
                    n_modes
                )));
            }
            for (n, mu) in per_variate.iter().enumerate() {
                if mu.len() != shape[n] {
                    return Err(Error::DimensionMismatch(format!(
                        "mu[{}][{}] has length {}, mode extent is {}",
                        i + 1,
                        n + 1,
                        mu.len(),
                        shape[n]
                    )));
                }
                if (mu.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParams(format!(
                        "mu[{}][{}] is not a unit vector (norm {})",
                        i + 1,
                        n + 1,
                        mu.norm()
                    )));
                }
            }
            if !(alpha >= 0.0) {
                return Err(Error::InvalidParams(format!(
                    "alpha[{}] = {} is negative",
                    i + 1,
                    alpha
                )));
            }
        }
        if sigma.nrows() != m || sigma.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "sigma_zz is {}x{}, expected {}x{}",
                sigma.nrows(),
                sigma.ncols(),
                m,
                m
            )));
        }
        let sigma_scale = sigma.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if kernels::max_asymmetry(&sigma) > 1e-12 * sigma_scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotSymmetric("sigma_zz".into()));
        }
        for i in 0..m {
            if !(sigma[(i, i)] > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "sigma_zz[{0}][{0}] = {1} must be strictly positive",
                    i + 1,
                    sigma[(i, i)]
                )));
            }
        }
        if thetas.len() != n_modes {
            return Err(Error::DimensionMismatch(format!(
                "{} covariance density grids for order {}",
                thetas.len(),
                n_modes
            )));
        }
        for &(i, j) in &undefined {
            if i >= j || j >= m {
                return Err(Error::InvalidParams(format!(
                    "undefined marker ({i},{j}) is not a valid cross pair"
                )));
            }
            let bound = UNDEFINED_TOL * (sigma[(i, i)] * sigma[(j, j)]).sqrt();
            if sigma[(i, j)].abs() > bound {
                return Err(Error::InvalidParams(format!(
                    "pair ({},{}) marked undefined but |sigma_ij| = {:.3e} exceeds {:.3e}",
                    i + 1,
                    j + 1,
                    sigma[(i, j)].abs(),
                    bound
                )));
            }
        }
        for (n, grid) in thetas.iter().enumerate() {
            let dim = shape[n];
            if grid.len() != m || grid.iter().any(|row| row.len() != m) {
                return Err(Error::DimensionMismatch(format!(
                    "theta grid for mode {} is not {}x{}",
                    n + 1,
                    m,
                    m
                )));
            }
            for (i, row) in grid.iter().enumerate() {
                for (j, block) in row.iter().enumerate() {
                    if block.nrows() != dim || block.ncols() != dim {
                        return Err(Error::DimensionMismatch(format!(
                            "theta[{}][{}][{}] is {}x{}, expected {}x{}",
                            n + 1,
                            i + 1,
                            j + 1,
                            block.nrows(),
                            block.ncols(),
                            dim,
                            dim
                        )));
                    }
                    let key = (i.min(j), i.max(j));
                    let defined = i == j || !undefined.contains(&key);
                    if defined {
                        if (block.trace() - 1.0).abs() > 1e-12 {
                            return Err(Error::InvalidParams(format!(
                                "theta[{}][{}][{}] has trace {}, expected 1",
                                n + 1,
                                i + 1,
                                j + 1,
                                block.trace()
                            )));
                        }
                    }
                    if j < i {
                        let scale = block.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                        let diff = (block - grid[j][i].transpose()).abs().max();
                        if diff > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                            return Err(Error::InvalidParams(format!(
                                "theta[{}][{}][{}] is not the transpose of its mirror block",
                                n + 1,
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self {
            shape,
            alphas,
            mus,
            sigma,
            thetas,
            undefined,
        })
    }

    /// Converts unconstrained per-mode block factors `R_zz⁽ⁿ⁾` into the
    /// identifiable form: `σ_ij = ∏ₙ trace(R_ij⁽ⁿ⁾)` and
    /// `Θ_ij⁽ⁿ⁾ = R_ij⁽ⁿ⁾/trace(R_ij⁽ⁿ⁾)`.
    ///
    /// A cross block with (near-)zero trace at any mode makes the pair
    /// undefined with `σ_ij = 0`; a diagonal block with nonpositive trace is
    /// an error.
    pub fn from_legacy_modes(
        alphas: Vec<f64>,
        mus: Vec<Vec<DVector<f64>>>,
        r_modes: &[BlockMatrix],
    ) -> Result<Self> {
        if r_modes.is_empty() {
            return Err(Error::EmptyInput("no legacy mode factors".into()));
        }
        let m = r_modes[0].partitions();
        let shape: Vec<usize> = r_modes.iter().map(BlockMatrix::block_rows).collect();
        for (n, r) in r_modes.iter().enumerate() {
            if r.partitions() != m {
                return Err(Error::DimensionMismatch(format!(
                    "legacy factor {} has {} partitions, expected {}",
                    n + 1,
                    r.partitions(),
                    m
                )));
            }
            if r.block_rows() != r.block_cols() {
                return Err(Error::DimensionMismatch(
                    "legacy factors need square blocks".into(),
                ));
            }
        }
        let mut sigma = DMatrix::<f64>::zeros(m, m);
        let mut thetas: Vec<Vec<Vec<DMatrix<f64>>>> = Vec::with_capacity(shape.len());
        let mut undefined = BTreeSet::new();
        for (n, r) in r_modes.iter().enumerate() {
            let dim = shape[n];
            let mut grid = vec![vec![DMatrix::<f64>::zeros(dim, dim); m]; m];
            for i in 0..m {
                for j in 0..m {
                    let block = r.block(i, j)?;
                    let trace = block.trace();
                    if i == j && trace <= 0.0 {
                        return Err(Error::NotPositiveDefinite(format!(
                            "legacy diagonal block ({0},{0}) at mode {1} has trace {2}",
                            i + 1,
                            n + 1,
                            trace
                        )));
                    }
                    if trace.abs() < f64::MIN_POSITIVE.sqrt() {
                        undefined.insert((i.min(j), i.max(j)));
                        grid[i][j] = DMatrix::zeros(dim, dim);
                    } else {
                        grid[i][j] = block / trace;
                    }
                }
            }
            thetas.push(grid);
        }
        for i in 0..m {
            for j in 0..m {
                if undefined.contains(&(i.min(j), i.max(j))) {
                    sigma[(i, j)] = 0.0;
                } else {
                    let mut s = 1.0;
                    for r in r_modes {
                        s *= r.block(i, j)?.trace();
                    }
                    sigma[(i, j)] = s;
                }
            }
        }
        Self::new(shape, alphas, mus, sigma, thetas, undefined)
    }

    /// Variate count M.
    pub fn num_variates(&self) -> usize {
        self.alphas.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    /// Elements per variate, K.
    pub fn num_elements(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn mu(&self, variate: usize, mode: usize) -> &DVector<f64> {
        &self.mus[variate][mode]
    }

    pub fn mus(&self) -> &[Vec<DVector<f64>>] {
        &self.mus
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `Θ_ij⁽ⁿ⁾` when defined, `None` for an undefined cross pair.
    pub fn theta(&self, mode: usize, i: usize, j: usize) -> Option<&DMatrix<f64>> {
        if self.is_undefined(i, j) {
            None
        } else {
            Some(&self.thetas[mode][i][j])
        }
    }

    /// Raw cross-moment `C_ij⁽ⁿ⁾ = σ_ij·Θ_ij⁽ⁿ⁾`; well-defined for every
    /// pair, including undefined ones (where it is the stored estimate).
    pub fn cross_moment(&self, mode: usize, i: usize, j: usize) -> DMatrix<f64> {
        if self.is_undefined(i, j) {
            self.thetas[mode][i][j].clone()
        } else {
            &self.thetas[mode][i][j] * self.sigma[(i, j)]
        }
    }

    /// Grid slot content as stored, defined or not (used by serialization).
    pub fn stored_block(&self, mode: usize, i: usize, j: usize) -> &DMatrix<f64> {
        &self.thetas[mode][i][j]
    }

    pub fn is_undefined(&self, i: usize, j: usize) -> bool {
        i != j && self.undefined.contains(&(i.min(j), i.max(j)))
    }

    pub fn undefined_pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.undefined
    }

    /// Marginal parameters of one variate, as univariate parameters.
    pub fn variate_params(&self, i: usize) -> Result<crate::TensorGaussianParams> {
        crate::TensorGaussianParams::new(
            self.shape.clone(),
            self.alphas[i],
            self.mus[i].clone(),
            self.sigma[(i, i)],
            self.thetas.iter().map(|grid| grid[i][i].clone()).collect(),
        )
    }

    /// The stacked mean vector of length `M·K`: block i is
    /// `α_i·(μ_i⁽ᴺ⁾⊗…⊗μ_i⁽¹⁾)`.
    pub fn assemble_mean(&self) -> DVector<f64> {
        let k = self.num_elements();
        let m = self.num_variates();
        let mut out = DVector::zeros(m * k);
        for i in 0..m {
            let mean = outer_rank1(&self.mus[i])
                .expect("structure validated on construction")
                .scale(self.alphas[i]);
            out.rows_mut(i * k, k).copy_from(&mean.vectorize());
        }
        out
    }

    /// The dense stacked covariance `Σ_zz ⊛ Θ_zz⁽ᴺ⁾ ⊛ … ⊛ Θ_zz⁽¹⁾`, built by
    /// folding block Khatri-Rao products with `Σ_zz` as the 1×1-block
    /// operand. Undefined blocks contribute zero. Fails with
    /// `NotPositiveDefinite` when the assembled matrix has no Cholesky
    /// factorization.
    pub fn assemble_cov(&self) -> Result<SpdMatrix> {
        let m = self.num_variates();
        let mut acc = BlockMatrix::scalar_blocks(self.sigma.clone())?;
        for mode in (0..self.order()).rev() {
            let dim = self.shape[mode];
            let grid: Vec<Vec<DMatrix<f64>>> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            if self.is_undefined(i, j) {
                                DMatrix::zeros(dim, dim)
                            } else {
                                self.thetas[mode][i][j].clone()
                            }
                        })
                        .collect()
                })
                .collect();
            acc = khatri_rao_block(&acc, &BlockMatrix::from_blocks(&grid)?)?;
        }
        SpdMatrix::new(acc.into_matrix())
    }

    /// Mode-n covariance of the stacked unfoldings: block `(i,j)` is
    /// `σ_ij·Θ_ij⁽ⁿ⁾` (zero when undefined).
    pub fn mode_n_stacked_cov(&self, mode: usize) -> Result<BlockMatrix> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        let m = self.num_variates();
        let dim = self.shape[mode];
        let grid: Vec<Vec<DMatrix<f64>>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if self.is_undefined(i, j) {
                            DMatrix::zeros(dim, dim)
                        } else {
                            &self.thetas[mode][i][j] * self.sigma[(i, j)]
                        }
                    })
                    .collect()
            })
            .collect();
        BlockMatrix::from_blocks(&grid)
    }

    /// Joint log-density of one observation of all M variates.
    ///
    /// Uses dense assembly of the stacked mean and covariance, guarded by
    /// [`DENSE_CAPACITY`].
    pub fn joint_log_pdf(&self, observation: &[DenseTensor]) -> Result<f64> {
        let m = self.num_variates();
        let k = self.num_elements();
        if observation.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "{} observed tensors for {} variates",
                observation.len(),
                m
            )));
        }
        for (i, x) in observation.iter().enumerate() {
            if x.shape() != self.shape.as_slice() {
                return Err(Error::ShapeMismatch(format!(
                    "variate {} has shape {:?}, expected {:?}",
                    i + 1,
                    x.shape(),
                    self.shape
                )));
            }
        }
        self.capacity_guard()?;
        let cov = self.assemble_cov()?;
        let z = stack(observation)?;
        let residual = z - self.assemble_mean();
        let rhs = DMatrix::from_column_slice(m * k, 1, residual.as_slice());
        let solved = cov.solve(&rhs)?;
        let quad = residual.dot(&DVector::from_column_slice(solved.as_slice()));
        Ok(-0.5 * (m * k) as f64 * (2.0 * std::f64::consts::PI).ln() - 0.5 * cov.logdet()
            - 0.5 * quad)
    }

    /// Draws T joint samples via `z = m_z + L·w` with `L` the Cholesky
    /// factor of the assembled covariance; deterministic per seed with one
    /// generator stream per sample.
    pub fn multi_sample(&self, count: usize, seed: u64) -> Result<MultiSampleSet> {
        if count == 0 {
            return Err(Error::EmptyInput("requested zero samples".into()));
        }
        self.capacity_guard()?;
        let m = self.num_variates();
        let k = self.num_elements();
        let cov = self.assemble_cov()?;
        let l = cov.chol_lower();
        let mean = self.assemble_mean();
        let mut per_variate: Vec<Vec<DenseTensor>> = vec![Vec::with_capacity(count); m];
        for t in 0..count {
            let mut rng = sample_stream(seed, t as u64);
            let w = DVector::from_fn(m * k, |_, _| rng.sample(StandardNormal));
            let z = &mean + l * w;
            for (i, tensors) in per_variate.iter_mut().enumerate() {
                tensors.push(tensorize(
                    z.as_slice()[i * k..(i + 1) * k].as_ref(),
                    &self.shape,
                )?);
            }
        }
        MultiSampleSet::new(
            per_variate
                .into_iter()
                .map(SampleSet::new)
                .collect::<Result<_>>()?,
        )
    }

    fn capacity_guard(&self) -> Result<()> {
        let mk = self.num_variates() * self.num_elements();
        if mk > DENSE_CAPACITY {
            return Err(Error::Capacity(format!(
                "stacked dimension {} exceeds the dense-assembly guard {}",
                mk, DENSE_CAPACITY
            )));
        }
        Ok(())
    }
}

/// M aligned sample sets: sample t of variate i is `𝓧_i(t)`.
#[derive(Debug, Clone)]
pub struct MultiSampleSet {
    sets: Vec<SampleSet>,
}

impl MultiSampleSet {
    pub fn new(sets: Vec<SampleSet>) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| Error::EmptyInput("no variates".into()))?;
        let shape = first.shape().to_vec();
        let len = first.len();
        for (i, set) in sets.iter().enumerate() {
            if set.shape() != shape.as_slice() {
                return Err(Error::ShapeMismatch(format!(
                    "variate {} has shape {:?}, expected {:?}",
                    i + 1,
                    set.shape(),
                    shape
                )));
            }
            if set.len() != len {
                return Err(Error::ShapeMismatch(format!(
                    "variate {} has {} samples, expected {}",
                    i + 1,
                    set.len(),
                    len
                )));
            }
        }
        Ok(Self { sets })
    }

    pub fn num_variates(&self) -> usize {
        self.sets.len()
    }

    /// Sample count T (common to all variates).
    pub fn len(&self) -> usize {
        self.sets[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets[0].is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        self.sets[0].shape()
    }

    pub fn variate(&self, i: usize) -> &SampleSet {
        &self.sets[i]
    }

    pub fn sets(&self) -> &[SampleSet] {
        &self.sets
    }
}

/// Concatenates the vectorizations of M same-shape tensors in variate
/// order. Equals the vectorization of the order-(N+1) tensor with the
/// variate mode appended last.
pub fn stack(tensors: &[DenseTensor]) -> Result<DVector<f64>> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::EmptyInput("stack of no tensors".into()))?;
    let shape = first.shape();
    let k = first.len();
    let mut out = DVector::zeros(tensors.len() * k);
    for (i, x) in tensors.iter().enumerate() {
        if x.shape() != shape {
            return Err(Error::ShapeMismatch(format!(
                "tensor {} has shape {:?}, expected {:?}",
                i,
                x.shape(),
                shape
            )));
        }
        out.rows_mut(i * k, k)
            .copy_from(&DVector::from_column_slice(x.data()));
    }
    Ok(out)
}

/// Inverse of [`stack`].
pub fn unstack(z: &DVector<f64>, num_variates: usize, shape: &[usize]) -> Result<Vec<DenseTensor>> {
    let k: usize = shape.iter().product();
    if num_variates == 0 || z.len() != num_variates * k {
        return Err(Error::ShapeMismatch(format!(
            "vector of length {} cannot unstack into {} variates of shape {:?}",
            z.len(),
            num_variates,
            shape
        )));
    }
    (0..num_variates)
        .map(|i| tensorize(&z.as_slice()[i * k..(i + 1) * k], shape))
        .collect()
}

/// Closed-form ML fit of the M-variate parameters.
///
/// Per-variate means come from the univariate rank-1 path;
/// `σ̂_ij = (1/T)·Σₜ⟨S_i(t), S_j(t)⟩` and
/// `Θ̂_ij⁽ⁿ⁾ = (1/(T·σ̂_ij))·Σₜ S_{i(n)}(t)·S_{j(n)}(t)ᵀ`, with the raw
/// (uncorrected) scales in the Θ denominators. Bessel's correction, when
/// requested and T > 1, rescales the reported `Σ̂_zz` only. Pairs whose raw
/// scale falls below [`UNDEFINED_TOL`] relative to `√(σ̂_i²σ̂_j²)` are marked
/// undefined and keep the raw cross-moment instead.
pub fn multi_fit(data: &MultiSampleSet, bessel: bool) -> Result<MultiTensorGaussianParams> {
    let m = data.num_variates();
    let t = data.len();
    let shape = data.shape().to_vec();
    let n_modes = shape.len();

    let mut alphas = Vec::with_capacity(m);
    let mut mus = Vec::with_capacity(m);
    let mut centered: Vec<Vec<DenseTensor>> = Vec::with_capacity(m);
    for i in 0..m {
        let set = data.variate(i);
        let mean = sample_mean(set);
        let (alpha, factors) = if mean.frobenius_norm_sq() == 0.0 {
            let e1: Vec<DVector<f64>> = shape
                .iter()
                .map(|&dim| {
                    let mut v = DVector::zeros(dim);
                    v[0] = 1.0;
                    v
                })
                .collect();
            (0.0, e1)
        } else {
            rank1_cpd(&mean)?
        };
        let rank1_mean = outer_rank1(&factors)?.scale(alpha);
        centered.push(
            set.iter()
                .map(|x| x.sub(&rank1_mean))
                .collect::<Result<_>>()?,
        );
        alphas.push(alpha);
        mus.push(factors);
    }

    let mut sigma_raw = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut acc = 0.0;
            for tt in 0..t {
                acc += inner(&centered[i][tt], &centered[j][tt])?;
            }
            let value = acc / t as f64;
            sigma_raw[(i, j)] = value;
            sigma_raw[(j, i)] = value;
        }
    }
    for i in 0..m {
        let second_moment: f64 = data
            .variate(i)
            .iter()
            .map(DenseTensor::frobenius_norm_sq)
            .sum::<f64>()
            / t as f64;
        if sigma_raw[(i, i)] <= 1e-24 * second_moment {
            return Err(Error::DegenerateDistribution(format!(
                "variate {} carries no residual variance",
                i + 1
            )));
        }
    }

    let mut undefined = BTreeSet::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let bound = UNDEFINED_TOL * (sigma_raw[(i, i)] * sigma_raw[(j, j)]).sqrt();
            if sigma_raw[(i, j)].abs() < bound {
                undefined.insert((i, j));
            }
        }
    }

    let mut thetas: Vec<Vec<Vec<DMatrix<f64>>>> = Vec::with_capacity(n_modes);
    for mode in 0..n_modes {
        let dim = shape[mode];
        let mut grid = vec![vec![DMatrix::<f64>::zeros(dim, dim); m]; m];
        for i in 0..m {
            for j in i..m {
                let mut acc = DMatrix::<f64>::zeros(dim, dim);
                for tt in 0..t {
                    let ui = centered[i][tt].unfold(mode)?;
                    let uj = centered[j][tt].unfold(mode)?;
                    acc += ui.matrix() * uj.matrix().transpose();
                }
                let block = if undefined.contains(&(i, j)) {
                    // raw cross-moment: well-defined even as σ_ij → 0
                    acc / t as f64
                } else {
                    acc / (t as f64 * sigma_raw[(i, j)])
                };
                grid[j][i] = block.transpose();
                grid[i][j] = block;
            }
        }
        thetas.push(grid);
    }

    let sigma = if bessel && t > 1 {
        &sigma_raw * (t as f64 / (t as f64 - 1.0))
    } else {
        sigma_raw
    };

    MultiTensorGaussianParams::new(shape, alphas, mus, sigma, thetas, undefined)
}

/// Per-variate identifiability of the stacked fit (same criterion as the
/// univariate case, applied to the shared shape).
pub fn multi_identifiability_check(shape: &[usize], t: usize) -> bool {
    identifiability_check(shape, t)
}

/// Random valid M-variate parameters; ground truth for Monte Carlo tests.
///
/// Built from legacy factors of the form `C_n ⊗ P_n + D_n ⊗ Q_n` with
/// positive-entry SPD `C_n, D_n` (M×M) and SPD `P_n, Q_n` (I_n×I_n), which
/// keeps every block trace positive and the assembled covariance positive
/// definite.
pub fn random_multi_params<R: Rng>(
    num_variates: usize,
    shape: &[usize],
    rng: &mut R,
) -> Result<MultiTensorGaussianParams> {
    let m = num_variates;
    let mut alphas = Vec::with_capacity(m);
    let mut mus = Vec::with_capacity(m);
    for _ in 0..m {
        let uni = crate::TensorGaussianParams::random(shape, rng)?;
        alphas.push(uni.alpha());
        mus.push(uni.mus().to_vec());
    }
    // strong per-mode coupling: cross correlation multiplies down across
    // modes, so weak factors would leave σ_ij too small for the Θ_ij
    // estimators to be well conditioned
    let mut r_modes = Vec::with_capacity(shape.len());
    for &dim in shape {
        let c = positive_spd(m, 0.9, rng);
        let d = positive_spd(m, 0.7, rng);
        let p = random_spd(dim, rng);
        let q = random_spd(dim, rng);
        let assembled = kernels::kron(&c, &p) + kernels::kron(&d, &q);
        r_modes.push(BlockMatrix::from_matrix(assembled, m)?);
    }
    MultiTensorGaussianParams::from_legacy_modes(alphas, mus, &r_modes)
}

/// SPD matrix with strictly positive entries: uniform off-diagonal coupling
/// (< 1) plus a diagonal slightly above 1, which keeps it both positive
/// definite and positive entrywise.
fn positive_spd<R: Rng>(dim: usize, coupling: f64, rng: &mut R) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(dim, dim, coupling);
    for i in 0..dim {
        out[(i, i)] = 1.0 + 0.2 * rng.random::<f64>();
    }
    out
}

fn random_spd<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut a: DMatrix<f64> = &g * g.transpose();
    let ridge = 0.25 * a.trace() / dim as f64;
    for i in 0..dim {
        a[(i, i)] += ridge;
    }
    a
}
