//! Block-matrix algebra and dense symmetric linear algebra.
//!
//! The block operations (Kronecker, block Khatri-Rao, partial trace,
//! Hadamard) carry the separable covariance structure; the symmetric
//! factorizations (Cholesky, log-determinant, eigendecomposition) back the
//! distribution and estimation layers. All matrices are dense `f64`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative asymmetry below which an input is silently symmetrized as
/// `(A + Aᵀ)/2` before factorization; anything larger is an error. Absorbs
/// floating-point drift accumulated in sample covariances.
const SYMMETRY_TOL: f64 = 1e-10;

/// Kronecker product: block `(i,j)` of the result is `a_ij · B`.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = DMatrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let aij = a[(i, j)];
            out.view_mut((i * br, j * bc), (br, bc))
                .copy_from(&(b * aij));
        }
    }
    out
}

/// Left fold of [`kron`] over a nonempty list, in the given order.
///
/// Callers needing the `⊗_{n=N}^{1}` convention pass the matrices in
/// descending-mode order.
pub fn kron_seq(mats: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let (first, rest) = mats
        .split_first()
        .ok_or_else(|| Error::EmptyInput("Kronecker product of no matrices".into()))?;
    let mut acc = first.clone();
    for m in rest {
        acc = kron(&acc, m);
    }
    Ok(acc)
}

/// Square block matrix with `M` uniform row/column partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    partitions: usize,
    block_rows: usize,
    block_cols: usize,
    matrix: DMatrix<f64>,
}

impl BlockMatrix {
    /// Partitions an assembled matrix into `partitions × partitions` uniform
    /// blocks.
    pub fn from_matrix(matrix: DMatrix<f64>, partitions: usize) -> Result<Self> {
        if partitions == 0 {
            return Err(Error::DimensionMismatch("partition count must be ≥ 1".into()));
        }
        if matrix.nrows() % partitions != 0 || matrix.ncols() % partitions != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot be split into {} uniform partitions",
                matrix.nrows(),
                matrix.ncols(),
                partitions
            )));
        }
        Ok(Self {
            partitions,
            block_rows: matrix.nrows() / partitions,
            block_cols: matrix.ncols() / partitions,
            matrix,
        })
    }

    /// Assembles a block matrix from an `M × M` grid of uniform blocks.
    pub fn from_blocks(blocks: &[Vec<DMatrix<f64>>]) -> Result<Self> {
        let m = blocks.len();
        if m == 0 || blocks.iter().any(|row| row.len() != m) {
            return Err(Error::DimensionMismatch(
                "block grid must be square and nonempty".into(),
            ));
        }
        let br = blocks[0][0].nrows();
        let bc = blocks[0][0].ncols();
        if br == 0 || bc == 0 {
            return Err(Error::DimensionMismatch("blocks must be nonempty".into()));
        }
        let mut matrix = DMatrix::zeros(m * br, m * bc);
        for (i, row) in blocks.iter().enumerate() {
            for (j, block) in row.iter().enumerate() {
                if block.nrows() != br || block.ncols() != bc {
                    return Err(Error::DimensionMismatch(format!(
                        "block ({i},{j}) is {}x{}, expected {}x{}",
                        block.nrows(),
                        block.ncols(),
                        br,
                        bc
                    )));
                }
                matrix.view_mut((i * br, j * bc), (br, bc)).copy_from(block);
            }
        }
        Ok(Self {
            partitions: m,
            block_rows: br,
            block_cols: bc,
            matrix,
        })
    }

    /// Treats an `M × M` matrix as a block matrix of 1×1 blocks.
    pub fn scalar_blocks(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(
                "scalar-block matrix must be square".into(),
            ));
        }
        let m = matrix.nrows();
        Self::from_matrix(matrix, m)
    }

    pub fn partitions(&self) -> usize {
        self.partitions
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn block(&self, i: usize, j: usize) -> Result<DMatrix<f64>> {
        if i >= self.partitions || j >= self.partitions {
            return Err(Error::DimensionMismatch(format!(
                "block ({i},{j}) out of range for {} partitions",
                self.partitions
            )));
        }
        Ok(self
            .matrix
            .view(
                (i * self.block_rows, j * self.block_cols),
                (self.block_rows, self.block_cols),
            )
            .into())
    }
}

/// Block Khatri-Rao product: block `(i,j)` of the result is
/// `kron(A_ij, B_ij)`. The operands must share the partition count; block
/// sizes may differ between them (1×1 blocks in `a` scale the blocks of `b`).
pub fn khatri_rao_block(a: &BlockMatrix, b: &BlockMatrix) -> Result<BlockMatrix> {
    if a.partitions != b.partitions {
        return Err(Error::DimensionMismatch(format!(
            "partition counts differ: {} vs {}",
            a.partitions, b.partitions
        )));
    }
    let m = a.partitions;
    let br = a.block_rows * b.block_rows;
    let bc = a.block_cols * b.block_cols;
    let mut matrix = DMatrix::zeros(m * br, m * bc);
    for i in 0..m {
        for j in 0..m {
            let block = kron(&a.block(i, j)?, &b.block(i, j)?);
            matrix.view_mut((i * br, j * bc), (br, bc)).copy_from(&block);
        }
    }
    BlockMatrix::from_matrix(matrix, m)
}

/// Partial trace: the `M × M` matrix whose `(i,j)` entry is `trace(A_ij)`.
/// Requires square blocks.
pub fn partial_trace(a: &BlockMatrix) -> Result<DMatrix<f64>> {
    if a.block_rows != a.block_cols {
        return Err(Error::DimensionMismatch(format!(
            "partial trace needs square blocks, got {}x{}",
            a.block_rows, a.block_cols
        )));
    }
    let m = a.partitions;
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut tr = 0.0;
            for d in 0..a.block_rows {
                tr += a.matrix[(i * a.block_rows + d, j * a.block_cols + d)];
            }
            out[(i, j)] = tr;
        }
    }
    Ok(out)
}

/// Hadamard (elementwise) product.
pub fn hadamard(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a.component_mul(b))
}

/// Symmetric positive definite matrix, validated on construction via a
/// successful Cholesky factorization. The lower factor is cached.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let sym = symmetrize(&matrix)?;
        let chol_lower = cholesky_factor(&sym)?;
        Ok(Self {
            matrix: sym,
            chol_lower,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Lower-triangular Cholesky factor L with L·Lᵀ equal to the matrix.
    pub fn chol_lower(&self) -> &DMatrix<f64> {
        &self.chol_lower
    }

    /// ln det, computed from the cached factor as `2·Σ ln L_ii`.
    pub fn logdet(&self) -> f64 {
        2.0 * self.chol_lower.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Solves `A · X = B` via the cached factorization.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rhs.nrows() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "rhs has {} rows, matrix is {}x{}",
                rhs.nrows(),
                self.dim(),
                self.dim()
            )));
        }
        let mut x = rhs.clone();
        self.chol_lower.solve_lower_triangular_mut(&mut x);
        self.chol_lower
            .transpose()
            .solve_upper_triangular_mut(&mut x);
        Ok(x)
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// A non-positive pivot signals an invalid covariance and maps to
/// [`Error::NotPositiveDefinite`].
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    cholesky_factor(&symmetrize(a)?)
}

/// `ln det(A)` for symmetric positive definite `A`.
pub fn logdet_spd(a: &DMatrix<f64>) -> Result<f64> {
    let l = cholesky(a)?;
    Ok(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Eigendecomposition of a symmetric matrix.
///
/// Eigenvalues are sorted descending; each eigenvector's sign is fixed so
/// that its largest-magnitude entry is positive. With repeated eigenvalues
/// the choice within the eigenspace is whatever the deterministic algorithm
/// produces; only `A·u = λ·u` is guaranteed.
pub fn sym_eig(a: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let sym = symmetrize(a)?;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("symmetric eigenvalues are finite")
    });
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}

/// Unit left singular vector of the largest singular value, with the
/// singular value itself. Computed as the leading eigenvector of `M·Mᵀ`;
/// the sign convention follows [`sym_eig`].
pub fn leading_singular_vector(m: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    if m.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateInput(
            "leading singular vector of a zero matrix".into(),
        ));
    }
    let gram = m * m.transpose();
    let (values, vectors) = sym_eig(&gram)?;
    let sigma = values[0].max(0.0).sqrt();
    Ok((vectors.column(0).clone_owned(), sigma))
}

/// Flips `v` so its largest-magnitude entry (first one on ties) is positive.
pub(crate) fn fix_sign(v: &mut DVector<f64>) {
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.neg_mut();
    }
}

/// Largest absolute entry of `A - Aᵀ`.
pub(crate) fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut asym = 0.0f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    asym
}

fn symmetrize(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::NotSymmetric(format!(
            "matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let asym = max_asymmetry(a);
    if asym > SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(format!(
            "max |A - Aᵀ| = {asym:.3e} exceeds {SYMMETRY_TOL:.0e} relative"
        )));
    }
    Ok((a + a.transpose()) * 0.5)
}

fn cholesky_factor(sym: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(sym.clone())
        .map(|c| c.l())
        .ok_or_else(|| {
            Error::NotPositiveDefinite(format!(
                "Cholesky factorization failed for a {}x{} matrix",
                sym.nrows(),
                sym.ncols()
            ))
        })
}
