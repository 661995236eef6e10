//! Dense order-N tensors and the multilinear operations built on them.
//!
//! Storage convention: a tensor of shape `I₁ × … × I_N` is kept as a flat
//! `f64` buffer with the mode-1 index varying fastest and the mode-N index
//! slowest (the column-major generalization). Under this convention the
//! vectorization of a rank-1 tensor `μ⁽¹⁾∘…∘μ⁽ᴺ⁾` equals the Kronecker
//! product `μ⁽ᴺ⁾⊗…⊗μ⁽¹⁾`.
//!
//! Mode indices are 0-based throughout the API.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense real tensor of order N ≥ 1 with mode-1-fastest flat storage.
///
/// Values are immutable after construction; all operations are pure
/// functions returning new tensors, so values may be freely shared between
/// threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Mode-n unfolding: the `I_n × (K/I_n)` matrix whose columns are the
/// mode-n fibers of the source tensor.
///
/// Fibers are ordered by cycling the remaining modes with the
/// lowest-numbered remaining mode varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Unfolding {
    mode: usize,
    matrix: DMatrix<f64>,
}

impl DenseTensor {
    /// Builds a tensor from its shape and flat (mode-1-fastest) data.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        validate_shape(&shape)?;
        let k: usize = shape.iter().product();
        if data.len() != k {
            return Err(Error::ShapeMismatch(format!(
                "data length {} does not match shape {:?} (expected {})",
                data.len(),
                shape,
                k
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        validate_shape(&shape)?;
        let k = shape.iter().product();
        Ok(Self {
            shape,
            data: vec![0.0; k],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        validate_shape(&shape)?;
        let k: usize = shape.iter().product();
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(k);
        for _ in 0..k {
            data.push(f(&idx));
            increment_index(&mut idx, &shape);
        }
        Ok(Self { shape, data })
    }

    /// Number of modes N.
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Total number of elements K = ∏ I_n.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat storage, mode-1 index fastest.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[self.linear_index(idx)?])
    }

    /// Flat position of a multi-index.
    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.order() {
            return Err(Error::ShapeMismatch(format!(
                "index of length {} for an order-{} tensor",
                idx.len(),
                self.order()
            )));
        }
        let mut lin = 0usize;
        let mut stride = 1usize;
        for (n, (&i, &dim)) in idx.iter().zip(&self.shape).enumerate() {
            if i >= dim {
                return Err(Error::ShapeMismatch(format!(
                    "index {} out of range for mode {} of extent {}",
                    i, n, dim
                )));
            }
            lin += i * stride;
            stride *= dim;
        }
        Ok(lin)
    }

    /// Vector unfolding: returns the flat storage as a column vector.
    pub fn vectorize(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.data)
    }

    /// Mode-n unfolding (`mode` is 0-based).
    pub fn unfold(&self, mode: usize) -> Result<Unfolding> {
        let order = self.order();
        if mode >= order {
            return Err(Error::ModeOutOfRange { mode, order });
        }
        let dim = self.shape[mode];
        let left: usize = self.shape[..mode].iter().product();
        let right: usize = self.shape[mode + 1..].iter().product();
        let mut matrix = DMatrix::zeros(dim, left * right);
        for r in 0..right {
            for i in 0..dim {
                let src = left * (i + dim * r);
                for l in 0..left {
                    matrix[(i, l + left * r)] = self.data[l + src];
                }
            }
        }
        Ok(Unfolding { mode, matrix })
    }

    /// Mode-n product with a `J_n × I_n` matrix: replaces the mode-n extent
    /// by `J_n`. Equivalent to folding `U · unfold(X, n)` back into a tensor.
    pub fn mode_n_product(&self, u: &DMatrix<f64>, mode: usize) -> Result<DenseTensor> {
        let order = self.order();
        if mode >= order {
            return Err(Error::ModeOutOfRange { mode, order });
        }
        if u.ncols() != self.shape[mode] {
            return Err(Error::DimensionMismatch(format!(
                "matrix with {} columns applied at mode {} of extent {}",
                u.ncols(),
                mode,
                self.shape[mode]
            )));
        }
        let unfolded = self.unfold(mode)?;
        let product = u * unfolded.matrix();
        let mut new_shape = self.shape.clone();
        new_shape[mode] = u.nrows();
        fold_matrix(&product, mode, &new_shape)
    }

    /// Sequence of mode-n products; `None` entries leave a mode untouched.
    ///
    /// Products at distinct modes commute, so the application order does not
    /// affect the result.
    pub fn multi_mode_product(&self, mats: &[Option<&DMatrix<f64>>]) -> Result<DenseTensor> {
        if mats.len() != self.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} matrices supplied for an order-{} tensor",
                mats.len(),
                self.order()
            )));
        }
        let mut current = self.clone();
        for (n, mat) in mats.iter().enumerate() {
            if let Some(u) = mat {
                current = current.mode_n_product(u, n)?;
            }
        }
        Ok(current)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn scale(&self, factor: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a - b)
    }

    /// In-place `self += factor * other`; used for accumulating means.
    pub fn axpy(&mut self, factor: f64, other: &DenseTensor) -> Result<()> {
        check_same_shape(&self.shape, &other.shape)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        check_same_shape(&self.shape, &other.shape)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

impl Unfolding {
    /// The mode (0-based) this unfolding was taken at.
    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Inverse of vectorization: reshapes a flat vector into the given shape.
pub fn tensorize(v: &[f64], shape: &[usize]) -> Result<DenseTensor> {
    DenseTensor::new(shape.to_vec(), v.to_vec())
}

/// Inverse of `unfold`: rebuilds the tensor of the given shape from a mode-n
/// unfolding.
pub fn fold(unfolding: &Unfolding, shape: &[usize]) -> Result<DenseTensor> {
    fold_matrix(unfolding.matrix(), unfolding.mode(), shape)
}

/// Folds a raw `I_n × (K/I_n)` fiber matrix back into a tensor.
pub fn fold_matrix(matrix: &DMatrix<f64>, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
    validate_shape(shape)?;
    let order = shape.len();
    if mode >= order {
        return Err(Error::ModeOutOfRange { mode, order });
    }
    let dim = shape[mode];
    let left: usize = shape[..mode].iter().product();
    let right: usize = shape[mode + 1..].iter().product();
    if matrix.nrows() != dim || matrix.ncols() != left * right {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix cannot fold into shape {:?} at mode {} (expected {}x{})",
            matrix.nrows(),
            matrix.ncols(),
            shape,
            mode,
            dim,
            left * right
        )));
    }
    let mut data = vec![0.0; dim * left * right];
    for r in 0..right {
        for i in 0..dim {
            let dst = left * (i + dim * r);
            for l in 0..left {
                data[l + dst] = matrix[(i, l + left * r)];
            }
        }
    }
    Ok(DenseTensor {
        shape: shape.to_vec(),
        data,
    })
}

/// Rank-1 tensor from one vector per mode: entry `(i₁,…,i_N)` equals
/// `∏ₙ v⁽ⁿ⁾[i_n]`.
pub fn outer_rank1(vectors: &[DVector<f64>]) -> Result<DenseTensor> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("outer product of no vectors".into()));
    }
    let mut shape = Vec::with_capacity(vectors.len());
    let mut data = vec![1.0];
    for v in vectors {
        if v.is_empty() {
            return Err(Error::EmptyInput("outer product factor of length 0".into()));
        }
        shape.push(v.len());
        let mut next = Vec::with_capacity(data.len() * v.len());
        for &vi in v.iter() {
            next.extend(data.iter().map(|&d| d * vi));
        }
        data = next;
    }
    Ok(DenseTensor { shape, data })
}

/// Inner product: the sum over all entries of the elementwise product.
///
/// Invariant to the data representation — it equals the inner product of
/// the vectorizations and of any pair of matching unfoldings.
pub fn inner(x: &DenseTensor, y: &DenseTensor) -> Result<f64> {
    check_same_shape(&x.shape, &y.shape)?;
    Ok(x.data.iter().zip(&y.data).map(|(a, b)| a * b).sum())
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::ShapeMismatch("tensor order must be at least 1".into()));
    }
    if shape.iter().any(|&d| d == 0) {
        return Err(Error::ShapeMismatch(format!(
            "every mode extent must be at least 1, got {:?}",
            shape
        )));
    }
    Ok(())
}

fn check_same_shape(a: &[usize], b: &[usize]) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch(format!(
            "shapes {:?} and {:?} differ",
            a, b
        )));
    }
    Ok(())
}

/// Advances a multi-index with the first (mode-1) position fastest.
pub(crate) fn increment_index(idx: &mut [usize], shape: &[usize]) {
    for (i, &dim) in idx.iter_mut().zip(shape) {
        *i += 1;
        if *i < dim {
            return;
        }
        *i = 0;
    }
}
