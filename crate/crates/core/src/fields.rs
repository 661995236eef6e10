//! Separable Gaussian random fields on coordinate grids.
//!
//! A field with per-axis mean functions `m⁽ⁿ⁾(z)` and covariance kernels
//! `σ⁽ⁿ⁾(z₁, z₂)`, sampled on the Cartesian product of strictly increasing
//! coordinate axes, is exactly a Kronecker-separable tensor Gaussian.
//! [`field_to_params`] evaluates the kernels on the grid and converts the
//! raw per-axis means and Gram matrices into the identifiable form. The
//! result provides ground truth for end-to-end estimation tests and demos.

use nalgebra::{DMatrix, DVector};

use crate::distribution::TensorGaussianParams;
use crate::error::{Error, Result};
use crate::kernels::{self, SpdMatrix};
use crate::tensor::DenseTensor;

/// Named per-axis mean function.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanKernel {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    GaussianBump { amplitude: f64, center: f64, width: f64 },
}

impl MeanKernel {
    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            MeanKernel::Constant { value } => value,
            MeanKernel::Linear { intercept, slope } => intercept + slope * z,
            MeanKernel::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let d = (z - center) / width;
                amplitude * (-0.5 * d * d).exp()
            }
        }
    }
}

/// Named per-axis covariance function. Both forms are symmetric and
/// positive definite on distinct grid points for positive scales.
#[derive(Debug, Clone, PartialEq)]
pub enum CovKernel {
    /// `s²·exp(−(z₁−z₂)²/(2ℓ²))`.
    SquaredExponential { scale: f64, length: f64 },
    /// `s²·1{z₁ = z₂}` — independent grid points.
    White { scale: f64 },
}

impl CovKernel {
    pub fn eval(&self, z1: f64, z2: f64) -> f64 {
        match *self {
            CovKernel::SquaredExponential { scale, length } => {
                let d = (z1 - z2) / length;
                scale * scale * (-0.5 * d * d).exp()
            }
            CovKernel::White { scale } => {
                if z1 == z2 {
                    scale * scale
                } else {
                    0.0
                }
            }
        }
    }
}

/// Mean and covariance functions of one coordinate axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisKernel {
    pub mean: MeanKernel,
    pub cov: CovKernel,
}

/// Per-axis strictly increasing coordinate arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateGrid {
    axes: Vec<Vec<f64>>,
}

impl CoordinateGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::ShapeMismatch("grid needs at least one axis".into()));
        }
        for (n, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(Error::ShapeMismatch(format!("axis {} is empty", n + 1)));
            }
            if axis.iter().any(|z| !z.is_finite()) {
                return Err(Error::ShapeMismatch(format!(
                    "axis {} contains a non-finite coordinate",
                    n + 1
                )));
            }
            for w in axis.windows(2) {
                if !(w[0] < w[1]) {
                    return Err(Error::ShapeMismatch(format!(
                        "axis {} coordinates are not strictly increasing ({} then {})",
                        n + 1,
                        w[0],
                        w[1]
                    )));
                }
            }
        }
        Ok(Self { axes })
    }

    /// Uniformly spaced axis helper.
    pub fn linspace_axis(start: f64, end: f64, points: usize) -> Vec<f64> {
        if points == 1 {
            return vec![start];
        }
        let step = (end - start) / (points - 1) as f64;
        (0..points).map(|i| start + step * i as f64).collect()
    }

    pub fn order(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn axis(&self, n: usize) -> &[f64] {
        &self.axes[n]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// Exact position of a coordinate on an axis, if it is a grid point.
    fn locate(&self, axis: usize, z: f64) -> Option<usize> {
        self.axes[axis]
            .binary_search_by(|probe| probe.partial_cmp(&z).expect("grid coordinates are finite"))
            .ok()
    }
}

/// Ground-truth parameters derived from a separable field, with a flag for
/// the degenerate all-zero-mean case (where `α = 0` and the affected factors
/// fall back to `e₁`).
#[derive(Debug, Clone)]
pub struct FieldParams {
    pub params: TensorGaussianParams,
    pub mean_degenerate: bool,
}

/// Evaluates the axis kernels on the grid and converts to identifiable
/// parameters: `σ² = ∏ₙ trace(R⁽ⁿ⁾)`, `Θ⁽ⁿ⁾ = R⁽ⁿ⁾/trace(R⁽ⁿ⁾)`,
/// `α = ∏ₙ‖m⁽ⁿ⁾‖`, `μ⁽ⁿ⁾ = m⁽ⁿ⁾/‖m⁽ⁿ⁾‖` under the estimation sign
/// convention (largest-magnitude entry positive, residual sign absorbed by
/// `μ⁽¹⁾`).
pub fn field_to_params(kernels_: &[AxisKernel], grid: &CoordinateGrid) -> Result<FieldParams> {
    if kernels_.len() != grid.order() {
        return Err(Error::DimensionMismatch(format!(
            "{} axis kernels for a {}-axis grid",
            kernels_.len(),
            grid.order()
        )));
    }
    let shape = grid.shape();
    let mut alpha = 1.0f64;
    let mut mus = Vec::with_capacity(shape.len());
    let mut flips = 0usize;
    let mut mean_degenerate = false;
    for (axis, kernel) in kernels_.iter().enumerate() {
        let coords = grid.axis(axis);
        let mut mean = DVector::from_fn(coords.len(), |i, _| kernel.mean.eval(coords[i]));
        let norm = mean.norm();
        if norm == 0.0 {
            mean_degenerate = true;
            alpha = 0.0;
            let mut e1 = DVector::zeros(coords.len());
            e1[0] = 1.0;
            mus.push(e1);
            continue;
        }
        alpha *= norm;
        mean /= norm;
        let before = mean[imax_abs(&mean)];
        kernels::fix_sign(&mut mean);
        if before < 0.0 {
            flips += 1;
        }
        mus.push(mean);
    }
    if mean_degenerate {
        alpha = 0.0;
    } else if flips % 2 == 1 {
        // restore the product sign that the per-factor convention dropped
        mus[0].neg_mut();
    }

    let mut sigma2 = 1.0f64;
    let mut thetas = Vec::with_capacity(shape.len());
    for (axis, kernel) in kernels_.iter().enumerate() {
        let coords = grid.axis(axis);
        let gram = DMatrix::from_fn(coords.len(), coords.len(), |i, j| {
            kernel.cov.eval(coords[i], coords[j])
        });
        // Cholesky of the Gram matrix is the positive-definiteness check
        let spd = SpdMatrix::new(gram).map_err(|e| match e {
            Error::NotPositiveDefinite(_) => Error::NotPositiveDefinite(format!(
                "covariance kernel of axis {} is not positive definite on the grid",
                axis + 1
            )),
            other => other,
        })?;
        let trace = spd.matrix().trace();
        sigma2 *= trace;
        thetas.push(spd.matrix() / trace);
    }

    Ok(FieldParams {
        params: TensorGaussianParams::new(shape, alpha, mus, sigma2, thetas)?,
        mean_degenerate,
    })
}

/// Places scattered `(coordinate, value)` samples into the tensor cell whose
/// per-axis grid coordinates they carry. The sample coordinates must be
/// exactly the grid's Cartesian product; anything off-grid, missing or
/// duplicated is a coherence error.
pub fn coherent_tensorize(
    samples: &[(Vec<f64>, f64)],
    grid: &CoordinateGrid,
) -> Result<DenseTensor> {
    let shape = grid.shape();
    let k: usize = shape.iter().product();
    if samples.len() != k {
        return Err(Error::Coherence(format!(
            "{} samples for a grid with {} cells",
            samples.len(),
            k
        )));
    }
    let mut data = vec![0.0; k];
    let mut filled = vec![false; k];
    for (coords, value) in samples {
        if coords.len() != shape.len() {
            return Err(Error::Coherence(format!(
                "sample coordinate has {} axes, grid has {}",
                coords.len(),
                shape.len()
            )));
        }
        let mut lin = 0usize;
        let mut stride = 1usize;
        for (axis, (&z, &dim)) in coords.iter().zip(&shape).enumerate() {
            let i = grid.locate(axis, z).ok_or_else(|| {
                Error::Coherence(format!(
                    "coordinate {} on axis {} is not a grid point",
                    z,
                    axis + 1
                ))
            })?;
            lin += i * stride;
            stride *= dim;
        }
        if filled[lin] {
            return Err(Error::Coherence(format!(
                "duplicate sample at coordinates {:?}",
                coords
            )));
        }
        filled[lin] = true;
        data[lin] = *value;
    }
    DenseTensor::new(shape, data)
}

fn imax_abs(v: &DVector<f64>) -> usize {
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    best
}
