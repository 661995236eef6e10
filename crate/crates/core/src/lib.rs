//! Tensor-valued Gaussian distributions with Kronecker-separable structure.
//!
//! The central object is the identifiable parameter set `{α, μ⁽ⁿ⁾, σ², Θ⁽ⁿ⁾}`
//! of a Gaussian random tensor: a rank-1 mean `α·(μ⁽¹⁾∘…∘μ⁽ᴺ⁾)` with unit
//! factor vectors, a total variance `σ²`, and per-mode unit-trace SPD
//! covariance densities `Θ⁽ⁿ⁾`. Because the parametrization is identifiable,
//! maximum likelihood estimation is available in closed form.
//!
//! Module map:
//! - [`tensor`] — dense order-N tensors, unfoldings, mode-n products.
//! - [`kernels`] — Kronecker / block Khatri-Rao / partial-trace algebra and
//!   dense symmetric factorizations.
//! - [`distribution`] — the univariate tensor Gaussian: validation, exact
//!   log-density, sampling and parameter counting.
//! - [`estimation`] — closed-form ML estimators, identifiability checks and
//!   the legacy flip-flop baseline.
//! - [`multivariate`] — the M-variate extension with Khatri-Rao separable
//!   covariance.
//! - [`fields`] — separable Gaussian random fields on coordinate grids.
//! - [`io`] — text serialization of parameter sets and reports.
//! - [`rng`] — the reproducible random number generation contract.

pub mod distribution;
pub mod error;
pub mod estimation;
pub mod fields;
pub mod io;
pub mod kernels;
pub mod multivariate;
pub mod rng;
pub mod tensor;

pub use distribution::{SampleSet, TensorGaussianParams, ValidationReport};
pub use error::{Error, Result};
pub use estimation::{EstimationReport, LegacyKroneckerParams};
pub use fields::{AxisKernel, CoordinateGrid};
pub use kernels::{BlockMatrix, SpdMatrix};
pub use multivariate::{MultiSampleSet, MultiTensorGaussianParams};
pub use tensor::{inner, outer_rank1, DenseTensor, Unfolding};
