//! Text serialization of parameter sets, estimation reports and kernel
//! specifications.
//!
//! The on-disk format is JSON (keys with nested arrays). Every float is
//! printed with 17 significant digits (`{:.16e}`), which round-trips any
//! finite `f64` exactly. Matrices are stored as row-major nested arrays.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::distribution::TensorGaussianParams;
use crate::error::{Error, Result};
use crate::estimation::{EstimationReport, LegacyKroneckerParams};
use crate::fields::{AxisKernel, CoordinateGrid, CovKernel, MeanKernel};
use crate::multivariate::MultiTensorGaussianParams;
use crate::tensor::DenseTensor;

/// A float with 17 significant digits; parses back to the identical bits.
pub fn fmt17(value: f64) -> String {
    format!("{value:.16e}")
}

struct SigFigFormatter;

impl serde_json::ser::Formatter for SigFigFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes any value to JSON with 17-significant-digit floats.
pub fn to_json_17<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(out).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Format("empty matrix".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format("ragged or empty matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// On-disk form of [`TensorGaussianParams`].
///
/// Field names are part of the format: `shape`, `alpha`, `mu`, `sigma2`,
/// `theta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    pub shape: Vec<usize>,
    pub alpha: f64,
    pub mu: Vec<Vec<f64>>,
    pub sigma2: f64,
    pub theta: Vec<Vec<Vec<f64>>>,
}

impl From<&TensorGaussianParams> for ParamsFile {
    fn from(params: &TensorGaussianParams) -> Self {
        Self {
            shape: params.shape().to_vec(),
            alpha: params.alpha(),
            mu: params.mus().iter().map(|m| m.as_slice().to_vec()).collect(),
            sigma2: params.sigma2(),
            theta: params.thetas().iter().map(matrix_to_rows).collect(),
        }
    }
}

impl TryFrom<ParamsFile> for TensorGaussianParams {
    type Error = Error;

    fn try_from(file: ParamsFile) -> Result<Self> {
        let mus = file
            .mu
            .iter()
            .map(|v| DVector::from_column_slice(v))
            .collect();
        let thetas = file
            .theta
            .iter()
            .map(|rows| rows_to_matrix(rows))
            .collect::<Result<Vec<_>>>()?;
        TensorGaussianParams::new(file.shape, file.alpha, mus, file.sigma2, thetas)
    }
}

pub fn params_to_string(params: &TensorGaussianParams) -> Result<String> {
    to_json_17(&ParamsFile::from(params))
}

pub fn params_from_str(text: &str) -> Result<TensorGaussianParams> {
    from_json::<ParamsFile>(text)?.try_into()
}

pub fn write_params(path: &Path, params: &TensorGaussianParams) -> Result<()> {
    write_text(path, &params_to_string(params)?)
}

pub fn read_params(path: &Path) -> Result<TensorGaussianParams> {
    params_from_str(&read_text(path)?)
}

/// On-disk form of [`EstimationReport`]: the parameter fields plus `T`,
/// `bessel`, `identifiable`, `explained_variance` and `degenerate`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    #[serde(flatten)]
    pub params: ParamsFile,
    #[serde(rename = "T")]
    pub t: usize,
    pub bessel: bool,
    pub identifiable: bool,
    pub explained_variance: f64,
    pub degenerate: bool,
}

impl From<&EstimationReport> for ReportFile {
    fn from(report: &EstimationReport) -> Self {
        Self {
            params: ParamsFile::from(&report.params),
            t: report.sample_count,
            bessel: report.bessel_applied,
            identifiable: report.identifiable,
            explained_variance: report.rank1_explained_variance,
            degenerate: report.degenerate,
        }
    }
}

impl TryFrom<ReportFile> for EstimationReport {
    type Error = Error;

    fn try_from(file: ReportFile) -> Result<Self> {
        Ok(EstimationReport {
            params: file.params.try_into()?,
            degenerate: file.degenerate,
            bessel_applied: file.bessel,
            sample_count: file.t,
            identifiable: file.identifiable,
            rank1_explained_variance: file.explained_variance,
        })
    }
}

pub fn write_report(path: &Path, report: &EstimationReport) -> Result<()> {
    write_text(path, &to_json_17(&ReportFile::from(report))?)
}

pub fn read_report(path: &Path) -> Result<EstimationReport> {
    from_json::<ReportFile>(&read_text(path)?)?.try_into()
}

/// On-disk form of [`MultiTensorGaussianParams`]: the univariate field
/// names widened per variate, plus `M`, `sigma_zz`, `theta_zz[n][i][j]` and
/// the `undefined` pair list (0-based variate indices).
///
/// Slots named in `undefined` hold the raw cross-moment matrix instead of a
/// unit-trace density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiParamsFile {
    #[serde(rename = "M")]
    pub m: usize,
    pub shape: Vec<usize>,
    pub alpha: Vec<f64>,
    pub mu: Vec<Vec<Vec<f64>>>,
    pub sigma_zz: Vec<Vec<f64>>,
    pub theta_zz: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    pub undefined: Vec<[usize; 2]>,
}

impl From<&MultiTensorGaussianParams> for MultiParamsFile {
    fn from(params: &MultiTensorGaussianParams) -> Self {
        let m = params.num_variates();
        let n_modes = params.order();
        Self {
            m,
            shape: params.shape().to_vec(),
            alpha: params.alphas().to_vec(),
            mu: (0..m)
                .map(|i| {
                    (0..n_modes)
                        .map(|n| params.mu(i, n).as_slice().to_vec())
                        .collect()
                })
                .collect(),
            sigma_zz: matrix_to_rows(params.sigma()),
            theta_zz: (0..n_modes)
                .map(|n| {
                    (0..m)
                        .map(|i| {
                            (0..m)
                                .map(|j| matrix_to_rows(params.stored_block(n, i, j)))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            undefined: params
                .undefined_pairs()
                .iter()
                .map(|&(i, j)| [i, j])
                .collect(),
        }
    }
}

impl TryFrom<MultiParamsFile> for MultiTensorGaussianParams {
    type Error = Error;

    fn try_from(file: MultiParamsFile) -> Result<Self> {
        if file.alpha.len() != file.m {
            return Err(Error::Format(format!(
                "M = {} but {} alpha entries",
                file.m,
                file.alpha.len()
            )));
        }
        let mus = file
            .mu
            .iter()
            .map(|per_variate| {
                per_variate
                    .iter()
                    .map(|v| DVector::from_column_slice(v))
                    .collect()
            })
            .collect();
        let sigma = rows_to_matrix(&file.sigma_zz)?;
        let thetas = file
            .theta_zz
            .iter()
            .map(|grid| {
                grid.iter()
                    .map(|row| row.iter().map(|b| rows_to_matrix(b)).collect())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let undefined: BTreeSet<(usize, usize)> = file
            .undefined
            .iter()
            .map(|&[i, j]| (i.min(j), i.max(j)))
            .collect();
        MultiTensorGaussianParams::new(file.shape, file.alpha, mus, sigma, thetas, undefined)
    }
}

pub fn write_multi_params(path: &Path, params: &MultiTensorGaussianParams) -> Result<()> {
    write_text(path, &to_json_17(&MultiParamsFile::from(params))?)
}

pub fn read_multi_params(path: &Path) -> Result<MultiTensorGaussianParams> {
    from_json::<MultiParamsFile>(&read_text(path)?)?.try_into()
}

/// On-disk form of [`LegacyKroneckerParams`] (flip-flop output): the mean
/// tensor (flat, mode-1 fastest) and the unconstrained per-mode factors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LegacyParamsFile {
    pub shape: Vec<usize>,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<Vec<f64>>>,
}

impl From<&LegacyKroneckerParams> for LegacyParamsFile {
    fn from(params: &LegacyKroneckerParams) -> Self {
        Self {
            shape: params.mean.shape().to_vec(),
            mean: params.mean.data().to_vec(),
            cov: params.covs.iter().map(matrix_to_rows).collect(),
        }
    }
}

impl TryFrom<LegacyParamsFile> for LegacyKroneckerParams {
    type Error = Error;

    fn try_from(file: LegacyParamsFile) -> Result<Self> {
        Ok(LegacyKroneckerParams {
            mean: DenseTensor::new(file.shape, file.mean)?,
            covs: file
                .cov
                .iter()
                .map(|rows| rows_to_matrix(rows))
                .collect::<Result<_>>()?,
        })
    }
}

pub fn write_legacy_params(path: &Path, params: &LegacyKroneckerParams) -> Result<()> {
    write_text(path, &to_json_17(&LegacyParamsFile::from(params))?)
}

pub fn read_legacy_params(path: &Path) -> Result<LegacyKroneckerParams> {
    from_json::<LegacyParamsFile>(&read_text(path)?)?.try_into()
}

/// Kernel/grid specification: per-axis `coords`, `mean = {form, …}` and
/// `cov = {form, …}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSpecFile {
    pub axes: Vec<AxisSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisSpec {
    pub coords: Vec<f64>,
    pub mean: MeanSpec,
    pub cov: CovSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum MeanSpec {
    Constant { value: f64 },
    Linear { intercept: f64, slope: f64 },
    GaussianBump { amplitude: f64, center: f64, width: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum CovSpec {
    SquaredExponential { scale: f64, length: f64 },
    White { scale: f64 },
}

impl From<&MeanSpec> for MeanKernel {
    fn from(spec: &MeanSpec) -> Self {
        match *spec {
            MeanSpec::Constant { value } => MeanKernel::Constant { value },
            MeanSpec::Linear { intercept, slope } => MeanKernel::Linear { intercept, slope },
            MeanSpec::GaussianBump {
                amplitude,
                center,
                width,
            } => MeanKernel::GaussianBump {
                amplitude,
                center,
                width,
            },
        }
    }
}

impl From<&CovSpec> for CovKernel {
    fn from(spec: &CovSpec) -> Self {
        match *spec {
            CovSpec::SquaredExponential { scale, length } => {
                CovKernel::SquaredExponential { scale, length }
            }
            CovSpec::White { scale } => CovKernel::White { scale },
        }
    }
}

/// Materializes a kernel specification into axis kernels and the grid.
pub fn kernel_spec_to_field(spec: &KernelSpecFile) -> Result<(Vec<AxisKernel>, CoordinateGrid)> {
    let kernels = spec
        .axes
        .iter()
        .map(|axis| AxisKernel {
            mean: (&axis.mean).into(),
            cov: (&axis.cov).into(),
        })
        .collect();
    let grid = CoordinateGrid::new(spec.axes.iter().map(|a| a.coords.clone()).collect())?;
    Ok((kernels, grid))
}

pub fn write_kernel_spec(path: &Path, spec: &KernelSpecFile) -> Result<()> {
    write_text(path, &to_json_17(spec)?)
}

pub fn read_kernel_spec(path: &Path) -> Result<KernelSpecFile> {
    from_json(&read_text(path)?)
}
