//! Dataset analysis: fit the model, then decompose each covariance density
//! into its eigenvalue spectrum and leading eigenvectors — the gridded-data
//! analogue of empirical-orthogonal-function analysis.

use nalgebra::DMatrix;
use tengauss_core::estimation::{fit, EstimationReport};
use tengauss_core::kernels::sym_eig;
use tengauss_core::{Error, Result, SampleSet};

/// Spectrum of one mode's fitted covariance density.
#[derive(Debug, Clone)]
pub struct ModeSpectrum {
    /// Descending; sums to 1 (the unit trace of Θ̂⁽ⁿ⁾).
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub fit: EstimationReport,
    pub spectra: Vec<ModeSpectrum>,
}

pub fn analyze(data: &SampleSet) -> Result<AnalysisReport> {
    let report = fit(data, true)?;
    if report.degenerate {
        return Err(Error::DegenerateDistribution(
            "samples carry no residual variance; covariance densities are undefined".into(),
        ));
    }
    let spectra = report
        .params
        .thetas()
        .iter()
        .map(|theta| {
            let (values, vectors) = sym_eig(theta)?;
            Ok(ModeSpectrum {
                eigenvalues: values.as_slice().to_vec(),
                eigenvectors: vectors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalysisReport {
        fit: report,
        spectra,
    })
}
