//! One function per subcommand. All user-facing messages use 1-based mode
//! and variate indices.

use std::path::{Path, PathBuf};

use tengauss_core::distribution::{mean_param_counts, param_counts};
use tengauss_core::estimation::{
    fit, flip_flop_fit, identifiability_check, legacy_log_likelihood, log_likelihood,
};
use tengauss_core::multivariate::{multi_fit, MultiSampleSet};
use tengauss_core::{fields, io, Error, Result, SampleSet};

use crate::csvout::{fmt17, write_csv};
use crate::dataset::{read_dataset, write_dataset};
use crate::harness::{self, log_log_slope};

/// `T > max_n(I_n²/K)` threshold, for warning messages.
fn identifiability_threshold(shape: &[usize]) -> f64 {
    let k: f64 = shape.iter().map(|&d| d as f64).product();
    shape
        .iter()
        .map(|&d| (d * d) as f64 / k)
        .fold(0.0, f64::max)
}

fn warn_if_unidentifiable(shape: &[usize], t: usize) {
    if !identifiability_check(shape, t) {
        eprintln!(
            "warning: covariance estimates are not unique for shape {:?} at T = {}; \
             identifiability requires T > {}",
            shape,
            t,
            identifiability_threshold(shape)
        );
    }
}

pub fn cmd_sample(params_path: &Path, count: usize, seed: u64, out: &Path) -> Result<()> {
    let params = io::read_params(params_path)?;
    params
        .checked()
        .map_err(|e| Error::InvalidParams(format!("{params_path:?}: {e}")))?;
    let data = params.sample(count, seed)?;
    write_dataset(out, &data)?;
    println!(
        "wrote {} samples of shape {:?} to {}",
        count,
        params.shape(),
        out.display()
    );
    Ok(())
}

pub fn cmd_fit(dataset: &Path, bessel: bool, out: Option<&Path>) -> Result<()> {
    let data = read_dataset(dataset)?;
    warn_if_unidentifiable(data.shape(), data.len());
    let report = fit(&data, bessel)?;
    println!(
        "fitted shape {:?} from T = {} samples (bessel: {})",
        data.shape(),
        data.len(),
        report.bessel_applied
    );
    println!("alpha = {}", report.params.alpha());
    println!("sigma2 = {}", report.params.sigma2());
    println!(
        "rank-1 explained variance of the sample mean = {}",
        report.rank1_explained_variance
    );
    if report.degenerate {
        println!("samples are degenerate: sigma2 = 0, covariance densities undefined");
    }
    if let Some(path) = out {
        io::write_report(path, &report)?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

pub fn cmd_logpdf(params_path: &Path, dataset: &Path, out: Option<&Path>) -> Result<()> {
    let params = io::read_params(params_path)?;
    let data = read_dataset(dataset)?;
    let mut rows = Vec::with_capacity(data.len());
    for (t, x) in data.iter().enumerate() {
        rows.push(format!("{},{}", t, fmt17(params.log_pdf(x)?)));
    }
    let total = log_likelihood(&params, &data)?;
    if let Some(path) = out {
        write_csv(path, "sample,log_pdf", rows)?;
        println!("per-sample densities written to {}", path.display());
    }
    println!("log-likelihood of {} samples = {}", data.len(), total);
    Ok(())
}

pub fn cmd_flipflop(dataset: &Path, max_iters: usize, tol: f64, out: Option<&Path>) -> Result<()> {
    let data = read_dataset(dataset)?;
    warn_if_unidentifiable(data.shape(), data.len());
    let legacy = flip_flop_fit(&data, max_iters, tol)?;
    let ll_legacy = legacy_log_likelihood(&legacy, &data)?;
    println!("flip-flop log-likelihood = {ll_legacy}");
    match fit(&data, false) {
        Ok(report) if !report.degenerate => {
            match log_likelihood(&report.params, &data) {
                Ok(ll_closed) => println!("closed-form log-likelihood = {ll_closed}"),
                Err(e) => println!("closed-form log-likelihood unavailable: {e}"),
            }
        }
        Ok(_) => println!("closed-form log-likelihood unavailable: degenerate samples"),
        Err(e) => println!("closed-form log-likelihood unavailable: {e}"),
    }
    if let Some(path) = out {
        io::write_legacy_params(path, &legacy)?;
        println!("legacy factors written to {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_consistency(
    shape: &[usize],
    t_list: &[usize],
    trials: usize,
    seed: u64,
    bessel: bool,
    out: &Path,
) -> Result<()> {
    let rows = harness::run_with_thread_cap(|| {
        harness::consistency(shape, t_list, trials, seed, bessel)
    })??;
    write_csv(
        out,
        "parameter,T,trials,variance",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{}",
                r.parameter,
                r.sample_count,
                r.trials,
                fmt17(r.variance)
            )
        }),
    )?;
    // per-parameter slope summary on stdout
    for label in harness::parameter_labels(shape.len()) {
        let points: Vec<(usize, f64)> = rows
            .iter()
            .filter(|r| r.parameter == label)
            .map(|r| (r.sample_count, r.variance))
            .collect();
        if points.len() >= 2 {
            println!("{label}: log-log slope {:.3}", log_log_slope(&points));
        }
    }
    println!("estimation variances written to {}", out.display());
    Ok(())
}

pub fn cmd_params_count_shape(shape: &[usize], out: Option<&Path>) -> Result<()> {
    let counts = param_counts(shape);
    let (mean_full, mean_rank1) = mean_param_counts(shape);
    println!("shape {:?}", shape);
    println!(
        "eta_multi = {}, eta_tensor = {}, ratio = {}",
        counts.eta_multi,
        counts.eta_tensor,
        counts.ratio()
    );
    println!("mean parameters: {mean_full} unstructured vs {mean_rank1} rank-1");
    if let Some(path) = out {
        write_csv(
            path,
            "eta_multi,eta_tensor,ratio,mean_full,mean_rank1",
            std::iter::once(format!(
                "{},{},{},{},{}",
                counts.eta_multi,
                counts.eta_tensor,
                fmt17(counts.ratio()),
                mean_full,
                mean_rank1
            )),
        )?;
        println!("counts written to {}", path.display());
    }
    Ok(())
}

pub fn cmd_params_count_sweep(
    i_range: (usize, usize),
    n_range: (usize, usize),
    out: &Path,
) -> Result<()> {
    if i_range.0 > i_range.1 || n_range.0 > n_range.1 || i_range.0 == 0 || n_range.0 == 0 {
        return Err(Error::InvalidParams(format!(
            "bad sweep ranges I {:?}, N {:?}",
            i_range, n_range
        )));
    }
    let mut rows = Vec::new();
    for i in i_range.0..=i_range.1 {
        for n in n_range.0..=n_range.1 {
            let counts = param_counts(&vec![i; n]);
            rows.push(format!(
                "{},{},{},{},{}",
                i,
                n,
                counts.eta_multi,
                counts.eta_tensor,
                fmt17(counts.ratio())
            ));
        }
    }
    write_csv(out, "I,N,eta_multi,eta_tensor,ratio", rows)?;
    println!("parameter-count sweep written to {}", out.display());
    Ok(())
}

pub fn cmd_analyze(dataset: &Path, topk: Option<usize>, out_dir: &Path) -> Result<()> {
    let data = read_dataset(dataset)?;
    warn_if_unidentifiable(data.shape(), data.len());
    let report = crate::analysis::analyze(&data)?;
    std::fs::create_dir_all(out_dir)?;

    write_csv(
        &out_dir.join("explained_variance.csv"),
        "metric,value",
        [
            format!(
                "rank1_explained_variance,{}",
                fmt17(report.fit.rank1_explained_variance)
            ),
            format!("alpha,{}", fmt17(report.fit.params.alpha())),
            format!("sigma2,{}", fmt17(report.fit.params.sigma2())),
            format!("T,{}", report.fit.sample_count),
        ],
    )?;

    let mut eigenvalue_rows = Vec::new();
    let mut eigenvector_rows = Vec::new();
    for (mode, spectrum) in report.spectra.iter().enumerate() {
        let dim = spectrum.eigenvalues.len();
        let value_count = topk.unwrap_or(dim).min(dim);
        for rank in 0..value_count {
            eigenvalue_rows.push(format!(
                "{},{},{}",
                mode + 1,
                rank + 1,
                fmt17(spectrum.eigenvalues[rank])
            ));
        }
        let vector_count = topk.unwrap_or(2).min(dim);
        for rank in 0..vector_count {
            for index in 0..dim {
                eigenvector_rows.push(format!(
                    "{},{},{},{}",
                    mode + 1,
                    rank + 1,
                    index + 1,
                    fmt17(spectrum.eigenvectors[(index, rank)])
                ));
            }
        }
    }
    write_csv(
        &out_dir.join("eigenvalues.csv"),
        "mode,rank,eigenvalue",
        eigenvalue_rows,
    )?;
    write_csv(
        &out_dir.join("eigenvectors.csv"),
        "mode,rank,index,value",
        eigenvector_rows,
    )?;

    println!(
        "rank-1 explained variance = {}",
        report.fit.rank1_explained_variance
    );
    println!("analysis written to {}", out_dir.display());
    Ok(())
}

pub fn cmd_field_gen(
    kernel_spec: &Path,
    count: usize,
    seed: u64,
    out_params: &Path,
    out_data: &Path,
) -> Result<()> {
    let spec = io::read_kernel_spec(kernel_spec)?;
    let (kernels, grid) = io::kernel_spec_to_field(&spec)?;
    let field = fields::field_to_params(&kernels, &grid)?;
    if field.mean_degenerate {
        eprintln!("warning: a mean axis evaluates to zero on the grid; alpha set to 0");
    }
    io::write_params(out_params, &field.params)?;
    let data = field.params.sample(count, seed)?;
    write_dataset(out_data, &data)?;
    println!(
        "field of shape {:?}: alpha = {}, sigma2 = {}",
        field.params.shape(),
        field.params.alpha(),
        field.params.sigma2()
    );
    println!(
        "ground truth written to {}, {} samples to {}",
        out_params.display(),
        count,
        out_data.display()
    );
    Ok(())
}

pub fn cmd_multi_sample(params_path: &Path, count: usize, seed: u64, prefix: &Path) -> Result<()> {
    let params = io::read_multi_params(params_path)?;
    let data = params.multi_sample(count, seed)?;
    for i in 0..data.num_variates() {
        let path = variate_path(prefix, i + 1);
        write_dataset(&path, data.variate(i))?;
        println!("variate {} written to {}", i + 1, path.display());
    }
    Ok(())
}

pub fn cmd_multi_fit(datasets: &[PathBuf], bessel: bool, out: &Path) -> Result<()> {
    let sets: Vec<SampleSet> = datasets
        .iter()
        .map(|p| read_dataset(p))
        .collect::<Result<_>>()?;
    let data = MultiSampleSet::new(sets)?;
    warn_if_unidentifiable(data.shape(), data.len());
    let params = multi_fit(&data, bessel)?;
    for &(i, j) in params.undefined_pairs() {
        eprintln!(
            "warning: variates {} and {} look uncorrelated; their covariance densities are \
             undefined and the raw cross-moments were stored instead",
            i + 1,
            j + 1
        );
    }
    io::write_multi_params(out, &params)?;
    println!(
        "fitted {} variates of shape {:?} from T = {} samples; parameters written to {}",
        params.num_variates(),
        params.shape(),
        data.len(),
        out.display()
    );
    Ok(())
}

/// `prefix` → `prefix_<variate>.tgtb` (1-based).
pub fn variate_path(prefix: &Path, variate: usize) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(format!("_{variate}.tgtb"));
    prefix.with_file_name(name)
}
