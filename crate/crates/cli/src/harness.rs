//! Monte Carlo consistency harness.
//!
//! For ground-truth parameters fixed by the seed, the harness repeats
//! sample-and-fit trials at each sample size T and reports the estimation
//! variance `E‖θ̂ − θ‖²` of every parameter. Trials run in parallel with
//! per-trial derived seeds; results are bitwise independent of the thread
//! count because each trial's output is keyed by its index and the final
//! reduction runs in index order.

use rayon::prelude::*;
use tengauss_core::estimation::{fit, identifiability_check};
use tengauss_core::rng::{derive_seed, seeded};
use tengauss_core::{Error, Result, TensorGaussianParams};

/// One `(parameter, T)` cell of the consistency experiment.
#[derive(Debug, Clone)]
pub struct ConsistencyRow {
    pub parameter: String,
    pub sample_count: usize,
    pub trials: usize,
    pub variance: f64,
}

/// Parameter labels in report order: `alpha, mu1..muN, sigma2,
/// theta1..thetaN` (modes 1-based).
pub fn parameter_labels(order: usize) -> Vec<String> {
    let mut labels = vec!["alpha".to_string()];
    labels.extend((1..=order).map(|n| format!("mu{n}")));
    labels.push("sigma2".to_string());
    labels.extend((1..=order).map(|n| format!("theta{n}")));
    labels
}

/// Runs the experiment; rows are ordered parameter-major, then by T.
pub fn consistency(
    shape: &[usize],
    t_list: &[usize],
    trials: usize,
    seed: u64,
    bessel: bool,
) -> Result<Vec<ConsistencyRow>> {
    if t_list.is_empty() || trials == 0 {
        return Err(Error::EmptyInput(
            "consistency needs at least one T and one trial".into(),
        ));
    }
    for &t in t_list {
        if !identifiability_check(shape, t) {
            return Err(Error::InvalidParams(format!(
                "shape {:?} is not identifiable at T = {}",
                shape, t
            )));
        }
    }
    let truth = TensorGaussianParams::random(shape, &mut seeded(derive_seed(seed, 0)))?;
    let order = shape.len();
    let labels = parameter_labels(order);
    let per_trial = move |t: usize, trial_seed: u64| -> Result<Vec<f64>> {
        let data = truth.sample(t, trial_seed)?;
        let report = fit(&data, bessel)?;
        let mut errors = Vec::with_capacity(labels_len(order));
        errors.push((report.params.alpha() - truth.alpha()).powi(2));
        for n in 0..order {
            errors.push((report.params.mu(n) - truth.mu(n)).norm_squared());
        }
        errors.push((report.params.sigma2() - truth.sigma2()).powi(2));
        for n in 0..order {
            errors.push((report.params.theta(n) - truth.theta(n)).norm_squared());
        }
        Ok(errors)
    };

    // variance matrix indexed [t_idx][parameter]
    let mut variances = Vec::with_capacity(t_list.len());
    for (t_idx, &t) in t_list.iter().enumerate() {
        let trial_errors: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let global = (t_idx * trials + trial) as u64;
                per_trial(t, derive_seed(seed, 1 + global))
            })
            .collect::<Result<_>>()?;
        let mut mean = vec![0.0; labels_len(order)];
        for errors in &trial_errors {
            for (m, e) in mean.iter_mut().zip(errors) {
                *m += e;
            }
        }
        for m in &mut mean {
            *m /= trials as f64;
        }
        variances.push(mean);
    }

    let mut rows = Vec::with_capacity(labels.len() * t_list.len());
    for (p, label) in labels.iter().enumerate() {
        for (t_idx, &t) in t_list.iter().enumerate() {
            rows.push(ConsistencyRow {
                parameter: label.clone(),
                sample_count: t,
                trials,
                variance: variances[t_idx][p],
            });
        }
    }
    Ok(rows)
}

fn labels_len(order: usize) -> usize {
    2 + 2 * order
}

/// Runs `f` inside a thread pool capped by the `TG_THREADS` environment
/// variable (unset or unparsable means the rayon default).
pub fn run_with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> Result<R> {
    match std::env::var("TG_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Least-squares slope of `ln(variance)` against `ln(T)`.
pub fn log_log_slope(points: &[(usize, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(t, v) in points {
        let x = (t as f64).ln();
        let y = v.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_parameter_major_and_deterministic() {
        let rows = consistency(&[2, 2], &[10, 50], 4, 7, true).unwrap();
        let labels = parameter_labels(2);
        assert_eq!(rows.len(), labels.len() * 2);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.parameter, labels[i / 2]);
            assert_eq!(row.sample_count, if i % 2 == 0 { 10 } else { 50 });
            assert!(row.variance.is_finite());
        }
        let again = consistency(&[2, 2], &[10, 50], 4, 7, true).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.variance.to_bits(), b.variance.to_bits());
        }
    }

    #[test]
    fn unidentifiable_configurations_are_rejected() {
        assert!(consistency(&[5], &[5], 2, 1, true).is_err());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let points: Vec<(usize, f64)> =
            [10usize, 100, 1000].iter().map(|&t| (t, 7.0 / t as f64)).collect();
        assert!((log_log_slope(&points) + 1.0).abs() < 1e-12);
    }
}
