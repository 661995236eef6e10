use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use tengauss_cli::{commands, exit_code, Error, Result};

/// Tensor-valued Gaussian toolkit: Kronecker-separable sampling,
/// closed-form maximum likelihood estimation and Monte Carlo experiments.
///
/// Every command is deterministic given its full flag set including --seed.
/// The TG_THREADS environment variable caps internal parallelism without
/// changing any output. Exit codes: 0 success, 1 domain error
/// (validation/degeneracy), 2 format or I/O error.
#[derive(Parser)]
#[command(name = "tengauss", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Bessel's correction (on by default); --no-bessel reports the raw
/// maximum likelihood variance instead.
#[derive(Args, Clone, Copy)]
struct BesselFlag {
    /// Apply Bessel's correction T/(T-1) to the variance estimate
    #[arg(long, overrides_with = "no_bessel", action = ArgAction::SetTrue)]
    bessel: bool,
    /// Report the uncorrected maximum likelihood variance
    #[arg(long, action = ArgAction::SetTrue)]
    no_bessel: bool,
}

impl BesselFlag {
    fn enabled(self) -> bool {
        !self.no_bessel
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from a parameter file into a TGTB dataset
    Sample {
        /// Parameter file (JSON)
        params: PathBuf,
        /// Number of samples T
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output dataset path
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form maximum likelihood fit of a dataset
    Fit {
        dataset: PathBuf,
        #[command(flatten)]
        bessel: BesselFlag,
        /// Write the estimation report here (JSON)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log-density of every sample in a dataset under given parameters
    Logpdf {
        /// Parameter file (JSON)
        params: PathBuf,
        dataset: PathBuf,
        /// Write per-sample values as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Legacy flip-flop covariance estimation (comparison baseline)
    Flipflop {
        dataset: PathBuf,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        /// Relative composition change declaring convergence
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the unconstrained factors here (JSON)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimation-variance experiment over a range of T
    Consistency {
        /// Tensor shape, e.g. 2,3,4
        #[arg(long, value_delimiter = ',')]
        shape: Vec<usize>,
        /// Sample sizes, e.g. 10,100,1000,10000
        #[arg(long = "T-list", value_delimiter = ',', default_value = "10,100,1000,10000")]
        t_list: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        bessel: BesselFlag,
        /// Output CSV (parameter,T,trials,variance)
        #[arg(long)]
        out: PathBuf,
    },
    /// Distinct-parameter counts of the tensor model vs the unstructured one
    ParamsCount {
        /// Evaluate one shape, e.g. 721,1440,20
        #[arg(long, value_delimiter = ',', conflicts_with = "sweep")]
        shape: Option<Vec<usize>>,
        /// Sweep symmetric shapes I^N over the ranges below
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 2)]
        i_min: usize,
        #[arg(long, default_value_t = 10)]
        i_max: usize,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Output CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a dataset and emit explained variance and per-mode eigenstructure
    Analyze {
        dataset: PathBuf,
        /// Keep only the leading k eigenvalues/eigenvectors per mode
        /// (default: all eigenvalues, two eigenvectors)
        #[arg(long)]
        topk: Option<usize>,
        /// Output directory for the CSV set
        #[arg(long)]
        out: PathBuf,
    },
    /// Build ground-truth parameters from a separable-field kernel spec and
    /// sample a dataset from them
    FieldGen {
        /// Kernel/grid specification (JSON)
        kernel_spec: PathBuf,
        /// Number of samples T
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Where to write the ground-truth parameter file
        #[arg(long)]
        out_params: PathBuf,
        /// Where to write the sampled dataset
        #[arg(long)]
        out_data: PathBuf,
    },
    /// Draw joint samples of all variates of a multivariate parameter file
    MultiSample {
        /// Multivariate parameter file (JSON)
        params: PathBuf,
        /// Number of joint samples T
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output prefix; variate i goes to <prefix>_<i>.tgtb
        #[arg(long)]
        out: PathBuf,
    },
    /// Joint maximum likelihood fit of M aligned datasets
    MultiFit {
        /// One TGTB dataset per variate, in variate order
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        #[command(flatten)]
        bessel: BesselFlag,
        /// Write the multivariate parameters here (JSON)
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample {
            params,
            count,
            seed,
            out,
        } => commands::cmd_sample(&params, count, seed, &out),
        Command::Fit {
            dataset,
            bessel,
            out,
        } => commands::cmd_fit(&dataset, bessel.enabled(), out.as_deref()),
        Command::Logpdf {
            params,
            dataset,
            out,
        } => commands::cmd_logpdf(&params, &dataset, out.as_deref()),
        Command::Flipflop {
            dataset,
            max_iters,
            tol,
            out,
        } => commands::cmd_flipflop(&dataset, max_iters, tol, out.as_deref()),
        Command::Consistency {
            shape,
            t_list,
            trials,
            seed,
            bessel,
            out,
        } => commands::cmd_consistency(&shape, &t_list, trials, seed, bessel.enabled(), &out),
        Command::ParamsCount {
            shape,
            sweep,
            i_min,
            i_max,
            n_min,
            n_max,
            out,
        } => match (shape, sweep) {
            (Some(shape), false) => commands::cmd_params_count_shape(&shape, out.as_deref()),
            (None, true) => {
                let out = out.ok_or_else(|| {
                    Error::InvalidParams("--sweep requires --out <csv>".into())
                })?;
                commands::cmd_params_count_sweep((i_min, i_max), (n_min, n_max), &out)
            }
            _ => Err(Error::InvalidParams(
                "pass exactly one of --shape or --sweep".into(),
            )),
        },
        Command::Analyze { dataset, topk, out } => commands::cmd_analyze(&dataset, topk, &out),
        Command::FieldGen {
            kernel_spec,
            count,
            seed,
            out_params,
            out_data,
        } => commands::cmd_field_gen(&kernel_spec, count, seed, &out_params, &out_data),
        Command::MultiSample {
            params,
            count,
            seed,
            out,
        } => commands::cmd_multi_sample(&params, count, seed, &out),
        Command::MultiFit {
            datasets,
            bessel,
            out,
        } => commands::cmd_multi_fit(&datasets, bessel.enabled(), &out),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}
