//! Command-line arguments and the validated experiment configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_spectral::SolverConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "sscluster",
    version,
    about = "Sparse spectral clustering experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic block affinity matrix and its labels.
    Gen(GenArgs),
    /// Build a Gaussian affinity matrix from a feature file.
    Affinity(AffinityArgs),
    /// Run one clustering method and write a result record.
    Run(RunArgs),
    /// Score a predicted labelling against ground truth.
    Eval(EvalArgs),
    /// Time sc, ssc and pssc over a grid of problem sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Cluster sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Upper end of the intra-cluster weight range.
    #[arg(long, default_value_t = 1.0)]
    pub intra: f64,
    /// Upper end of the inter-cluster weight range.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Affinity matrix output.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth labels output.
    #[arg(long)]
    pub labels: PathBuf,
}

#[derive(Debug, Args)]
pub struct AffinityArgs {
    /// Feature file, one sample per row.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Sc,
    Ssc,
    Pssc,
    KernelAddition,
    FeatureConcat,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sc => "sc",
            Method::Ssc => "ssc",
            Method::Pssc => "pssc",
            Method::KernelAddition => "kernel-addition",
            Method::FeatureConcat => "feature-concat",
        }
    }

    pub fn uses_alpha(self) -> bool {
        self == Method::Pssc
    }

    pub fn uses_beta(self) -> bool {
        matches!(self, Method::Ssc | Method::Pssc)
    }

    /// Whether the method runs the ADMM solver at all.
    pub fn uses_solver(self) -> bool {
        self.uses_beta()
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub method: Method,
    /// Affinity matrix of one view; repeat for several views.
    #[arg(long)]
    pub affinity: Vec<PathBuf>,
    /// Feature matrix of one view (one sample per row); repeat for several
    /// views.
    #[arg(long)]
    pub features: Vec<PathBuf>,
    /// Ground-truth labels; enables metrics in the record.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub k: usize,
    /// Co-regularization weight; a comma-separated list sweeps a grid.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Sparsity weight; a comma-separated list sweeps a grid.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[arg(long)]
    pub mu0: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub mu_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Number of k-means restarts.
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record output; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth labels.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Problem sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 3)]
    pub views: usize,
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub beta: f64,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Table output (CSV with header); printed to stdout as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings of one `run` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub k: usize,
    /// `None` when the method does not use the weight.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Solver settings; `alpha` and `beta` inside mirror the fields above
    /// (zero when unused).
    pub solver: SolverConfig,
    pub restarts: usize,
    pub seed: u64,
    pub affinity: Vec<PathBuf>,
    pub features: Vec<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Checks flag consistency and fills in defaults. Lists of `alpha` or
    /// `beta` values expand to one configuration per grid point (alpha
    /// outer, beta inner); no point is preferred over another.
    pub fn grid_from_args(args: RunArgs) -> CliResult<Vec<Self>> {
        let m = args.method;
        let usage = |msg: String| Err(CliError::Usage(msg));
        if !args.alpha.is_empty() && !m.uses_alpha() {
            return usage(format!("--alpha only applies to pssc, not {}", m.name()));
        }
        if !args.beta.is_empty() && !m.uses_beta() {
            return usage(format!(
                "--beta only applies to ssc and pssc, not {}",
                m.name()
            ));
        }
        let solver_flags = args.mu0.is_some()
            || args.rho.is_some()
            || args.mu_max.is_some()
            || args.tol.is_some()
            || args.max_iter.is_some();
        if solver_flags && !m.uses_solver() {
            return usage(format!("solver flags do not apply to {}", m.name()));
        }
        if args.k < 1 {
            return usage("--k must be at least 1".into());
        }
        if args.restarts < 1 {
            return usage("--restarts must be at least 1".into());
        }

        let inputs = args.affinity.len() + args.features.len();
        match m {
            Method::Sc | Method::Ssc if inputs != 1 => {
                return usage(format!(
                    "{} takes exactly one --affinity or --features input, got {inputs}",
                    m.name()
                ))
            }
            Method::Pssc | Method::KernelAddition if inputs < 2 => {
                return usage(format!(
                    "{} needs at least two views, got {inputs}",
                    m.name()
                ))
            }
            Method::FeatureConcat if !args.affinity.is_empty() || args.features.len() < 2 => {
                return usage(
                    "feature-concat needs at least two --features views and no --affinity".into(),
                )
            }
            _ => {}
        }

        let defaults = SolverConfig::default();
        let axis = |used: bool, given: &[f64], default: f64| -> Vec<Option<f64>> {
            match (used, given.is_empty()) {
                (false, _) => vec![None],
                (true, true) => vec![Some(default)],
                (true, false) => given.iter().copied().map(Some).collect(),
            }
        };
        let alphas = axis(m.uses_alpha(), &args.alpha, defaults.alpha);
        let betas = axis(m.uses_beta(), &args.beta, defaults.beta);
        let mut grid = Vec::with_capacity(alphas.len() * betas.len());
        for &alpha in &alphas {
            for &beta in &betas {
                let solver = SolverConfig {
                    alpha: alpha.unwrap_or(0.0),
                    beta: beta.unwrap_or(0.0),
                    mu0: args.mu0.unwrap_or(defaults.mu0),
                    rho_growth: args.rho.unwrap_or(defaults.rho_growth),
                    mu_max: args.mu_max.unwrap_or(defaults.mu_max),
                    tol: args.tol.unwrap_or(defaults.tol),
                    max_iter: args.max_iter.unwrap_or(defaults.max_iter),
                };
                solver.validate()?;
                grid.push(Self {
                    method: m,
                    k: args.k,
                    alpha,
                    beta,
                    solver,
                    restarts: args.restarts,
                    seed: args.seed,
                    affinity: args.affinity.clone(),
                    features: args.features.clone(),
                    labels: args.labels.clone(),
                    out: args.out.clone(),
                });
            }
        }
        Ok(grid)
    }
}
