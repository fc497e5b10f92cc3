//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use sparse_spectral::pipeline::{
    prepare_feature_concat, prepare_kernel_addition, prepare_sc, prepare_sparse, PipelineOutput,
};
use sparse_spectral::{
    gaussian_affinity, generate_block_problem, AffinityMatrix, ClusterOptions, FeatureMatrix,
    MetricReport, SolverConfig, SyntheticSpec,
};

use crate::config::{
    AffinityArgs, BenchArgs, Command, EvalArgs, ExperimentConfig, GenArgs, Method,
};
use crate::error::{CliError, CliResult};
use crate::io::{format_labels, format_matrix, ingest_labels, ingest_matrix, write_atomic};
use crate::record::{render_metrics, RunRecord, SolverSummary, Timings};

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Gen(args) => cmd_gen(&args),
        Command::Affinity(args) => cmd_affinity(&args),
        Command::Run(args) => {
            let out = args.out.clone();
            let mut records = Vec::new();
            for config in ExperimentConfig::grid_from_args(args)? {
                let record = cmd_run(&config)?;
                if let Some(s) = record.solver.as_ref().filter(|s| !s.converged) {
                    log::warn!(
                        "solver did not converge in {} iterations (residual {:.3e})",
                        s.iterations,
                        s.final_residual
                    );
                }
                records.push(record.render());
            }
            emit(out.as_deref(), &records.join("\n"))
        }
        Command::Eval(args) => {
            let report = cmd_eval(&args)?;
            emit(args.out.as_deref(), &render_metrics(&report))
        }
        Command::Bench(args) => {
            let table = render_bench(&cmd_bench(&args)?);
            print!("{table}");
            match &args.out {
                Some(path) => write_atomic(path, &table),
                None => Ok(()),
            }
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    let spec = SyntheticSpec::new(args.sizes.clone(), args.intra, args.noise, args.seed);
    let (w, truth) = generate_block_problem(&spec)?;
    write_atomic(&args.out, &format_matrix(w.as_matrix()))?;
    write_atomic(&args.labels, &format_labels(&truth))
}

fn load_features(path: &Path) -> CliResult<FeatureMatrix> {
    Ok(FeatureMatrix::from_rows(&ingest_matrix(path)?)?)
}

pub fn cmd_affinity(args: &AffinityArgs) -> CliResult<()> {
    let w = gaussian_affinity(&load_features(&args.features)?)?;
    write_atomic(&args.out, &format_matrix(w.as_matrix()))
}

pub fn cmd_eval(args: &EvalArgs) -> CliResult<MetricReport> {
    let pred = ingest_labels(&args.pred)?;
    let truth = ingest_labels(&args.labels)?;
    if pred.len() != truth.len() {
        return Err(CliError::Usage(format!(
            "{} labels predicted but {} in ground truth",
            pred.len(),
            truth.len()
        )));
    }
    Ok(MetricReport::compute(&pred, &truth)?)
}

/// Loads every view as an affinity matrix (features go through the
/// Gaussian kernel). Ingested affinities have their diagonal zeroed.
fn load_views(config: &ExperimentConfig) -> CliResult<Vec<AffinityMatrix>> {
    let mut views = Vec::new();
    for path in &config.affinity {
        views.push(AffinityMatrix::with_zeroed_diagonal(ingest_matrix(path)?)?);
    }
    for path in &config.features {
        views.push(gaussian_affinity(&load_features(path)?)?);
    }
    Ok(views)
}

fn check_sizes(sizes: &[usize], k: usize) -> CliResult<usize> {
    let n = sizes[0];
    if let Some(&other) = sizes.iter().find(|&&s| s != n) {
        return Err(CliError::Usage(format!(
            "views disagree on the number of samples: {n} vs {other}"
        )));
    }
    if k >= n {
        return Err(CliError::Usage(format!(
            "--k must be below n = {n}, got {k}"
        )));
    }
    Ok(n)
}

/// Runs the configured pipeline and builds its record.
pub fn cmd_run(config: &ExperimentConfig) -> CliResult<RunRecord> {
    let k = config.k;
    let opts = ClusterOptions {
        restarts: config.restarts,
        seed: config.seed,
    };
    let truth = config.labels.as_deref().map(ingest_labels).transpose()?;

    let t = Instant::now();
    let (prepared, n, views) = if config.method == Method::FeatureConcat {
        let xs = config
            .features
            .iter()
            .map(|p| load_features(p))
            .collect::<CliResult<Vec<_>>>()?;
        let sizes: Vec<usize> = xs.iter().map(FeatureMatrix::n_samples).collect();
        let n = check_sizes(&sizes, k)?;
        (prepare_feature_concat(&xs, k)?, n, xs.len())
    } else {
        let ws = load_views(config)?;
        let sizes: Vec<usize> = ws.iter().map(AffinityMatrix::dim).collect();
        let n = check_sizes(&sizes, k)?;
        let prepared = match config.method {
            Method::Sc => prepare_sc(&ws[0], k)?,
            Method::Ssc | Method::Pssc => prepare_sparse(&ws, k, &config.solver)?,
            Method::KernelAddition => prepare_kernel_addition(&ws, k)?,
            Method::FeatureConcat => unreachable!(),
        };
        (prepared, n, ws.len())
    };
    let stages = prepared.timings.laplacian + prepared.timings.solver + prepared.timings.embedding;
    let affinity = t.elapsed().saturating_sub(stages);

    if let Some(truth) = &truth {
        if truth.len() != n {
            return Err(CliError::Usage(format!(
                "labels file has {} entries but the data has {n} samples",
                truth.len()
            )));
        }
    }

    let PipelineOutput {
        partition,
        runs,
        prepared,
    } = prepared.cluster(k, &opts)?;
    let inertias: Vec<f64> = runs.iter().map(|r| r.inertia).collect();
    let best_restart = (0..runs.len())
        .reduce(|b, r| if inertias[r] < inertias[b] { r } else { b })
        .unwrap_or(0);
    let restart_metrics = truth
        .as_ref()
        .map(|t| {
            runs.iter()
                .map(|r| MetricReport::compute(&r.partition, t))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let solver = prepared.solver.as_ref().map(|s| SolverSummary {
        iterations: s.iterations,
        converged: s.converged,
        final_residual: s.final_residual(),
        final_objective: s.final_objective(),
        final_mu: s.final_mu,
        residual_history: s.residual_history.clone(),
    });
    let st = prepared.timings;
    Ok(RunRecord {
        config: config.clone(),
        n,
        views,
        solver,
        ambiguous: prepared.ambiguous,
        zero_rows: prepared.zero_rows,
        timings: Timings {
            affinity,
            laplacian: st.laplacian,
            solver: st.solver,
            embedding: st.embedding,
            kmeans: st.kmeans,
        },
        inertias,
        best_restart,
        partition,
        restart_metrics,
    })
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: &'static str,
    pub n: usize,
    pub iterations: usize,
    pub converged: bool,
    pub per_iteration: Duration,
    pub timings: Timings,
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<Vec<BenchRow>> {
    if args.views < 2 {
        return Err(CliError::Usage("--views must be at least 2".into()));
    }
    let opts = ClusterOptions {
        restarts: args.restarts,
        seed: args.seed,
    };
    let mut rows = Vec::new();
    for &n in &args.n_grid {
        if n < 2 * args.k {
            return Err(CliError::Usage(format!(
                "n = {n} is too small for k = {} clusters of at least two points",
                args.k
            )));
        }
        let mut sizes = vec![n / args.k; args.k];
        sizes[0] += n % args.k;
        let ws = (0..args.views as u64)
            .map(|v| {
                let spec = SyntheticSpec::new(sizes.clone(), 1.0, args.noise, args.seed + v);
                Ok(generate_block_problem(&spec)?.0)
            })
            .collect::<CliResult<Vec<_>>>()?;
        let solver = SolverConfig {
            alpha: args.alpha,
            beta: args.beta,
            ..SolverConfig::default()
        };
        let runs = [
            ("sc", prepare_sc(&ws[0], args.k)?),
            ("ssc", prepare_sparse(&ws[..1], args.k, &solver)?),
            ("pssc", prepare_sparse(&ws, args.k, &solver)?),
        ];
        for (method, prepared) in runs {
            let out = prepared.cluster(args.k, &opts)?;
            let t = out.prepared.timings;
            let (iterations, converged, per_iteration) = match &out.prepared.solver {
                Some(s) => (s.iterations, s.converged, s.time_per_iteration()),
                None => (0, true, Duration::ZERO),
            };
            rows.push(BenchRow {
                method,
                n,
                iterations,
                converged,
                per_iteration,
                timings: Timings {
                    affinity: Duration::ZERO,
                    laplacian: t.laplacian,
                    solver: t.solver,
                    embedding: t.embedding,
                    kmeans: t.kmeans,
                },
            });
        }
    }
    Ok(rows)
}

pub const BENCH_HEADER: &str = "method,n,iterations,converged,per_iteration_ms,laplacian_ms,solver_ms,embedding_ms,kmeans_ms,total_ms";

pub fn render_bench(rows: &[BenchRow]) -> String {
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    let mut out = format!("{BENCH_HEADER}\n");
    for r in rows {
        let t = &r.timings;
        writeln!(
            out,
            "{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.method,
            r.n,
            r.iterations,
            r.converged,
            ms(r.per_iteration),
            ms(t.laplacian),
            ms(t.solver),
            ms(t.embedding),
            ms(t.kmeans),
            ms(t.total())
        )
        .unwrap();
    }
    out
}
