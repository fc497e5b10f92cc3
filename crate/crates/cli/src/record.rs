//! Result records as `key=value` lines.
//!
//! Schema (one entry per line, in this order; lists are comma separated):
//!
//! ```text
//! format=sscluster-run-1
//! config.method, config.k, config.alpha, config.beta   (alpha/beta: number or "none")
//! config.mu0, config.rho_growth, config.mu_max, config.tol, config.max_iter
//! config.restarts, config.seed, config.affinity, config.features, config.labels
//! data.n, data.views
//! solver.iterations, solver.converged, solver.final_residual,
//! solver.final_objective, solver.final_mu, solver.residual_history
//!                                                  (omitted for sc and the baselines)
//! embedding.ambiguous, embedding.zero_rows
//! timing.affinity_s (input loading and kernel), timing.laplacian_s, timing.solver_s, timing.embedding_s,
//! timing.kmeans_s, timing.total_s
//! kmeans.inertia          (per restart)
//! kmeans.best_restart     (lowest inertia, earliest on ties)
//! restart.<r>.<metric>    (per restart; only with --labels)
//! metric.<metric>.mean, metric.<metric>.std   (population std over all restarts)
//! best.<metric>           (metrics of the reported partition)
//! partition               (labels of the lowest-inertia restart)
//! ```
//!
//! A grid sweep (several `--alpha` or `--beta` values) writes one record per
//! grid point, separated by a blank line.
//!
//! `<metric>` is one of `f_score`, `precision`, `recall`, `nmi`,
//! `adjusted_rand`, `clustering_error`. Floats use shortest round-trip
//! formatting.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

use sparse_spectral::{MetricReport, Partition};

use crate::config::ExperimentConfig;

pub const FORMAT: &str = "sscluster-run-1";

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub final_objective: f64,
    pub final_mu: f64,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    pub affinity: Duration,
    pub laplacian: Duration,
    pub solver: Duration,
    pub embedding: Duration,
    pub kmeans: Duration,
}

impl Timings {
    pub fn total(&self) -> Duration {
        self.affinity + self.laplacian + self.solver + self.embedding + self.kmeans
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub n: usize,
    pub views: usize,
    pub solver: Option<SolverSummary>,
    pub ambiguous: bool,
    pub zero_rows: usize,
    pub timings: Timings,
    pub inertias: Vec<f64>,
    pub best_restart: usize,
    pub partition: Partition,
    /// Per-restart metrics, present when ground truth was supplied.
    pub restart_metrics: Option<Vec<MetricReport>>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn paths(p: &[PathBuf]) -> String {
    join(&p.iter().map(|p| p.display()).collect::<Vec<_>>())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

impl RunRecord {
    /// `(metric, mean, std)` over the restarts.
    pub fn summary(&self) -> Option<Vec<(&'static str, f64, f64)>> {
        let reports = self.restart_metrics.as_ref()?;
        let names = reports.first()?.entries().map(|(name, _)| name);
        Some(
            names
                .iter()
                .enumerate()
                .map(|(i, &name)| {
                    let values: Vec<f64> = reports.iter().map(|r| r.entries()[i].1).collect();
                    let (mean, std) = mean_std(&values);
                    (name, mean, std)
                })
                .collect(),
        )
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            writeln!(out, "{key}={value}").unwrap();
        };
        put("format", FORMAT.into());
        put("config.method", c.method.name().into());
        put("config.k", c.k.to_string());
        put("config.alpha", opt(c.alpha));
        put("config.beta", opt(c.beta));
        put("config.mu0", c.solver.mu0.to_string());
        put("config.rho_growth", c.solver.rho_growth.to_string());
        put("config.mu_max", c.solver.mu_max.to_string());
        put("config.tol", c.solver.tol.to_string());
        put("config.max_iter", c.solver.max_iter.to_string());
        put("config.restarts", c.restarts.to_string());
        put("config.seed", c.seed.to_string());
        put("config.affinity", paths(&c.affinity));
        put("config.features", paths(&c.features));
        put(
            "config.labels",
            c.labels
                .as_ref()
                .map_or(String::new(), |p| p.display().to_string()),
        );
        put("data.n", self.n.to_string());
        put("data.views", self.views.to_string());
        if let Some(s) = &self.solver {
            put("solver.iterations", s.iterations.to_string());
            put("solver.converged", s.converged.to_string());
            put("solver.final_residual", s.final_residual.to_string());
            put("solver.final_objective", s.final_objective.to_string());
            put("solver.final_mu", s.final_mu.to_string());
            put("solver.residual_history", join(&s.residual_history));
        }
        put("embedding.ambiguous", self.ambiguous.to_string());
        put("embedding.zero_rows", self.zero_rows.to_string());
        let t = &self.timings;
        put("timing.affinity_s", t.affinity.as_secs_f64().to_string());
        put("timing.laplacian_s", t.laplacian.as_secs_f64().to_string());
        put("timing.solver_s", t.solver.as_secs_f64().to_string());
        put("timing.embedding_s", t.embedding.as_secs_f64().to_string());
        put("timing.kmeans_s", t.kmeans.as_secs_f64().to_string());
        put("timing.total_s", t.total().as_secs_f64().to_string());
        put("kmeans.inertia", join(&self.inertias));
        put("kmeans.best_restart", self.best_restart.to_string());
        if let Some(reports) = &self.restart_metrics {
            for (r, report) in reports.iter().enumerate() {
                for (name, v) in report.entries() {
                    put(&format!("restart.{r}.{name}"), v.to_string());
                }
            }
            for (name, mean, std) in self.summary().unwrap_or_default() {
                put(&format!("metric.{name}.mean"), mean.to_string());
                put(&format!("metric.{name}.std"), std.to_string());
            }
            for (name, v) in reports[self.best_restart].entries() {
                put(&format!("best.{name}"), v.to_string());
            }
        }
        put("partition", join(self.partition.labels()));
        out
    }
}

/// Parses `key=value` lines; later keys overwrite earlier ones.
pub fn parse_key_values(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Splits a file holding several records (blank-line separated).
pub fn parse_records(text: &str) -> Vec<BTreeMap<String, String>> {
    text.split("\n\n")
        .map(parse_key_values)
        .filter(|r| !r.is_empty())
        .collect()
}

/// Renders a metric report as `key=value` lines.
pub fn render_metrics(report: &MetricReport) -> String {
    report
        .entries()
        .iter()
        .map(|(name, v)| format!("{name}={v}\n"))
        .collect()
}
