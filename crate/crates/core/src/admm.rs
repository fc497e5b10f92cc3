//! ADMM for the convex pairwise sparse spectral clustering program
//!
//! ```text
//! min_{P_1..P_m}  Σ_i ⟨P_i, L_i⟩ + β‖P_i‖₁ + (α/2) Σ_{i≠j} ‖P_i − P_j‖²_F
//! s.t.            0 ⪯ P_i ⪯ I,  Tr(P_i) = k
//! ```
//!
//! Each view gets a Fantope-constrained copy `Q_i` with the consensus
//! constraint `P_i = Q_i` and dual `Y_i`. One iteration runs the P-phase
//! (soft thresholding), the Q-phase (Fantope projection), the dual ascent
//! step and the penalty growth `μ ← min(ρμ, μ_max)`. Within a phase the
//! views are updated independently, so they are mapped in parallel.
//!
//! Single-view sparse spectral clustering is the case `m = 1`, `α = 0`.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;
use crate::linalg::{shrink, SymmetricMatrix};
use crate::par;
use crate::projection::project_symmetric;

/// ADMM parameters. `alpha` weighs the pairwise view agreement, `beta` the
/// ℓ1 sparsity penalty.
///
/// The penalty grows geometrically, so the total step length `Σ 1/μ_t` is
/// finite. When `alpha · (m − 1)` is large next to `mu0`, the P-step is
/// damped by that coupling and the iterates can freeze slightly short of the
/// optimum (objective still accurate to about `1e-6` relative). A slower
/// `rho_growth` such as `1.02` avoids this at the cost of more iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    /// Initial penalty `μ₀`.
    pub mu0: f64,
    /// Penalty growth factor `ρ > 1`.
    pub rho_growth: f64,
    pub mu_max: f64,
    /// Stop once the relative primal residual drops to this level.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-1,
            beta: 1e-4,
            mu0: 1e-2,
            rho_growth: 1.1,
            mu_max: 1e10,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail(format!("alpha must be finite and >= 0, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return fail(format!("beta must be finite and >= 0, got {}", self.beta));
        }
        if !(self.mu0 > 0.0 && self.mu0.is_finite()) {
            return fail(format!("mu0 must be > 0, got {}", self.mu0));
        }
        if !(self.rho_growth > 1.0 && self.rho_growth.is_finite()) {
            return fail(format!("rho must be > 1, got {}", self.rho_growth));
        }
        if self.mu_max.is_nan() || self.mu_max < self.mu0 {
            return fail(format!(
                "mu_max ({}) must be >= mu0 ({})",
                self.mu_max, self.mu0
            ));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return fail(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iter < 1 {
            return fail("max_iter must be >= 1".into());
        }
        Ok(())
    }
}

/// The per-view Laplacians and the target number of clusters.
#[derive(Debug, Clone)]
pub struct MultiViewProblem {
    laplacians: Vec<NormalizedLaplacian>,
    k: usize,
}

impl MultiViewProblem {
    pub fn new(laplacians: Vec<NormalizedLaplacian>, k: usize) -> Result<Self> {
        let first = laplacians
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least one view is required".into()))?;
        let n = first.dim();
        if let Some(l) = laplacians.iter().find(|l| l.dim() != n) {
            return Err(Error::Dimension(format!(
                "views disagree on size: {n} vs {}",
                l.dim()
            )));
        }
        if k < 1 || k >= n {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k < n, got k = {k}, n = {n}"
            )));
        }
        Ok(Self { laplacians, k })
    }

    pub fn laplacians(&self) -> &[NormalizedLaplacian] {
        &self.laplacians
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.laplacians[0].dim()
    }

    pub fn views(&self) -> usize {
        self.laplacians.len()
    }
}

/// ADMM iterate: primal `P_i`, Fantope copies `Q_i`, duals `Y_i`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub p: Vec<SymmetricMatrix>,
    pub q: Vec<SymmetricMatrix>,
    pub y: Vec<SymmetricMatrix>,
    pub mu: f64,
    pub iter: usize,
}

impl SolverState {
    /// `P_i = Q_i = (k/n)·I` (the Fantope barycenter), `Y_i = 0`, `μ = μ₀`.
    pub fn initial(problem: &MultiViewProblem, config: &SolverConfig) -> Self {
        let n = problem.n();
        let m = problem.views();
        let center =
            SymmetricMatrix::from_exact(DMatrix::identity(n, n) * (problem.k() as f64 / n as f64));
        Self {
            p: vec![center.clone(); m],
            q: vec![center; m],
            y: vec![SymmetricMatrix::zeros(n); m],
            mu: config.mu0,
            iter: 0,
        }
    }

    /// `max_i ‖P_i − Q_i‖_F / max(1, ‖Q_i‖_F)`.
    pub fn primal_residual(&self) -> f64 {
        self.p
            .iter()
            .zip(&self.q)
            .map(|(p, q)| (p.as_matrix() - q.as_matrix()).norm() / q.frobenius_norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Outcome of [`solve_pssc`]. `p_star` holds the final Fantope-feasible
/// `Q_i` iterates, which coincide with `P_i` at convergence.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub p_star: Vec<SymmetricMatrix>,
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    /// Per-iteration `max_i ‖Q_i − Q_i^prev‖_F / max(1, ‖Q_i^prev‖_F)`.
    pub change_history: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub final_mu: f64,
    pub elapsed: Duration,
}

impl SolverResult {
    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_history.last().copied().unwrap_or(f64::NAN)
    }

    /// Wall-clock time per iteration.
    pub fn time_per_iteration(&self) -> Duration {
        self.elapsed / self.iterations.max(1) as u32
    }
}

fn denominator(m: usize, alpha: f64, mu: f64) -> Result<f64> {
    let c = alpha * (m as f64 - 1.0) + mu;
    if c.is_nan() || c <= 0.0 {
        return Err(Error::Config(format!(
            "alpha(m-1) + mu must be positive, got {c}"
        )));
    }
    Ok(c)
}

fn sum_of(mats: &[SymmetricMatrix]) -> DMatrix<f64> {
    let n = mats[0].dim();
    mats.iter()
        .fold(DMatrix::zeros(n, n), |acc, m| acc + m.as_matrix())
}

/// P-phase: for every view,
/// `P_i = S_{β/c}((α Σ_{j≠i} Q_j + μ Q_i − L_i − Y_i) / c)` with
/// `c = α(m−1) + μ`.
pub fn update_p(
    state: &SolverState,
    problem: &MultiViewProblem,
    config: &SolverConfig,
) -> Result<Vec<SymmetricMatrix>> {
    let m = problem.views();
    let c = denominator(m, config.alpha, state.mu)?;
    let level = config.beta / c;
    let total = sum_of(&state.q);
    let mu = state.mu;
    let alpha = config.alpha;
    Ok(par::map_range(m, |i| {
        let q = state.q[i].as_matrix();
        let l = problem.laplacians[i].as_matrix();
        let y = state.y[i].as_matrix();
        let out = DMatrix::from_fn(q.nrows(), q.ncols(), |r, s| {
            let others = if m > 1 {
                total[(r, s)] - q[(r, s)]
            } else {
                0.0
            };
            let arg = (alpha * others + mu * q[(r, s)] - l[(r, s)] - y[(r, s)]) / c;
            shrink(arg, level)
        });
        SymmetricMatrix::from_exact(out)
    }))
}

/// Q-phase: for every view,
/// `Q_i = Π_Fantope((α Σ_{j≠i} P_j + μ P_i + Y_i) / c, k)`.
pub fn update_q(
    state: &SolverState,
    problem: &MultiViewProblem,
    config: &SolverConfig,
) -> Result<Vec<SymmetricMatrix>> {
    let m = problem.views();
    let c = denominator(m, config.alpha, state.mu)?;
    let total = sum_of(&state.p);
    let mu = state.mu;
    let alpha = config.alpha;
    par::map_range(m, |i| {
        let p = state.p[i].as_matrix();
        let y = state.y[i].as_matrix();
        let arg = DMatrix::from_fn(p.nrows(), p.ncols(), |r, s| {
            let others = if m > 1 {
                total[(r, s)] - p[(r, s)]
            } else {
                0.0
            };
            (alpha * others + mu * p[(r, s)] + y[(r, s)]) / c
        });
        project_symmetric(&SymmetricMatrix::from_exact(arg), problem.k)
    })
    .into_iter()
    .collect()
}

/// Dual ascent: `Y_i ← Y_i + μ(P_i − Q_i)`.
pub fn update_duals(state: &SolverState) -> Vec<SymmetricMatrix> {
    state
        .y
        .iter()
        .zip(state.p.iter().zip(&state.q))
        .map(|(y, (p, q))| {
            SymmetricMatrix::from_exact(y.as_matrix() + (p.as_matrix() - q.as_matrix()) * state.mu)
        })
        .collect()
}

/// `μ ← min(ρμ, μ_max)`.
pub fn step_penalty(state: &SolverState, config: &SolverConfig) -> f64 {
    (config.rho_growth * state.mu).min(config.mu_max)
}

/// Objective of the convex multi-view program at `views`:
/// `Σ_i ⟨P_i, L_i⟩ + β‖P_i‖₁ + (α/2) Σ_{i≠j} ‖P_i − P_j‖²_F`.
pub fn objective(
    views: &[SymmetricMatrix],
    problem: &MultiViewProblem,
    alpha: f64,
    beta: f64,
) -> f64 {
    let mut total = 0.0;
    for (p, l) in views.iter().zip(&problem.laplacians) {
        total += p.inner(l) + beta * p.l1_norm();
    }
    if alpha > 0.0 {
        // Ordered pairs: each unordered pair counted twice, halved by α/2.
        for i in 0..views.len() {
            for j in (i + 1)..views.len() {
                total += alpha * (views[i].as_matrix() - views[j].as_matrix()).norm_squared();
            }
        }
    }
    total
}

fn relative_change(prev: &[SymmetricMatrix], next: &[SymmetricMatrix]) -> f64 {
    prev.iter()
        .zip(next)
        .map(|(a, b)| (b.as_matrix() - a.as_matrix()).norm() / a.frobenius_norm().max(1.0))
        .fold(0.0, f64::max)
}

/// Runs ADMM until both the relative primal residual and the relative
/// change of the `Q` iterates reach `config.tol`, or `config.max_iter`
/// iterations elapse. Non-convergence is reported through
/// [`SolverResult::converged`], not as an error.
pub fn solve_pssc(problem: &MultiViewProblem, config: &SolverConfig) -> Result<SolverResult> {
    config.validate()?;
    let start = Instant::now();
    let mut state = SolverState::initial(problem, config);
    let mut residual_history = Vec::new();
    let mut change_history = Vec::new();
    let mut objective_history = Vec::new();
    let mut converged = false;

    while state.iter < config.max_iter {
        state.p = update_p(&state, problem, config)?;
        let q_next = update_q(&state, problem, config)?;
        let change = relative_change(&state.q, &q_next);
        state.q = q_next;
        state.y = update_duals(&state);
        state.iter += 1;

        let residual = state.primal_residual();
        residual_history.push(residual);
        change_history.push(change);
        objective_history.push(objective(&state.q, problem, config.alpha, config.beta));
        if state.iter.is_multiple_of(50) {
            log::debug!(
                "admm iter {}: residual {residual:.3e}, mu {:.3e}",
                state.iter,
                state.mu
            );
        }
        // The primal residual alone can vanish while Q is still travelling
        // (e.g. a linear objective with geometric penalty growth), so the
        // iterate change must settle too.
        if residual <= config.tol && change <= config.tol {
            converged = true;
            break;
        }
        state.mu = step_penalty(&state, config);
    }
    if !converged {
        log::warn!(
            "admm stopped at max_iter = {} with residual {:.3e}",
            config.max_iter,
            residual_history.last().copied().unwrap_or(f64::NAN)
        );
    }

    Ok(SolverResult {
        p_star: state.q,
        iterations: state.iter,
        converged,
        residual_history,
        change_history,
        objective_history,
        final_mu: state.mu,
        elapsed: start.elapsed(),
    })
}

/// Single-view sparse spectral clustering program: [`solve_pssc`] with
/// `m = 1` and `α = 0`. The solution is `result.p_star[0]`.
pub fn solve_ssc(
    laplacian: &NormalizedLaplacian,
    k: usize,
    beta: f64,
    config: &SolverConfig,
) -> Result<SolverResult> {
    let problem = MultiViewProblem::new(vec![laplacian.clone()], k)?;
    let config = SolverConfig {
        alpha: 0.0,
        beta,
        ..config.clone()
    };
    solve_pssc(&problem, &config)
}
