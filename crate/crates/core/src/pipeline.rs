//! End-to-end clustering drivers.
//!
//! Every method reduces to: build Laplacian(s) → obtain an `n × k` spectral
//! embedding per view → normalize rows → concatenate views → k-means.
//! Classical spectral clustering takes the bottom eigenvectors of `L`; the
//! sparse variants take the top eigenvectors of the ADMM solution `P*`.

use std::borrow::Borrow;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::admm::{solve_pssc, MultiViewProblem, SolverConfig, SolverResult};
use crate::error::{Error, Result};
use crate::graph::{
    gaussian_affinity, normalized_laplacian, AffinityMatrix, FeatureMatrix, NormalizedLaplacian,
};
use crate::kmeans::{best_run, kmeans_runs, KMeansRun};
use crate::linalg::{eig_sym, SymmetricMatrix};
use crate::partition::Partition;

/// Relative gap below which eigenvalues `k` and `k+1` count as tied.
const TIE_TOL: f64 = 1e-10;
const ZERO_ROW_TOL: f64 = 1e-12;

/// `n × k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub matrix: DMatrix<f64>,
    /// Set when the `k`-th and `(k+1)`-th eigenvalues tie, so the spanned
    /// subspace is not uniquely determined.
    pub ambiguous: bool,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn k(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Embedding with every nonzero row scaled to unit length.
#[derive(Debug, Clone, PartialEq)]
pub struct RowNormalizedEmbedding {
    pub matrix: DMatrix<f64>,
    /// Rows whose norm was below `1e-12`; they are left as zeros.
    pub zero_rows: Vec<usize>,
}

impl Borrow<DMatrix<f64>> for Embedding {
    fn borrow(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl Borrow<DMatrix<f64>> for RowNormalizedEmbedding {
    fn borrow(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// Bottom-`k` eigenvectors of `L` (smallest eigenvalue first).
pub fn sc_embedding(l: &NormalizedLaplacian, k: usize) -> Result<Embedding> {
    let n = l.dim();
    check_k(k, n)?;
    let eig = eig_sym(l)?;
    let mut matrix = DMatrix::zeros(n, k);
    for c in 0..k {
        matrix.set_column(c, &eig.eigenvectors.column(n - 1 - c));
    }
    let (edge, next) = (eig.eigenvalues[n - k], eig.eigenvalues[n - k - 1]);
    let ambiguous = (next - edge).abs() <= TIE_TOL * edge.abs().max(1.0);
    Ok(Embedding { matrix, ambiguous })
}

/// Top-`k` eigenvectors of `P` (largest eigenvalue first). A tie between
/// eigenvalues `k` and `k+1` is logged and flagged, not treated as an error.
pub fn embedding_from_p(p: &SymmetricMatrix, k: usize) -> Result<Embedding> {
    let n = p.dim();
    check_k(k, n)?;
    let eig = eig_sym(p)?;
    let matrix = eig.eigenvectors.columns(0, k).into_owned();
    let (edge, next) = (eig.eigenvalues[k - 1], eig.eigenvalues[k]);
    let ambiguous = (edge - next).abs() <= TIE_TOL * edge.abs().max(1.0);
    if ambiguous {
        log::warn!(
            "eigenvalues {k} and {} of P tie ({edge:e}); embedding is not unique",
            k + 1
        );
    }
    Ok(Embedding { matrix, ambiguous })
}

pub fn row_normalize(u: &Embedding) -> RowNormalizedEmbedding {
    let mut matrix = u.matrix.clone();
    let mut zero_rows = Vec::new();
    for (i, mut row) in matrix.row_iter_mut().enumerate() {
        let norm = row.norm();
        if norm < ZERO_ROW_TOL {
            row.fill(0.0);
            zero_rows.push(i);
        } else {
            row /= norm;
        }
    }
    if !zero_rows.is_empty() {
        log::warn!(
            "{} embedding rows are zero and stay unnormalized",
            zero_rows.len()
        );
    }
    RowNormalizedEmbedding { matrix, zero_rows }
}

/// Column-wise concatenation of per-view embeddings, in view order.
pub fn concat_embeddings<E: Borrow<DMatrix<f64>>>(views: &[E]) -> Result<DMatrix<f64>> {
    let first = views
        .first()
        .ok_or_else(|| Error::InvalidArgument("no embeddings to concatenate".into()))?
        .borrow();
    let n = first.nrows();
    let cols: usize = views.iter().map(|v| v.borrow().ncols()).sum();
    let mut out = DMatrix::zeros(n, cols);
    let mut c = 0;
    for v in views {
        let v = v.borrow();
        if v.nrows() != n {
            return Err(Error::Dimension(format!(
                "embeddings disagree on row count: {n} vs {}",
                v.nrows()
            )));
        }
        out.columns_mut(c, v.ncols()).copy_from(v);
        c += v.ncols();
    }
    Ok(out)
}

/// k-means settings shared by all pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterOptions {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
        }
    }
}

/// Wall-clock time spent in each pipeline stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub laplacian: Duration,
    pub solver: Duration,
    pub embedding: Duration,
    pub kmeans: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.laplacian + self.solver + self.embedding + self.kmeans
    }
}

/// Points ready for k-means, plus diagnostics from the stages that produced
/// them.
#[derive(Debug, Clone)]
pub struct PreparedPoints {
    pub points: DMatrix<f64>,
    pub solver: Option<SolverResult>,
    pub ambiguous: bool,
    pub zero_rows: usize,
    pub timings: StageTimings,
}

/// Outcome of a full pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub partition: Partition,
    pub runs: Vec<KMeansRun>,
    pub prepared: PreparedPoints,
}

impl PreparedPoints {
    /// Runs the k-means stage and keeps every restart.
    pub fn cluster(mut self, k: usize, opts: &ClusterOptions) -> Result<PipelineOutput> {
        let start = Instant::now();
        let runs = kmeans_runs(&self.points, k, opts.restarts, opts.seed)?;
        self.timings.kmeans = start.elapsed();
        let partition = best_run(&runs).expect("restarts >= 1").partition.clone();
        Ok(PipelineOutput {
            partition,
            runs,
            prepared: self,
        })
    }
}

fn laplacians(ws: &[AffinityMatrix]) -> Result<Vec<NormalizedLaplacian>> {
    let n = ws
        .first()
        .ok_or_else(|| Error::InvalidArgument("at least one view is required".into()))?
        .dim();
    if let Some(w) = ws.iter().find(|w| w.dim() != n) {
        return Err(Error::Dimension(format!(
            "views disagree on size: {n} vs {}",
            w.dim()
        )));
    }
    Ok(ws.iter().map(normalized_laplacian).collect())
}

/// Spectral-clustering embedding of `w`, row-normalized.
pub fn prepare_sc(w: &AffinityMatrix, k: usize) -> Result<PreparedPoints> {
    let mut timings = StageTimings::default();
    let t = Instant::now();
    let l = normalized_laplacian(w);
    timings.laplacian = t.elapsed();
    let t = Instant::now();
    let u = sc_embedding(&l, k)?;
    let normalized = row_normalize(&u);
    timings.embedding = t.elapsed();
    Ok(PreparedPoints {
        zero_rows: normalized.zero_rows.len(),
        points: normalized.matrix,
        solver: None,
        ambiguous: u.ambiguous,
        timings,
    })
}

/// Solves the (multi-view) sparse program and embeds every view's solution.
/// With a single view this is the single-view sparse pipeline, regardless
/// of `config.alpha`.
pub fn prepare_sparse(
    ws: &[AffinityMatrix],
    k: usize,
    config: &SolverConfig,
) -> Result<PreparedPoints> {
    let mut timings = StageTimings::default();
    let t = Instant::now();
    let ls = laplacians(ws)?;
    timings.laplacian = t.elapsed();

    let config = if ls.len() == 1 {
        SolverConfig {
            alpha: 0.0,
            ..config.clone()
        }
    } else {
        config.clone()
    };
    let problem = MultiViewProblem::new(ls, k)?;
    let t = Instant::now();
    let result = solve_pssc(&problem, &config)?;
    timings.solver = t.elapsed();

    let t = Instant::now();
    let mut ambiguous = false;
    let mut zero_rows = 0;
    let mut views = Vec::with_capacity(result.p_star.len());
    for p in &result.p_star {
        let u = embedding_from_p(p, k)?;
        ambiguous |= u.ambiguous;
        let normalized = row_normalize(&u);
        zero_rows += normalized.zero_rows.len();
        views.push(normalized);
    }
    let points = concat_embeddings(&views)?;
    timings.embedding = t.elapsed();
    Ok(PreparedPoints {
        points,
        solver: Some(result),
        ambiguous,
        zero_rows,
        timings,
    })
}

/// Classical spectral clustering.
pub fn run_sc(w: &AffinityMatrix, k: usize, opts: &ClusterOptions) -> Result<Partition> {
    Ok(prepare_sc(w, k)?.cluster(k, opts)?.partition)
}

/// Sparse spectral clustering with ℓ1 weight `beta`.
pub fn run_ssc(
    w: &AffinityMatrix,
    k: usize,
    beta: f64,
    config: &SolverConfig,
    opts: &ClusterOptions,
) -> Result<Partition> {
    let config = SolverConfig {
        beta,
        ..config.clone()
    };
    Ok(prepare_sparse(std::slice::from_ref(w), k, &config)?
        .cluster(k, opts)?
        .partition)
}

/// Pairwise sparse spectral clustering over several views.
pub fn run_pssc(
    ws: &[AffinityMatrix],
    k: usize,
    alpha: f64,
    beta: f64,
    config: &SolverConfig,
    opts: &ClusterOptions,
) -> Result<Partition> {
    let config = SolverConfig {
        alpha,
        beta,
        ..config.clone()
    };
    Ok(prepare_sparse(ws, k, &config)?.cluster(k, opts)?.partition)
}

/// Kernel-addition baseline: spectral clustering on `Σ_i W_i`.
pub fn prepare_kernel_addition(ws: &[AffinityMatrix], k: usize) -> Result<PreparedPoints> {
    if ws.len() < 2 {
        return Err(Error::InvalidArgument(
            "kernel addition needs at least two views".into(),
        ));
    }
    prepare_sc(&AffinityMatrix::sum(ws)?, k)
}

/// Feature-concatenation baseline: spectral clustering on the Gaussian
/// affinity of the stacked features.
pub fn prepare_feature_concat(xs: &[FeatureMatrix], k: usize) -> Result<PreparedPoints> {
    if xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "feature concatenation needs at least two views".into(),
        ));
    }
    let joint = FeatureMatrix::concat(xs)?;
    prepare_sc(&gaussian_affinity(&joint)?, k)
}
