//! Convex sparse spectral clustering (SSC) and pairwise sparse spectral
//! clustering (PSSC) for multi-view data.
//!
//! The embedding matrix `UUᵀ` of classical spectral clustering is relaxed to
//! the Fantope `{P : 0 ⪯ P ⪯ I, Tr(P) = k}` and an ℓ1 penalty is added to
//! encourage a block-diagonal, sparse solution. The relaxed problem is solved
//! by ADMM whose two subproblems are closed form: elementwise soft
//! thresholding and Euclidean projection onto the Fantope (eigendecomposition
//! followed by capped-simplex projection of the eigenvalues).
//!
//! Module map:
//!
//! * [`linalg`] – symmetric matrices, eigendecomposition, soft thresholding.
//! * [`projection`] – capped-simplex and Fantope projections.
//! * [`graph`] – affinity matrices, normalized Laplacians, synthetic problems.
//! * [`admm`] – the ADMM solver for the single- and multi-view programs.
//! * [`pipeline`] / [`kmeans`] – end-to-end clustering drivers.
//! * [`metrics`] – clustering quality measures.

pub mod admm;
pub mod error;
pub mod graph;
pub mod kmeans;
pub mod linalg;
pub mod metrics;
mod par;
pub mod partition;
pub mod pipeline;
pub mod projection;

pub use admm::{solve_pssc, solve_ssc, MultiViewProblem, SolverConfig, SolverResult, SolverState};
pub use error::{Error, Result};
pub use graph::{
    gaussian_affinity, generate_block_problem, normalized_laplacian, AffinityMatrix, FeatureMatrix,
    NormalizedLaplacian, SyntheticSpec,
};
pub use kmeans::{kmeans, kmeans_runs, KMeansRun};
pub use linalg::{eig_sym, soft_threshold, symmetrize, SpectralDecomposition, SymmetricMatrix};
pub use metrics::{
    adjusted_rand, clustering_error, nmi, pairwise_prf, MetricReport, PairwiseScores,
};
pub use partition::Partition;
pub use pipeline::{run_pssc, run_sc, run_ssc, ClusterOptions, Embedding, RowNormalizedEmbedding};
pub use projection::{capped_simplex_project, fantope_project, SimplexWeights};

/// Whether the crate was compiled with rayon-backed parallelism.
pub const PARALLEL: bool = cfg!(feature = "parallel");
