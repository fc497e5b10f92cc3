//! Graph construction: Gaussian affinities, normalized Laplacians, and
//! synthetic block-structured problems with known ground truth.

use std::ops::Deref;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{check_finite, check_square, SymmetricMatrix, SYMMETRY_TOL};
use crate::partition::Partition;

/// Data matrix with one sample per column (`d × n`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(DMatrix<f64>);

impl FeatureMatrix {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        check_finite(&columns)?;
        if columns.ncols() < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 samples, got {}",
                columns.ncols()
            )));
        }
        Ok(Self(columns))
    }

    /// Builds from a sample-per-row matrix (`n × d`), the layout used by
    /// feature files.
    pub fn from_rows(rows: &DMatrix<f64>) -> Result<Self> {
        Self::new(rows.transpose())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Stacks the feature rows of several views of the same samples.
    pub fn concat(views: &[FeatureMatrix]) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::InvalidArgument("no feature views given".into()))?;
        let n = first.n_samples();
        if let Some(v) = views.iter().find(|v| v.n_samples() != n) {
            return Err(Error::Dimension(format!(
                "views disagree on sample count: {n} vs {}",
                v.n_samples()
            )));
        }
        let d: usize = views.iter().map(|v| v.dim()).sum();
        let mut out = DMatrix::zeros(d, n);
        let mut row = 0;
        for v in views {
            out.rows_mut(row, v.dim()).copy_from(&v.0);
            row += v.dim();
        }
        Ok(Self(out))
    }
}

/// Symmetric, non-negative similarity matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(DMatrix<f64>);

impl AffinityMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let n = m.nrows();
        for j in 0..n {
            if m[(j, j)] != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "affinity diagonal must be zero, found {} at ({j}, {j})",
                    m[(j, j)]
                )));
            }
            for i in 0..n {
                if m[(i, j)] < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "negative affinity {} at ({i}, {j})",
                        m[(i, j)]
                    )));
                }
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if i > j && gap > SYMMETRY_TOL * m[(i, j)].abs().max(1.0) {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: j,
                        gap,
                    });
                }
            }
        }
        Ok(Self(m))
    }

    /// Like [`AffinityMatrix::new`] but clears the diagonal first, for
    /// externally produced similarity matrices that carry self-similarities.
    pub fn with_zeroed_diagonal(mut m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        m.fill_diagonal(0.0);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.0.row_iter().map(|r| r.sum()).collect()
    }

    /// Elementwise sum of several views' affinities.
    pub fn sum(views: &[AffinityMatrix]) -> Result<Self> {
        let first = views
            .first()
            .ok_or_else(|| Error::InvalidArgument("no affinity views given".into()))?;
        let mut acc = first.0.clone();
        for v in &views[1..] {
            if v.dim() != first.dim() {
                return Err(Error::Dimension(format!(
                    "views disagree on size: {} vs {}",
                    first.dim(),
                    v.dim()
                )));
            }
            acc += &v.0;
        }
        Ok(Self(acc))
    }

    /// Returns `Π W Πᵀ` where point `i` moves to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim();
        if perm.len() != n {
            return Err(Error::Dimension("permutation length".into()));
        }
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                out[(perm[i], perm[j])] = self.0[(i, j)];
            }
        }
        Ok(Self(out))
    }
}

impl Deref for AffinityMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// `L = I − D^{-1/2} W D^{-1/2}`; symmetric positive semidefinite with
/// spectrum in `[0, 2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedLaplacian(SymmetricMatrix);

impl NormalizedLaplacian {
    pub fn as_symmetric(&self) -> &SymmetricMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Wraps a matrix the caller asserts is a normalized Laplacian (used for
    /// hand-built test problems such as diagonal spectra).
    pub fn from_symmetric_unchecked(m: SymmetricMatrix) -> Self {
        Self(m)
    }
}

impl Deref for NormalizedLaplacian {
    type Target = SymmetricMatrix;

    fn deref(&self) -> &SymmetricMatrix {
        &self.0
    }
}

/// Gaussian-kernel affinity with the bandwidth set to the median pairwise
/// Euclidean distance: `w_ij = exp(−‖x_i − x_j‖² / (2σ²))`, `w_ii = 0`.
///
/// Pairs at distance exactly zero (duplicate points) are left out of the
/// median.
pub fn gaussian_affinity(x: &FeatureMatrix) -> Result<AffinityMatrix> {
    let n = x.n_samples();
    let data = x.as_matrix();
    let mut sq = DMatrix::zeros(n, n);
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for i in (j + 1)..n {
            let d2 = (data.column(i) - data.column(j)).norm_squared();
            sq[(i, j)] = d2;
            sq[(j, i)] = d2;
            if d2 > 0.0 {
                dists.push(d2.sqrt());
            }
        }
    }
    if dists.is_empty() {
        return Err(Error::DegenerateData(
            "all samples coincide; median distance is zero".into(),
        ));
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let sigma = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    let denom = 2.0 * sigma * sigma;
    let w = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (-sq[(i, j)] / denom).exp()
        }
    });
    Ok(AffinityMatrix(w))
}

/// Normalized Laplacian of `w`. Isolated nodes (zero degree) get a zero
/// `D^{-1/2}` entry, so their row of `L` is the unit vector `e_i`.
pub fn normalized_laplacian(w: &AffinityMatrix) -> NormalizedLaplacian {
    let n = w.dim();
    let inv_sqrt: Vec<f64> = w
        .degrees()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let scaled = inv_sqrt[i] * w[(i, j)] * inv_sqrt[j];
        if i == j {
            1.0 - scaled
        } else {
            -scaled
        }
    });
    NormalizedLaplacian(SymmetricMatrix::from_nearly_symmetric(m))
}

/// Parameters of a synthetic block problem. Intra-cluster affinities are
/// drawn from `U[intra/2, intra]`, inter-cluster ones from `U[0, noise]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub cluster_sizes: Vec<usize>,
    pub intra_strength: f64,
    pub noise_level: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(
        cluster_sizes: Vec<usize>,
        intra_strength: f64,
        noise_level: f64,
        seed: u64,
    ) -> Self {
        Self {
            cluster_sizes,
            intra_strength,
            noise_level,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cluster_sizes.is_empty() {
            return Err(Error::InvalidArgument("no clusters requested".into()));
        }
        if self.cluster_sizes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "cluster sizes must be >= 1, got {:?}",
                self.cluster_sizes
            )));
        }
        if self.n() < 2 {
            return Err(Error::InvalidArgument("need at least 2 points".into()));
        }
        if !(self.intra_strength > 0.0 && self.intra_strength <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "intra strength must lie in (0, 1], got {}",
                self.intra_strength
            )));
        }
        if !self.noise_level.is_finite() || self.noise_level < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise level must be finite and >= 0, got {}",
                self.noise_level
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.cluster_sizes.len()
    }

    /// Ground-truth labels: contiguous blocks in `cluster_sizes` order.
    pub fn labels(&self) -> Vec<usize> {
        self.cluster_sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &s)| std::iter::repeat_n(c, s))
            .collect()
    }
}

/// Draws a block-structured affinity matrix and its ground-truth partition.
/// Output depends only on `spec` (including its seed).
pub fn generate_block_problem(spec: &SyntheticSpec) -> Result<(AffinityMatrix, Partition)> {
    spec.validate()?;
    let n = spec.n();
    let labels = spec.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lo = 0.5 * spec.intra_strength;
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if labels[i] == labels[j] {
                rng.random_range(lo..=spec.intra_strength)
            } else if spec.noise_level > 0.0 {
                rng.random_range(0.0..=spec.noise_level)
            } else {
                0.0
            };
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    let truth = Partition::new(labels, spec.k())?;
    Ok((AffinityMatrix(w), truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_sym;
    use nalgebra::dmatrix;

    #[test]
    fn two_points_at_bandwidth() {
        let x = FeatureMatrix::new(dmatrix![0.0, 2.5]).unwrap();
        let w = gaussian_affinity(&x).unwrap();
        assert!((w[(0, 1)] - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(w[(0, 0)], 0.0);
    }

    #[test]
    fn collinear_points_use_median_distance() {
        // Distances {1, 2, 3}; σ = 2.
        let x = FeatureMatrix::new(dmatrix![0.0, 1.0, 3.0]).unwrap();
        let w = gaussian_affinity(&x).unwrap();
        assert!((w[(0, 1)] - (-1.0f64 / 8.0).exp()).abs() < 1e-15);
        assert!((w[(1, 2)] - (-4.0f64 / 8.0).exp()).abs() < 1e-15);
        assert!((w[(0, 2)] - (-9.0f64 / 8.0).exp()).abs() < 1e-15);
        for i in 0..3 {
            assert_eq!(w[(i, i)], 0.0);
        }
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let x = FeatureMatrix::new(dmatrix![1.0, 1.0; 2.0, 2.0]).unwrap();
        assert!(matches!(
            gaussian_affinity(&x),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn duplicates_excluded_from_median() {
        // Distances {0, 4, 4}: zero pair ignored, σ = 4.
        let x = FeatureMatrix::new(dmatrix![0.0, 0.0, 4.0]).unwrap();
        let w = gaussian_affinity(&x).unwrap();
        assert_eq!(w[(0, 1)], 1.0);
        assert!((w[(0, 2)] - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn laplacian_of_single_edge() {
        let w = AffinityMatrix::new(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
        let l = normalized_laplacian(&w);
        assert_eq!(*l.as_matrix(), dmatrix![1.0, -1.0; -1.0, 1.0]);
    }

    #[test]
    fn isolated_node_gets_unit_row() {
        let w = AffinityMatrix::new(dmatrix![
            0.0, 1.0, 0.0;
            1.0, 0.0, 0.0;
            0.0, 0.0, 0.0
        ])
        .unwrap();
        let l = normalized_laplacian(&w);
        assert_eq!(
            l.as_matrix().row(2).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 1.0]
        );
        assert_eq!(
            l.as_matrix().column(2).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn block_structure_is_preserved() {
        let spec = SyntheticSpec::new(vec![3, 3], 1.0, 0.0, 1);
        let (w, truth) = generate_block_problem(&spec).unwrap();
        assert_eq!(truth.labels(), &[0, 0, 0, 1, 1, 1]);
        let l = normalized_laplacian(&w);
        for i in 0..6 {
            for j in 0..6 {
                if truth.labels()[i] != truth.labels()[j] {
                    assert_eq!(w[(i, j)], 0.0);
                    assert_eq!(l[(i, j)], 0.0);
                } else if i != j {
                    assert!(w[(i, j)] >= 0.5 && w[(i, j)] <= 1.0);
                }
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = SyntheticSpec::new(vec![4, 5, 3], 0.8, 0.3, 77);
        let a = generate_block_problem(&spec).unwrap();
        let b = generate_block_problem(&spec).unwrap();
        assert_eq!(a, b);
        let other = SyntheticSpec { seed: 78, ..spec };
        assert_ne!(generate_block_problem(&other).unwrap().0, a.0);
    }

    #[test]
    fn noiseless_laplacian_has_k_zero_eigenvalues() {
        let spec = SyntheticSpec::new(vec![4, 6, 5], 1.0, 0.0, 3);
        let (w, _) = generate_block_problem(&spec).unwrap();
        let eig = eig_sym(&normalized_laplacian(&w)).unwrap();
        let n = eig.dim();
        for j in 0..3 {
            assert!(eig.eigenvalues[n - 1 - j].abs() <= 1e-8);
        }
        assert!(eig.eigenvalues[n - 4] > 1e-3);
    }

    #[test]
    fn spec_validation() {
        assert!(SyntheticSpec::new(vec![0, 3], 1.0, 0.0, 1)
            .validate()
            .is_err());
        assert!(SyntheticSpec::new(vec![3], 0.0, 0.0, 1).validate().is_err());
        assert!(SyntheticSpec::new(vec![3], 1.0, -1.0, 1)
            .validate()
            .is_err());
        assert!(SyntheticSpec::new(vec![], 1.0, 0.0, 1).validate().is_err());
        assert!(generate_block_problem(&SyntheticSpec::new(vec![0, 3], 1.0, 0.0, 1)).is_err());
    }

    #[test]
    fn affinity_validation() {
        assert!(AffinityMatrix::new(dmatrix![1.0, 0.0; 0.0, 0.0]).is_err());
        assert!(AffinityMatrix::new(dmatrix![0.0, -1.0; -1.0, 0.0]).is_err());
        assert!(AffinityMatrix::new(dmatrix![0.0, 1.0; 0.5, 0.0]).is_err());
        let w = AffinityMatrix::with_zeroed_diagonal(dmatrix![1.0, 0.3; 0.3, 1.0]).unwrap();
        assert_eq!(w[(0, 0)], 0.0);
    }

    #[test]
    fn feature_concat_stacks_rows() {
        let a = FeatureMatrix::new(dmatrix![1.0, 2.0]).unwrap();
        let b = FeatureMatrix::new(dmatrix![3.0, 4.0; 5.0, 6.0]).unwrap();
        let c = FeatureMatrix::concat(&[a, b]).unwrap();
        assert_eq!(*c.as_matrix(), dmatrix![1.0, 2.0; 3.0, 4.0; 5.0, 6.0]);
    }
}
