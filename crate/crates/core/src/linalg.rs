//! Dense symmetric linear algebra: the [`SymmetricMatrix`] newtype, a
//! deterministic symmetric eigendecomposition and the ℓ1 proximal map.

use std::cmp::Ordering;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance used when validating symmetry.
pub const SYMMETRY_TOL: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_SWEEPS: usize = 0; // 0 = no limit in nalgebra

/// A square, finite, symmetric real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    /// Validates `m` and wraps it. Symmetry is checked entrywise with
    /// tolerance `1e-10 · max(1, |m[i][j]|)`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > SYMMETRY_TOL * m[(i, j)].abs().max(1.0) {
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

    /// Wraps a matrix that is symmetric by construction. Off-diagonal pairs
    /// are averaged so the result is exactly symmetric.
    pub(crate) fn from_nearly_symmetric(mut m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        Self(m)
    }

    /// Wraps a matrix whose symmetry is exact by construction (elementwise
    /// maps and linear combinations of symmetric matrices).
    pub(crate) fn from_exact(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Frobenius inner product `⟨self, other⟩`.
    pub fn inner(&self, other: &SymmetricMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    /// Entrywise ℓ1 norm.
    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// Returns `Π self Πᵀ` for the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim();
        if perm.len() != n {
            return Err(Error::Dimension(format!(
                "permutation of length {} for a {n}x{n} matrix",
                perm.len()
            )));
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

impl Deref for SymmetricMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl From<SymmetricMatrix> for DMatrix<f64> {
    fn from(m: SymmetricMatrix) -> Self {
        m.0
    }
}

pub(crate) fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Returns `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    check_square(a)?;
    check_finite(a)?;
    let sym = (a + a.transpose()) * 0.5;
    Ok(SymmetricMatrix::from_nearly_symmetric(sym))
}

/// Eigenvalues sorted in non-increasing order together with orthonormal
/// eigenvectors; column `j` of `eigenvectors` pairs with `eigenvalues[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Reconstructs `V · Diag(values) · Vᵀ`.
    pub fn reconstruct_with(&self, values: &[f64]) -> SymmetricMatrix {
        assert_eq!(values.len(), self.dim(), "one value per eigenvector");
        let v = &self.eigenvectors;
        // Only columns with nonzero weight contribute.
        let active: Vec<usize> = (0..values.len()).filter(|&j| values[j] != 0.0).collect();
        let n = self.dim();
        if active.is_empty() {
            return SymmetricMatrix::zeros(n);
        }
        let mut scaled = DMatrix::zeros(n, active.len());
        let mut basis = DMatrix::zeros(n, active.len());
        for (c, &j) in active.iter().enumerate() {
            basis.set_column(c, &v.column(j));
            scaled.set_column(c, &(v.column(j) * values[j]));
        }
        SymmetricMatrix::from_nearly_symmetric(scaled * basis.transpose())
    }

    /// Reconstructs the source matrix `V · Diag(λ) · Vᵀ`.
    pub fn reconstruct(&self) -> SymmetricMatrix {
        let vals: Vec<f64> = self.eigenvalues.iter().copied().collect();
        self.reconstruct_with(&vals)
    }
}

/// Full symmetric eigendecomposition.
///
/// Eigenvalues are sorted in non-increasing order; ties keep the order in
/// which the underlying QR iteration produced them (a stable sort), so the
/// output is a deterministic function of the input. Each eigenvector is
/// signed so that its largest-magnitude component (first one on ties) is
/// positive.
pub fn eig_sym(b: &SymmetricMatrix) -> Result<SpectralDecomposition> {
    check_finite(b)?;
    let n = b.dim();
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(b.as_matrix().clone(), EIGEN_EPS, EIGEN_MAX_SWEEPS)
        .ok_or(Error::EigenFailure(n))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| {
        eig.eigenvalues[c]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(Ordering::Equal)
    });

    let mut eigenvalues = DVector::zeros(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).into_owned();
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Scalar soft-thresholding operator, the proximal map of `eps·|x|`.
#[inline]
pub fn shrink(x: f64, eps: f64) -> f64 {
    if x > eps {
        x - eps
    } else if x < -eps {
        x + eps
    } else {
        0.0
    }
}

/// Elementwise soft thresholding of `x` by `eps`.
pub fn soft_threshold(x: &DMatrix<f64>, eps: f64) -> Result<DMatrix<f64>> {
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "soft-threshold level must be finite and >= 0, got {eps}"
        )));
    }
    Ok(x.map(|v| shrink(v, eps)))
}
