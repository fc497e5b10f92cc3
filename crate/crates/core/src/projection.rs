//! Euclidean projections onto the capped simplex `{ρ : 0 ≤ ρ ≤ 1, Σρ = k}`
//! and onto the Fantope `{Q : 0 ⪯ Q ⪯ I, Tr(Q) = k}`.
//!
//! The Fantope projection of a symmetric `B = U Diag(λ) Uᵀ` keeps the
//! eigenvectors and replaces the spectrum by its capped-simplex projection,
//! so the matrix problem reduces to a vector problem of size `n`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{check_square, eig_sym, symmetrize, SymmetricMatrix};

/// Capped-simplex projection result: `values[i] = clamp(λ_i + shift, 0, 1)`
/// with `Σ values = k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights {
    pub values: Vec<f64>,
    pub k: usize,
    /// The scalar shift `γ` of the clamp characterization.
    pub shift: f64,
}

impl SimplexWeights {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Projects `lambda` onto `{ρ : 0 ≤ ρ ≤ 1, Σρ = k}`.
///
/// The map `γ ↦ Σ clamp(λ_i + γ, 0, 1)` is piecewise linear and
/// non-decreasing with breakpoints at `−λ_i` and `1 − λ_i`. The breakpoints
/// are swept in order to find the segment where the sum crosses `k`; the
/// shift is then solved for exactly from that segment's active set.
/// Runs in `O(n log n)`.
pub fn capped_simplex_project(lambda: &[f64], k: usize) -> Result<SimplexWeights> {
    let n = lambda.len();
    if k < 1 || k > n {
        return Err(Error::Infeasible { k, n });
    }
    if let Some(i) = lambda.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }

    // (position, slope change): a coordinate becomes free at −λ_i and
    // saturates at 1 − λ_i.
    let mut breakpoints: Vec<(f64, i64)> = Vec::with_capacity(2 * n);
    for &l in lambda {
        breakpoints.push((-l, 1));
        breakpoints.push((1.0 - l, -1));
    }
    breakpoints.sort_by(|a, b| a.0.total_cmp(&b.0));

    let target = k as f64;
    let mut slope = 0i64;
    let mut value = 0.0;
    let mut prev = breakpoints[0].0;
    let mut segment = None;
    for &(pos, delta) in &breakpoints {
        if slope > 0 {
            let next = value + slope as f64 * (pos - prev);
            if next >= target {
                segment = Some((prev, pos));
                break;
            }
            value = next;
        }
        prev = pos;
        slope += delta;
    }

    let shift = match segment {
        Some((lo, hi)) => {
            let mid = 0.5 * (lo + hi);
            let mut ones = 0usize;
            let mut free = 0usize;
            let mut free_sum = 0.0;
            for &l in lambda {
                let t = l + mid;
                if t >= 1.0 {
                    ones += 1;
                } else if t > 0.0 {
                    free += 1;
                    free_sum += l;
                }
            }
            if free > 0 {
                (target - ones as f64 - free_sum) / free as f64
            } else {
                mid
            }
        }
        // Only reachable when k = n up to round-off: every coordinate saturates.
        None => breakpoints[2 * n - 1].0,
    };

    let values = lambda
        .iter()
        .map(|&l| (l + shift).clamp(0.0, 1.0))
        .collect();
    Ok(SimplexWeights { values, k, shift })
}

/// Projects an arbitrary square matrix onto the Fantope of rank parameter
/// `k`: `Q* = U Diag(ρ*) Uᵀ` where `(A + Aᵀ)/2 = U Diag(λ) Uᵀ` and `ρ*` is
/// the capped-simplex projection of `λ`.
pub fn fantope_project(a: &DMatrix<f64>, k: usize) -> Result<SymmetricMatrix> {
    check_square(a)?;
    let n = a.nrows();
    if k < 1 || k > n {
        return Err(Error::Infeasible { k, n });
    }
    project_symmetric(&symmetrize(a)?, k)
}

/// [`fantope_project`] for an argument that is already symmetric.
pub fn project_symmetric(b: &SymmetricMatrix, k: usize) -> Result<SymmetricMatrix> {
    let n = b.dim();
    if k < 1 || k > n {
        return Err(Error::Infeasible { k, n });
    }
    let eig = eig_sym(b)?;
    let rho = capped_simplex_project(eig.eigenvalues.as_slice(), k)?;
    Ok(eig.reconstruct_with(&rho.values))
}

/// Checks Fantope membership: eigenvalues in `[−tol, 1 + tol]` and
/// `|Tr − k| ≤ tol`.
pub fn in_fantope(p: &SymmetricMatrix, k: usize, tol: f64) -> Result<bool> {
    if (p.trace() - k as f64).abs() > tol {
        return Ok(false);
    }
    let eig = eig_sym(p)?;
    Ok(eig.eigenvalues.iter().all(|&v| v >= -tol && v <= 1.0 + tol))
}
