//! Lloyd's k-means with careful (D²-weighted) seeding and independent
//! restarts.
//!
//! Restart `r` draws from its own ChaCha stream `(seed, r)`, so results are
//! identical whether restarts run sequentially or in parallel.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par;
use crate::partition::Partition;

const MAX_LLOYD_ITERS: usize = 300;

/// One k-means restart.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub partition: Partition,
    /// Sum of squared distances to assigned centroids.
    pub inertia: f64,
    pub iterations: usize,
    /// Inertia after every assignment step.
    pub inertia_history: Vec<f64>,
}

/// Row-major copy of the point set.
struct Points {
    data: Vec<f64>,
    n: usize,
    dim: usize,
}

impl Points {
    fn from_rows(m: &DMatrix<f64>) -> Self {
        let (n, dim) = m.shape();
        let mut data = Vec::with_capacity(n * dim);
        for i in 0..n {
            data.extend(m.row(i).iter());
        }
        Self { data, n, dim }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn careful_seeding(points: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.n;
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points.row(first).to_vec()];
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), &centers[0]))
        .collect();

    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Round-off can leave target at the very end of the range.
            pick.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // Every point coincides with a center already.
            chosen.iter().position(|&c| !c).unwrap_or(0)
        };
        chosen[pick] = true;
        let c = points.row(pick).to_vec();
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn lloyd(points: &Points, k: usize, rng: &mut ChaCha8Rng) -> Result<KMeansRun> {
    let n = points.n;
    let dim = points.dim;
    let mut centers = careful_seeding(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let mut changed = false;
        for i in 0..n {
            let row = points.row(i);
            let mut best = 0;
            let mut best_d = sq_dist(row, &centers[0]);
            for (c, center) in centers.iter().enumerate().skip(1) {
                let d = sq_dist(row, center);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
            dists[i] = best_d;
        }
        history.push(dists.iter().sum());
        iterations += 1;
        if !changed || iterations >= MAX_LLOYD_ITERS {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, x) in sums[labels[i]].iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                centers[c] = sums[c].iter().map(|s| s * inv).collect();
            } else {
                // Empty cluster: restart its centroid at the point farthest
                // from its current centroid.
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
                taken[far] = true;
                centers[c] = points.row(far).to_vec();
            }
        }
    }

    Ok(KMeansRun {
        partition: Partition::new(labels, k)?,
        inertia: *history.last().unwrap(),
        iterations,
        inertia_history: history,
    })
}

fn check_args(points: &DMatrix<f64>, k: usize, restarts: usize) -> Result<()> {
    let n = points.nrows();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k-means needs 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if restarts < 1 {
        return Err(Error::InvalidArgument(
            "k-means needs at least one restart".into(),
        ));
    }
    if let Some(idx) = points.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            row: idx % n,
            col: idx / n,
        });
    }
    Ok(())
}

/// Runs `restarts` independent k-means runs on the rows of `points`.
pub fn kmeans_runs(
    points: &DMatrix<f64>,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<Vec<KMeansRun>> {
    check_args(points, k, restarts)?;
    let pts = Points::from_rows(points);
    par::map_range(restarts, |r| lloyd(&pts, k, &mut restart_rng(seed, r)))
        .into_iter()
        .collect()
}

/// The lowest-inertia run (earliest restart on ties).
pub fn best_run(runs: &[KMeansRun]) -> Option<&KMeansRun> {
    runs.iter()
        .reduce(|best, r| if r.inertia < best.inertia { r } else { best })
}

/// Best-inertia partition of the rows of `points` over `restarts` runs.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<Partition> {
    let runs = kmeans_runs(points, k, restarts, seed)?;
    Ok(best_run(&runs).expect("restarts >= 1").partition.clone())
}
