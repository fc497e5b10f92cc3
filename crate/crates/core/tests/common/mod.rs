//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's eigensolver or
//! projection code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparse_spectral::{
    generate_block_problem, normalized_laplacian, AffinityMatrix, NormalizedLaplacian, Partition,
    SyntheticSpec,
};

// ---------------------------------------------------------------------------
// Eigendecomposition by cyclic Jacobi rotations.

/// Returns `(eigenvalues, eigenvectors)` of a symmetric matrix, unsorted.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// `V Diag(w) Vᵀ`.
pub fn reconstruct(v: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    v * DMatrix::from_diagonal(&DVector::from_column_slice(w)) * v.transpose()
}

// ---------------------------------------------------------------------------
// Capped-simplex projection oracles.

/// Enumerates every clamp pattern in `{lower, free, upper}^n` depth first,
/// keeps the KKT-consistent ones and returns the feasible point closest to
/// `lambda`. Running sums and bounds make each node O(1); only prefixes with
/// more than `k` upper coordinates are cut.
pub fn capped_simplex_kkt(lambda: &[f64], k: usize) -> Vec<f64> {
    #[derive(Clone, Copy)]
    struct Acc {
        ones: usize,
        free: usize,
        free_sum: f64,
        free_min: f64,
        free_max: f64,
        // Shift bounds implied by the clamped coordinates.
        lo: f64,
        hi: f64,
    }
    struct Search<'a> {
        lambda: &'a [f64],
        k: usize,
        pattern: Vec<u8>,
        best: Option<(f64, Vec<u8>, f64)>,
    }
    const TOL: f64 = 1e-12;

    impl Search<'_> {
        fn leaf(&mut self, a: Acc) {
            let shift = if a.free == 0 {
                if a.ones != self.k {
                    return;
                }
                if a.lo.is_finite() {
                    a.lo
                } else {
                    a.hi
                }
            } else {
                (self.k as f64 - a.ones as f64 - a.free_sum) / a.free as f64
            };
            if shift < a.lo - TOL || shift > a.hi + TOL {
                return;
            }
            if a.free > 0 && (a.free_min + shift < -TOL || a.free_max + shift > 1.0 + TOL) {
                return;
            }
            let dist: f64 = self
                .pattern
                .iter()
                .zip(self.lambda)
                .map(|(&p, &l)| match p {
                    0 => l * l,
                    1 => shift * shift,
                    _ => (1.0 - l) * (1.0 - l),
                })
                .sum();
            if self.best.as_ref().is_none_or(|(d, _, _)| dist < *d) {
                self.best = Some((dist, self.pattern.clone(), shift));
            }
        }

        fn visit(&mut self, i: usize, a: Acc) {
            if i == self.lambda.len() {
                self.leaf(a);
                return;
            }
            let l = self.lambda[i];
            self.pattern[i] = 0;
            self.visit(
                i + 1,
                Acc {
                    hi: a.hi.min(-l),
                    ..a
                },
            );
            self.pattern[i] = 1;
            self.visit(
                i + 1,
                Acc {
                    free: a.free + 1,
                    free_sum: a.free_sum + l,
                    free_min: a.free_min.min(l),
                    free_max: a.free_max.max(l),
                    ..a
                },
            );
            if a.ones < self.k {
                self.pattern[i] = 2;
                self.visit(
                    i + 1,
                    Acc {
                        ones: a.ones + 1,
                        lo: a.lo.max(1.0 - l),
                        ..a
                    },
                );
            }
        }
    }

    let mut search = Search {
        lambda,
        k,
        pattern: vec![0; lambda.len()],
        best: None,
    };
    search.visit(
        0,
        Acc {
            ones: 0,
            free: 0,
            free_sum: 0.0,
            free_min: f64::INFINITY,
            free_max: f64::NEG_INFINITY,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        },
    );
    let (_, pattern, shift) = search
        .best
        .expect("some clamp pattern is always KKT-consistent");
    pattern
        .iter()
        .zip(lambda)
        .map(|(&p, &l)| match p {
            0 => 0.0,
            1 => l + shift,
            _ => 1.0,
        })
        .collect()
}

/// Bisection on the shift `γ` of `Σ clamp(λ_i + γ, 0, 1) = k`.
pub fn capped_simplex_bisect(lambda: &[f64], k: usize) -> Vec<f64> {
    let f = |g: f64| lambda.iter().map(|l| (l + g).clamp(0.0, 1.0)).sum::<f64>();
    let max = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut lo, mut hi) = (-max - 1.0, 1.0 - min + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < k as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let g = 0.5 * (lo + hi);
    lambda.iter().map(|l| (l + g).clamp(0.0, 1.0)).collect()
}

/// Dykstra's alternating projections between the box `[0, 1]^n` and the
/// hyperplane `Σρ = k`.
pub fn capped_simplex_dykstra(lambda: &[f64], k: usize, iters: usize) -> Vec<f64> {
    let n = lambda.len();
    let mut x = lambda.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    for _ in 0..iters {
        // Box.
        let y: Vec<f64> = (0..n).map(|i| (x[i] + p[i]).clamp(0.0, 1.0)).collect();
        for i in 0..n {
            p[i] = x[i] + p[i] - y[i];
        }
        // Hyperplane.
        let z: Vec<f64> = (0..n).map(|i| y[i] + q[i]).collect();
        let shift = (k as f64 - z.iter().sum::<f64>()) / n as f64;
        let xn: Vec<f64> = z.iter().map(|v| v + shift).collect();
        for i in 0..n {
            q[i] = y[i] + q[i] - xn[i];
        }
        x = xn;
    }
    x
}

/// Fantope projection through Jacobi eigenvectors and clamp-pattern
/// enumeration of the eigenvalues.
pub fn fantope_oracle(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let b = (a + a.transpose()) * 0.5;
    let (vals, vecs) = jacobi_eigen(&b);
    let rho = capped_simplex_kkt(&vals, k);
    reconstruct(&vecs, &rho)
}

fn fantope_fast_oracle(b: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let (vals, vecs) = jacobi_eigen(b);
    let rho = capped_simplex_bisect(&vals, k);
    let out = reconstruct(&vecs, &rho);
    (&out + out.transpose()) * 0.5
}

// ---------------------------------------------------------------------------
// Reference solver for the convex multi-view program.

/// Objective `Σ⟨P_i, L_i⟩ + β‖P_i‖₁ + (α/2) Σ_{i≠j} ‖P_i − P_j‖²`.
pub fn objective(ps: &[DMatrix<f64>], ls: &[DMatrix<f64>], alpha: f64, beta: f64) -> f64 {
    let mut v = 0.0;
    for (p, l) in ps.iter().zip(ls) {
        v += p.dot(l) + beta * p.iter().map(|x| x.abs()).sum::<f64>();
    }
    for i in 0..ps.len() {
        for j in 0..ps.len() {
            if i != j {
                v += 0.5 * alpha * (&ps[i] - &ps[j]).norm_squared();
            }
        }
    }
    v
}

/// Accelerated projected gradient (with adaptive restart) on the Huber-smoothed
/// objective. The smoothing width is chosen so the ℓ1 bias stays below
/// `bias` in absolute terms; the true objective is returned at the best
/// iterate.
pub fn reference_solve(
    ls: &[DMatrix<f64>],
    k: usize,
    alpha: f64,
    beta: f64,
    iters: usize,
) -> (Vec<DMatrix<f64>>, f64) {
    let m = ls.len();
    let n = ls[0].nrows();
    let bias = 1e-9;
    let delta = if beta > 0.0 {
        2.0 * bias / (beta * (n * n * m) as f64)
    } else {
        1.0
    };
    let lip = beta / delta + 2.0 * alpha * m as f64 + 1e-12;
    let step = 1.0 / lip;

    let grad = |ps: &[DMatrix<f64>]| -> Vec<DMatrix<f64>> {
        (0..m)
            .map(|i| {
                let mut g = ls[i].clone();
                if beta > 0.0 {
                    g += ps[i].map(|x| beta * (x / delta).clamp(-1.0, 1.0));
                }
                for j in 0..m {
                    if j != i {
                        g += (&ps[i] - &ps[j]) * (2.0 * alpha);
                    }
                }
                g
            })
            .collect()
    };
    let smooth = |ps: &[DMatrix<f64>]| -> f64 {
        let huber = |x: f64| {
            if x.abs() <= delta {
                x * x / (2.0 * delta)
            } else {
                x.abs() - 0.5 * delta
            }
        };
        let mut v = objective(ps, ls, alpha, 0.0);
        for p in ps {
            v += beta * p.iter().map(|&x| huber(x)).sum::<f64>();
        }
        v
    };

    let center = DMatrix::identity(n, n) * (k as f64 / n as f64);
    let mut x = vec![center; m];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut fx = smooth(&x);
    let mut best = (objective(&x, ls, alpha, beta), x.clone());
    for _ in 0..iters {
        let g = grad(&y);
        let next: Vec<DMatrix<f64>> = (0..m)
            .map(|i| fantope_fast_oracle(&(&y[i] - &g[i] * step), k))
            .collect();
        let fn_ = smooth(&next);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if fn_ > fx {
            // Restart momentum.
            y = x.clone();
            t = 1.0;
            continue;
        }
        y = (0..m)
            .map(|i| &next[i] + (&next[i] - &x[i]) * ((t - 1.0) / t_next))
            .collect();
        x = next;
        fx = fn_;
        t = t_next;
        let obj = objective(&x, ls, alpha, beta);
        if obj < best.0 {
            best = (obj, x.clone());
        }
    }
    (best.1, best.0)
}

// ---------------------------------------------------------------------------
// Problem generators.

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    (&a + a.transpose()) * 0.5
}

/// Dense affinity with i.i.d. `U[0, 1)` weights.
pub fn random_affinity(rng: &mut ChaCha8Rng, n: usize) -> AffinityMatrix {
    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.random();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    AffinityMatrix::new(w).unwrap()
}

pub fn random_laplacian(rng: &mut ChaCha8Rng, n: usize) -> NormalizedLaplacian {
    normalized_laplacian(&random_affinity(rng, n))
}

/// A random orthonormal `n × k` matrix.
pub fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
    a.qr().q().columns(0, k).into_owned()
}

/// Sum of the `k` smallest eigenvalues (Jacobi).
pub fn bottom_eigen_sum(l: &DMatrix<f64>, k: usize) -> f64 {
    let (mut vals, _) = jacobi_eigen(l);
    vals.sort_by(f64::total_cmp);
    vals[..k].iter().sum()
}

/// Two views of three equal clusters `A, B, C`. View 1 cannot tell `A`
/// from `B` (they share the intra-cluster affinity distribution), view 2
/// cannot tell `B` from `C`; both carry background noise. Only the views
/// together identify all three clusters.
pub fn complementary_views(
    cluster: usize,
    noise: f64,
    seed: u64,
) -> (Vec<AffinityMatrix>, Partition) {
    let n = 3 * cluster;
    let truth: Vec<usize> = (0..n).map(|i| i / cluster).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let merged = [(0usize, 1usize), (1, 2)];
    let views = merged
        .iter()
        .map(|&(a, b)| {
            let group = |c: usize| if c == b { a } else { c };
            let mut w = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = if group(truth[i]) == group(truth[j]) {
                        rng.random_range(0.5..=1.0)
                    } else {
                        rng.random_range(0.0..=noise)
                    };
                    w[(i, j)] = v;
                    w[(j, i)] = v;
                }
            }
            AffinityMatrix::new(w).unwrap()
        })
        .collect();
    (views, Partition::new(truth, 3).unwrap())
}

pub fn block_problem(sizes: &[usize], noise: f64, seed: u64) -> (AffinityMatrix, Partition) {
    generate_block_problem(&SyntheticSpec::new(sizes.to_vec(), 1.0, noise, seed)).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Metric oracles computed point by point or pair by pair.

/// Every labelling of `n` points with at most `max_k` clusters, in
/// restricted-growth form (first appearance order).
pub fn all_partitions(n: usize, max_k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, n: usize, max_k: usize, used: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for l in 0..(used + 1).min(max_k) {
            cur.push(l);
            rec(cur, n, max_k, used.max(l + 1), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, max_k, 0, &mut out);
    out
}

pub struct PairCounts {
    pub both: f64,
    pub pred: f64,
    pub truth: f64,
    pub total: f64,
}

pub fn pair_counts(pred: &[usize], truth: &[usize]) -> PairCounts {
    let n = pred.len();
    let mut c = PairCounts {
        both: 0.0,
        pred: 0.0,
        truth: 0.0,
        total: 0.0,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let sp = pred[i] == pred[j];
            let st = truth[i] == truth[j];
            c.total += 1.0;
            c.pred += sp as u8 as f64;
            c.truth += st as u8 as f64;
            c.both += (sp && st) as u8 as f64;
        }
    }
    c
}

/// `(precision, recall, f)` from explicit pair loops.
pub fn oracle_prf(pred: &[usize], truth: &[usize]) -> (f64, f64, f64) {
    let c = pair_counts(pred, truth);
    let p = if c.pred > 0.0 { c.both / c.pred } else { 0.0 };
    let r = if c.truth > 0.0 { c.both / c.truth } else { 0.0 };
    let f = if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    };
    (p, r, f)
}

/// NMI from per-point sums: `H = −(1/n) Σ_x log(|C(x)|/n)` and
/// `I = (1/n) Σ_x log(n |U(x) ∩ V(x)| / (|U(x)| |V(x)|))`.
pub fn oracle_nmi(pred: &[usize], truth: &[usize]) -> f64 {
    let n = pred.len();
    let nf = n as f64;
    let size =
        |labels: &[usize], x: usize| labels.iter().filter(|&&l| l == labels[x]).count() as f64;
    let joint = |x: usize| {
        (0..n)
            .filter(|&y| pred[y] == pred[x] && truth[y] == truth[x])
            .count() as f64
    };
    let hp: f64 = (0..n).map(|x| -(size(pred, x) / nf).ln()).sum::<f64>() / nf;
    let ht: f64 = (0..n).map(|x| -(size(truth, x) / nf).ln()).sum::<f64>() / nf;
    if hp == 0.0 && ht == 0.0 {
        return 1.0;
    }
    let mi: f64 = (0..n)
        .map(|x| (nf * joint(x) / (size(pred, x) * size(truth, x))).ln())
        .sum::<f64>()
        / nf;
    (mi / (0.5 * (hp + ht))).clamp(0.0, 1.0)
}

/// Adjusted Rand index from pair agreements.
pub fn oracle_ari(pred: &[usize], truth: &[usize]) -> f64 {
    let c = pair_counts(pred, truth);
    let expected = c.pred * c.truth / c.total;
    let denom = 0.5 * (c.pred + c.truth) - expected;
    if denom == 0.0 {
        let same = (0..pred.len())
            .all(|i| (0..pred.len()).all(|j| (pred[i] == pred[j]) == (truth[i] == truth[j])));
        return if same { 1.0 } else { 0.0 };
    }
    (c.both - expected) / denom
}

/// Clustering error by trying every injective relabelling.
pub fn oracle_error(pred: &[usize], truth: &[usize]) -> f64 {
    let kp = pred.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let size = kp.max(kt);
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = 0;
    permutations(&mut perm, 0, &mut |p| {
        let hits = pred.iter().zip(truth).filter(|(&a, &b)| p[a] == b).count();
        best = best.max(hits);
    });
    1.0 - best as f64 / pred.len() as f64
}

fn permutations(v: &mut Vec<usize>, start: usize, f: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        f(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permutations(v, start + 1, f);
        v.swap(start, i);
    }
}

/// Largest absolute difference between library metrics and the oracles
/// over all pairs of partitions of `n` points into at most `max_k`
/// clusters.
pub fn exhaustive_metric_gap(n: usize, max_k: usize) -> f64 {
    use sparse_spectral::MetricReport;
    let parts = all_partitions(n, max_k);
    let mut worst = 0.0f64;
    for a in &parts {
        let pa = Partition::from_raw(a);
        for b in &parts {
            let pb = Partition::from_raw(b);
            let r = MetricReport::compute(&pa, &pb).unwrap();
            let (p, rc, f) = oracle_prf(a, b);
            let gaps = [
                r.precision - p,
                r.recall - rc,
                r.f_score - f,
                r.nmi - oracle_nmi(a, b),
                r.adjusted_rand - oracle_ari(a, b),
                r.clustering_error - oracle_error(a, b),
            ];
            for g in gaps {
                worst = worst.max(g.abs());
            }
        }
    }
    worst
}
