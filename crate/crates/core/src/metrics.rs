//! Clustering quality measures computed from the contingency table of two
//! partitions.
//!
//! * Pairwise precision / recall / F-score over unordered point pairs.
//! * NMI normalized by the arithmetic mean of the two entropies.
//! * Adjusted Rand index (Hubert–Arabie).
//! * Clustering error under the best one-to-one label matching.

use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseScores {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// All metrics for one predicted partition against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub f_score: f64,
    pub precision: f64,
    pub recall: f64,
    pub nmi: f64,
    pub adjusted_rand: f64,
    pub clustering_error: f64,
}

impl MetricReport {
    pub fn compute(pred: &Partition, truth: &Partition) -> Result<Self> {
        let prf = pairwise_prf(pred, truth)?;
        Ok(Self {
            f_score: prf.f_score,
            precision: prf.precision,
            recall: prf.recall,
            nmi: nmi(pred, truth)?,
            adjusted_rand: adjusted_rand(pred, truth)?,
            clustering_error: clustering_error(pred, truth)?,
        })
    }

    /// `(name, value)` pairs in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("f_score", self.f_score),
            ("precision", self.precision),
            ("recall", self.recall),
            ("nmi", self.nmi),
            ("adjusted_rand", self.adjusted_rand),
            ("clustering_error", self.clustering_error),
        ]
    }
}

struct Contingency {
    table: Vec<Vec<usize>>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    n: usize,
}

impl Contingency {
    fn new(pred: &Partition, truth: &Partition) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Dimension(format!(
                "partitions have {} and {} points",
                pred.len(),
                truth.len()
            )));
        }
        let (kp, kt) = (pred.num_clusters(), truth.num_clusters());
        let mut table = vec![vec![0usize; kt]; kp];
        for (&a, &b) in pred.labels().iter().zip(truth.labels()) {
            table[a][b] += 1;
        }
        let rows = table.iter().map(|r| r.iter().sum()).collect();
        let cols = (0..kt).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        Ok(Self {
            table,
            rows,
            cols,
            n: pred.len(),
        })
    }

    fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.table.iter().flatten().copied()
    }
}

fn pairs(c: usize) -> f64 {
    (c * c.saturating_sub(1) / 2) as f64
}

/// Pair-counting precision, recall and F-score. Zero denominators give 0.
pub fn pairwise_prf(pred: &Partition, truth: &Partition) -> Result<PairwiseScores> {
    let ct = Contingency::new(pred, truth)?;
    if ct.n < 2 {
        return Err(Error::UndefinedMetric(
            "pairwise scores need at least two points".into(),
        ));
    }
    let tp: f64 = ct.cells().map(pairs).sum();
    let pred_pairs: f64 = ct.rows.iter().copied().map(pairs).sum();
    let truth_pairs: f64 = ct.cols.iter().copied().map(pairs).sum();
    let precision = if pred_pairs > 0.0 {
        tp / pred_pairs
    } else {
        0.0
    };
    let recall = if truth_pairs > 0.0 {
        tp / truth_pairs
    } else {
        0.0
    };
    let f_score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(PairwiseScores {
        precision,
        recall,
        f_score,
    })
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I / ((H_pred + H_truth) / 2)`. Two
/// single-cluster partitions score 1.
pub fn nmi(pred: &Partition, truth: &Partition) -> Result<f64> {
    let ct = Contingency::new(pred, truth)?;
    if ct.n == 0 {
        return Err(Error::UndefinedMetric("empty partitions".into()));
    }
    let n = ct.n as f64;
    let hp = entropy(&ct.rows, n);
    let ht = entropy(&ct.cols, n);
    if hp == 0.0 && ht == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (i, row) in ct.table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (ct.rows[i] as f64 * ct.cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (0.5 * (hp + ht))).clamp(0.0, 1.0))
}

/// Hubert–Arabie adjusted Rand index. When the chance-corrected denominator
/// vanishes (both partitions trivial) the result is 1 for identical
/// groupings and 0 otherwise.
pub fn adjusted_rand(pred: &Partition, truth: &Partition) -> Result<f64> {
    let ct = Contingency::new(pred, truth)?;
    if ct.n == 0 {
        return Err(Error::UndefinedMetric("empty partitions".into()));
    }
    let index: f64 = ct.cells().map(pairs).sum();
    let a: f64 = ct.rows.iter().copied().map(pairs).sum();
    let b: f64 = ct.cols.iter().copied().map(pairs).sum();
    let total = pairs(ct.n);
    let expected = if total > 0.0 { a * b / total } else { 0.0 };
    let max = 0.5 * (a + b);
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(if pred.same_grouping(truth) { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

/// `1 − (best one-to-one matched count) / n`. With unequal cluster counts
/// the matching runs over the larger label set and unmatched labels
/// contribute nothing.
pub fn clustering_error(pred: &Partition, truth: &Partition) -> Result<f64> {
    let ct = Contingency::new(pred, truth)?;
    if ct.n == 0 {
        return Err(Error::UndefinedMetric("empty partitions".into()));
    }
    let size = ct.rows.len().max(ct.cols.len());
    let mut gain = vec![vec![0i64; size]; size];
    for (i, row) in ct.table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            gain[i][j] = c as i64;
        }
    }
    let matched = max_weight_assignment(&gain);
    Ok(1.0 - matched as f64 / ct.n as f64)
}

/// Maximum-weight perfect matching on a square gain matrix (Hungarian
/// method with potentials, `O(k³)`).
fn max_weight_assignment(gain: &[Vec<i64>]) -> i64 {
    let n = gain.len();
    if n == 0 {
        return 0;
    }
    let big = gain.iter().flatten().copied().max().unwrap_or(0);
    // Minimize cost = big − gain. 1-based indexing for the dummy column 0.
    let cost = |i: usize, j: usize| big - gain[i - 1][j - 1];
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| gain[owner[j] - 1][j - 1]).sum()
}
