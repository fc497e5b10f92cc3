use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A hard clustering of `n` points: `labels[i] ∈ [0, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Wraps `labels`, requiring every label to be below `k`.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for k = {k}"
            )));
        }
        Ok(Self { labels, k })
    }

    /// Builds a partition from arbitrary integer labels, compacting the
    /// distinct values (in ascending order) onto `0..k`.
    pub fn from_raw<T: Ord + Copy>(raw: &[T]) -> Self {
        let mut ids = BTreeMap::new();
        for &v in raw {
            ids.entry(v).or_insert(0usize);
        }
        for (next, id) in ids.values_mut().enumerate() {
            *id = next;
        }
        let labels = raw.iter().map(|v| ids[v]).collect();
        Self {
            labels,
            k: ids.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of label values (some clusters may be empty).
    pub fn num_clusters(&self) -> usize {
        self.k
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Reorders points: point `i` of `self` becomes point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.len() {
            return Err(Error::Dimension(format!(
                "permutation of length {} for {} labels",
                perm.len(),
                self.len()
            )));
        }
        let mut labels = vec![0; self.len()];
        for (i, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[i];
        }
        Ok(Self { labels, k: self.k })
    }

    /// Relabels into first-appearance order, giving a canonical form for
    /// comparing partitions up to label permutation.
    pub fn canonical(&self) -> Self {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Self { labels, k: next }
    }

    /// True when the two partitions group points identically.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.canonical().labels == other.canonical().labels
    }
}
