use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Assignment of `D` variables to `K` non-empty groups.
///
/// Group ids are canonical: `0..K` numbered by first appearance, so two
/// label vectors describing the same grouping compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assign: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Accepts arbitrary label values (e.g. the 1-based ids used on the CLI).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("partition must cover at least one variable".into()));
        }
        let mut seen: Vec<(usize, usize)> = Vec::new();
        let mut assign = Vec::with_capacity(labels.len());
        let mut sizes = Vec::new();
        for &l in labels {
            let id = match seen.iter().find(|(label, _)| *label == l) {
                Some(&(_, id)) => id,
                None => {
                    seen.push((l, sizes.len()));
                    sizes.push(0);
                    sizes.len() - 1
                }
            };
            sizes[id] += 1;
            assign.push(id);
        }
        Ok(Self { assign, sizes })
    }

    pub fn single_group(dim: usize) -> Self {
        Self::from_labels(&vec![0; dim]).expect("dim >= 1")
    }

    pub fn singletons(dim: usize) -> Self {
        Self::from_labels(&(0..dim).collect::<Vec<_>>()).expect("dim >= 1")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.assign.len()
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn group_of(&self, i: usize) -> usize {
        self.assign[i]
    }

    #[inline]
    pub fn same_group(&self, i: usize, j: usize) -> bool {
        self.assign[i] == self.assign[j]
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.assign[i] == k).collect()
    }

    /// Number of between-group entries for groups `k != l`.
    pub fn c_kl(&self, k: usize, l: usize) -> usize {
        self.sizes[k] * self.sizes[l]
    }

    /// Number of within-group off-diagonal entries (upper triangle).
    pub fn c_t(&self) -> usize {
        self.sizes.iter().map(|s| s * (s - 1) / 2).sum()
    }

    /// 1-based labels, as written in reports and on the CLI.
    pub fn labels_one_based(&self) -> Vec<usize> {
        self.assign.iter().map(|z| z + 1).collect()
    }

    /// Moves the variables in `moved` (all members of group `k`) into a new
    /// group. Both sides must be non-empty.
    pub fn split(&self, k: usize, moved: &[usize]) -> Result<Self> {
        if k >= self.k() {
            return Err(Error::InvalidInput(format!("no group {k}")));
        }
        if moved.is_empty() || moved.len() >= self.sizes[k] {
            return Err(Error::NotSplittable(format!(
                "split of group {k} (size {}) into {} + {} is degenerate",
                self.sizes[k],
                self.sizes[k].saturating_sub(moved.len()),
                moved.len()
            )));
        }
        let mut labels = self.assign.clone();
        let fresh = self.k();
        for &i in moved {
            if self.assign[i] != k {
                return Err(Error::InvalidInput(format!("variable {i} is not in group {k}")));
            }
            labels[i] = fresh;
        }
        Self::from_labels(&labels)
    }

    /// Returns the partition with variable `i` moved to group `k` (which may
    /// be `K`, creating a new group); empty groups are dropped.
    pub fn with_move(&self, i: usize, k: usize) -> Self {
        let mut labels = self.assign.clone();
        labels[i] = k;
        Self::from_labels(&labels).expect("non-empty")
    }

    /// Partition of permuted variables, `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let labels: Vec<usize> = perm.iter().map(|&old| self.assign[old]).collect();
        Self::from_labels(&labels).expect("non-empty")
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let labels = Vec::<usize>::deserialize(deserializer)?;
        Partition::from_labels(&labels).map_err(serde::de::Error::custom)
    }
}

/// Adjusted Rand index between two labelings of the same variables.
pub fn adjusted_rand_index(a: &Partition, b: &Partition) -> f64 {
    assert_eq!(a.dim(), b.dim(), "partitions must cover the same variables");
    let n = a.dim();
    let choose2 = |x: usize| (x * x.saturating_sub(1)) as f64 / 2.0;
    let mut table = vec![0usize; a.k() * b.k()];
    for i in 0..n {
        table[a.group_of(i) * b.k() + b.group_of(i)] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let sum_a: f64 = a.sizes().iter().map(|&s| choose2(s)).sum();
    let sum_b: f64 = b.sizes().iter().map(|&s| choose2(s)).sum();
    let total = choose2(n);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if (max - expected).abs() < f64::EPSILON {
        // both partitions trivial (all-one-group or all-singleton) on both sides
        return if a == b { 1.0 } else { 0.0 };
    }
    (index - expected) / (max - expected)
}
