//! Partitions of a fixed point set into `s` nonempty clusters, plus the
//! confusion-matrix statistics shared by the membership-based distances and a
//! small exhaustive enumerator used as a test oracle.

use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate_partitions`]; the enumeration is a
/// test-scale oracle, not a production path.
pub const ENUMERATION_LIMIT: usize = 12;

/// An assignment of `n` points to `s` nonempty clusters.
///
/// Labels lie in `0..s` and every label occurs at least once. Two partitions
/// compare equal iff they are the same up to relabeling of clusters, i.e.
/// their canonical forms match.
#[derive(Debug, Clone)]
pub struct Partition {
    labels: Vec<usize>,
    s: usize,
}

impl Partition {
    /// Builds a partition from an explicit label vector and cluster count,
    /// validating the nonempty-cluster invariant.
    pub fn new(labels: Vec<usize>, s: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Invariant("empty assignment vector".into()));
        }
        if s == 0 {
            return Err(Error::Invariant("cluster count must be positive".into()));
        }
        let mut seen = vec![false; s];
        for (i, &l) in labels.iter().enumerate() {
            if l >= s {
                return Err(Error::Invariant(format!(
                    "label {l} at point {i} outside 0..{s}"
                )));
            }
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|&b| !b) {
            return Err(Error::Invariant(format!("cluster {missing} is empty")));
        }
        Ok(Self { labels, s })
    }

    /// Builds a partition inferring `s` as `max(labels) + 1`.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let s = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self::new(labels, s)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.s
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_of(&self, point: usize) -> usize {
        self.labels[point]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.s];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Point indices of cluster `j`, in point order.
    pub fn members(&self, j: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == j).then_some(i))
            .collect()
    }

    /// Relabels clusters by order of first occurrence. Idempotent.
    pub fn canonicalize(&self) -> Partition {
        let mut map = vec![usize::MAX; self.s];
        let mut next = 0usize;
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
        Partition { labels, s: self.s }
    }

    pub fn is_canonical(&self) -> bool {
        let mut next = 0usize;
        for &l in &self.labels {
            if l == next {
                next += 1;
            } else if l > next {
                return false;
            }
        }
        next == self.s
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        if self.labels.len() != other.labels.len() || self.s != other.s {
            return false;
        }
        // Equal iff the label maps are a consistent bijection.
        let mut fwd = vec![usize::MAX; self.s];
        let mut bwd = vec![usize::MAX; other.s];
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            if fwd[a] == usize::MAX && bwd[b] == usize::MAX {
                fwd[a] = b;
                bwd[b] = a;
            } else if fwd[a] != b || bwd[b] != a {
                return false;
            }
        }
        true
    }
}

impl Eq for Partition {}

impl Hash for Partition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        // Hash the canonical relabeling so equal partitions hash alike.
        let mut map = vec![usize::MAX; self.s];
        let mut next = 0usize;
        state.write_usize(self.labels.len());
        for &l in &self.labels {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            state.write_usize(map[l]);
        }
    }
}

/// Co-membership counts between two partitions of the same point set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    row_marginals: Vec<u64>,
    col_marginals: Vec<u64>,
    n: usize,
}

impl ConfusionMatrix {
    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.cols + b]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_marginal(&self, a: usize) -> u64 {
        self.row_marginals[a]
    }

    pub fn col_marginal(&self, b: usize) -> u64 {
        self.col_marginals[b]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> ConfusionMatrix {
        let mut counts = vec![0u64; self.counts.len()];
        for a in 0..self.rows {
            for b in 0..self.cols {
                counts[b * self.rows + a] = self.count(a, b);
            }
        }
        ConfusionMatrix {
            counts,
            rows: self.cols,
            cols: self.rows,
            row_marginals: self.col_marginals.clone(),
            col_marginals: self.row_marginals.clone(),
            n: self.n,
        }
    }
}

/// Counts `counts[a][b] = |{i : p(i)=a and q(i)=b}|`.
pub fn confusion(p: &Partition, q: &Partition) -> Result<ConfusionMatrix> {
    if p.n() != q.n() {
        return Err(Error::Dimension {
            expected: p.n(),
            got: q.n(),
        });
    }
    let rows = p.num_clusters();
    let cols = q.num_clusters();
    let mut counts = vec![0u64; rows * cols];
    for (&a, &b) in p.labels().iter().zip(q.labels()) {
        counts[a * cols + b] += 1;
    }
    let mut row_marginals = vec![0u64; rows];
    let mut col_marginals = vec![0u64; cols];
    for a in 0..rows {
        for b in 0..cols {
            row_marginals[a] += counts[a * cols + b];
            col_marginals[b] += counts[a * cols + b];
        }
    }
    Ok(ConfusionMatrix {
        counts,
        rows,
        cols,
        row_marginals,
        col_marginals,
        n: p.n(),
    })
}

/// Stirling number of the second kind S(n, s) via the standard recurrence.
pub fn stirling2(n: usize, s: usize) -> u64 {
    if s == 0 {
        return u64::from(n == 0);
    }
    if s > n {
        return 0;
    }
    // table[j] = S(i, j) for the current i
    let mut table = vec![0u64; s + 1];
    table[0] = 1; // S(0,0)
    for i in 1..=n {
        for j in (1..=s.min(i)).rev() {
            table[j] = (j as u64) * table[j] + table[j - 1];
        }
        table[0] = 0;
    }
    table[s]
}

/// Yields every partition of `n` labeled points into exactly `s` nonempty
/// clusters, each once, in canonical form. Test-scale oracle: `n` is capped
/// at [`ENUMERATION_LIMIT`].
pub fn enumerate_partitions(n: usize, s: usize) -> Result<Vec<Partition>> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::Scale(format!(
            "enumeration supports n <= {ENUMERATION_LIMIT}, got {n}"
        )));
    }
    if s == 0 || s > n {
        return Err(Error::Param(format!(
            "cluster count {s} outside 1..={n}"
        )));
    }
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    // Restricted-growth strings: labels[0] = 0; labels[i] <= max(labels[..i]) + 1.
    fn rec(labels: &mut Vec<usize>, i: usize, used: usize, n: usize, s: usize, out: &mut Vec<Partition>) {
        if i == n {
            if used == s {
                out.push(Partition {
                    labels: labels.clone(),
                    s,
                });
            }
            return;
        }
        // Remaining points must still be able to open the missing clusters.
        let remaining = n - i;
        for l in 0..=used.min(s - 1) {
            let used_next = if l == used { used + 1 } else { used };
            if used_next + (remaining - 1) < s {
                continue;
            }
            labels[i] = l;
            rec(labels, i + 1, used_next, n, s, out);
        }
    }
    rec(&mut labels, 0, 0, n, s, &mut out);
    Ok(out)
}
