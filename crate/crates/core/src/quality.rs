//! Partition quality functionals and the incremental cache that makes the
//! per-point candidate evaluation in the Gibbs sweep affordable.
//!
//! Two functionals are provided. The kernel quality sums within-cluster
//! kernel self-similarities `sum_j kappa(X_j, X_j)`; larger is better and it
//! is dominated by points that fit their cluster well. The squared-error
//! quality is the inverse of the total within-cluster squared deviation from
//! cluster means, guarded by a small epsilon at the perfect-fit singularity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::partition::Partition;

/// Guard against the zero-deviation singularity in [`kmeans_quality`].
pub const KMEANS_EPS: f64 = 1e-12;

/// Relative tolerance for cache self-checks against from-scratch totals.
pub const CACHE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Gaussian,
}

/// A positive-definite kernel; `eval` is in (0, 1] with `K(x, x) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Param(format!(
                "kernel bandwidth must be a positive finite number, got {bandwidth}"
            )));
        }
        Ok(Self {
            kind: KernelKind::Gaussian,
            bandwidth,
        })
    }

    #[inline]
    pub fn eval_sq_dist(&self, sq_dist: f64) -> f64 {
        match self.kind {
            KernelKind::Gaussian => (-sq_dist / (2.0 * self.bandwidth * self.bandwidth)).exp(),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.eval_sq_dist(sq)
    }
}

/// Which quality functional drives a sampler chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QualityKind {
    Kernel,
    KMeans,
}

impl QualityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            QualityKind::Kernel => "kernel",
            QualityKind::KMeans => "kmeans",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(QualityKind::Kernel),
            "kmeans" => Ok(QualityKind::KMeans),
            other => Err(Error::Param(format!(
                "unknown quality kind '{other}' (expected kernel|kmeans)"
            ))),
        }
    }
}

/// Bandwidth from the median heuristic: the median distance over 1000 random
/// point pairs. Falls back to 1.0 when the sampled median is zero
/// (degenerate duplicate data). Deterministic given the seed.
pub fn median_heuristic_bandwidth(points: &PointSet, seed: u64) -> f64 {
    const PAIRS: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = points.n();
    let mut dists: Vec<f64> = (0..PAIRS)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            points.dist(i, j)
        })
        .collect();
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = dists[PAIRS / 2];
    if median > 0.0 {
        median
    } else {
        1.0
    }
}

/// Precomputed kernel values for all point pairs of one dataset.
#[derive(Debug, Clone)]
pub struct KernelGram {
    vals: Vec<f64>,
    n: usize,
}

impl KernelGram {
    pub fn compute(points: &PointSet, kernel: &KernelSpec) -> Self {
        let n = points.n();
        let mut vals = vec![0.0f64; n * n];
        for i in 0..n {
            vals[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let k = kernel.eval_sq_dist(points.sq_dist(i, j));
                vals[i * n + j] = k;
                vals[j * n + i] = k;
            }
        }
        Self { vals, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.vals[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.vals[i * self.n..(i + 1) * self.n]
    }
}

/// Kernel distance quality: sum over clusters of all ordered within-cluster
/// kernel terms, self-terms included. Accumulated in point-pair order, so the
/// value is exactly invariant under cluster relabeling.
pub fn kernel_quality(p: &Partition, points: &PointSet, kernel: &KernelSpec) -> f64 {
    debug_assert_eq!(p.n(), points.n());
    let n = p.n();
    let mut total = n as f64; // self-terms: K(x, x) = 1
    for i in 0..n {
        for j in (i + 1)..n {
            if p.label_of(i) == p.label_of(j) {
                total += 2.0 * kernel.eval_sq_dist(points.sq_dist(i, j));
            }
        }
    }
    total
}

/// Same functional evaluated through a precomputed Gram matrix.
pub fn kernel_quality_gram(p: &Partition, gram: &KernelGram) -> f64 {
    debug_assert_eq!(p.n(), gram.n());
    let n = p.n();
    let mut total = n as f64;
    for i in 0..n {
        let row = gram.row(i);
        let li = p.label_of(i);
        for j in (i + 1)..n {
            if li == p.label_of(j) {
                total += 2.0 * row[j];
            }
        }
    }
    total
}

/// Squared-error quality: the inverse of the total within-cluster squared
/// deviation from cluster means, with an epsilon guard. Evaluated on the
/// canonical form so the value is exactly invariant under relabeling.
pub fn kmeans_quality(p: &Partition, points: &PointSet) -> f64 {
    debug_assert_eq!(p.n(), points.n());
    let p = p.canonicalize();
    let (s, d, n) = (p.num_clusters(), points.d(), points.n());
    let mut sums = vec![0.0f64; s * d];
    let mut counts = vec![0usize; s];
    for i in 0..n {
        let j = p.label_of(i);
        counts[j] += 1;
        for (c, v) in points.point(i).iter().enumerate() {
            sums[j * d + c] += v;
        }
    }
    let mut ssq = 0.0f64;
    for i in 0..n {
        let j = p.label_of(i);
        let m = counts[j] as f64;
        ssq += points
            .point(i)
            .iter()
            .enumerate()
            .map(|(c, v)| {
                let diff = v - sums[j * d + c] / m;
                diff * diff
            })
            .sum::<f64>();
    }
    1.0 / (KMEANS_EPS + ssq)
}

enum CacheState<'a> {
    Kernel {
        gram: &'a KernelGram,
        // kappa(X_j, X_j) per cluster, self-terms included.
        cluster_self_sim: Vec<f64>,
    },
    KMeans {
        // Per-cluster coordinate sums (s x d) and per-cluster sum of ||x||^2.
        sums: Vec<f64>,
        sumsq: Vec<f64>,
        d: usize,
    },
}

/// Mutable partition state with cached per-cluster totals, supporting O(n)
/// evaluation of all single-point move candidates and O(cluster-size) (or
/// O(d)) move application. Single-owner: one sampler chain per cache.
pub struct QualityCache<'a> {
    points: &'a PointSet,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    s: usize,
    state: CacheState<'a>,
}

impl<'a> QualityCache<'a> {
    pub fn kernel(
        points: &'a PointSet,
        gram: &'a KernelGram,
        partition: &Partition,
    ) -> Result<Self> {
        if partition.n() != points.n() || gram.n() != points.n() {
            return Err(Error::Dimension {
                expected: points.n(),
                got: partition.n(),
            });
        }
        let s = partition.num_clusters();
        let mut cluster_self_sim = vec![0.0f64; s];
        let n = points.n();
        for i in 0..n {
            let li = partition.label_of(i);
            cluster_self_sim[li] += 1.0;
            let row = gram.row(i);
            for j in (i + 1)..n {
                if li == partition.label_of(j) {
                    cluster_self_sim[li] += 2.0 * row[j];
                }
            }
        }
        Ok(Self {
            points,
            labels: partition.labels().to_vec(),
            sizes: partition.cluster_sizes(),
            s,
            state: CacheState::Kernel {
                gram,
                cluster_self_sim,
            },
        })
    }

    pub fn kmeans(points: &'a PointSet, partition: &Partition) -> Result<Self> {
        if partition.n() != points.n() {
            return Err(Error::Dimension {
                expected: points.n(),
                got: partition.n(),
            });
        }
        let s = partition.num_clusters();
        let d = points.d();
        let mut sums = vec![0.0f64; s * d];
        let mut sumsq = vec![0.0f64; s];
        for i in 0..points.n() {
            let j = partition.label_of(i);
            for (c, v) in points.point(i).iter().enumerate() {
                sums[j * d + c] += v;
                sumsq[j] += v * v;
            }
        }
        Ok(Self {
            points,
            labels: partition.labels().to_vec(),
            sizes: partition.cluster_sizes(),
            s,
            state: CacheState::KMeans { sums, sumsq, d },
        })
    }

    pub fn kind(&self) -> QualityKind {
        match self.state {
            CacheState::Kernel { .. } => QualityKind::Kernel,
            CacheState::KMeans { .. } => QualityKind::KMeans,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_clusters(&self) -> usize {
        self.s
    }

    pub fn cluster_size(&self, j: usize) -> usize {
        self.sizes[j]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Canonical snapshot of the current partition.
    pub fn snapshot(&self) -> Partition {
        Partition::new(self.labels.clone(), self.s)
            .expect("cache maintains partition invariants")
            .canonicalize()
    }

    /// Current quality from the cached totals.
    pub fn quality(&self) -> f64 {
        match &self.state {
            CacheState::Kernel {
                cluster_self_sim, ..
            } => cluster_self_sim.iter().sum(),
            CacheState::KMeans { .. } => 1.0 / (KMEANS_EPS + self.total_ssq()),
        }
    }

    fn total_ssq(&self) -> f64 {
        match &self.state {
            CacheState::KMeans { sums, sumsq, d } => {
                let mut ssq = 0.0;
                for j in 0..self.s {
                    if self.sizes[j] > 0 {
                        let norm_sq: f64 =
                            sums[j * d..(j + 1) * d].iter().map(|v| v * v).sum();
                        ssq += sumsq[j] - norm_sq / self.sizes[j] as f64;
                    }
                }
                ssq
            }
            CacheState::Kernel { .. } => unreachable!("kernel cache has no SSQ"),
        }
    }

    /// Kernel sums S_j(x) = sum_{y in cluster j} K(x, y) for all clusters at
    /// once, in one pass over the Gram row of `point`.
    fn kernel_row_sums(&self, point: usize, out: &mut [f64]) {
        let CacheState::Kernel { gram, .. } = &self.state else {
            unreachable!("row sums are kernel-only")
        };
        out.fill(0.0);
        let row = gram.row(point);
        for (y, &k) in row.iter().enumerate() {
            out[self.labels[y]] += k;
        }
    }

    /// The full-partition quality that would result from moving `point` to
    /// `target`, without mutating the cache. For the current cluster this is
    /// the current quality, bit-exactly.
    pub fn quality_delta(&self, point: usize, target: usize) -> Result<f64> {
        self.check_move_args(point, target)?;
        let cur = self.labels[point];
        if target == cur {
            return Ok(self.quality());
        }
        match &self.state {
            CacheState::Kernel {
                gram,
                cluster_self_sim,
            } => {
                let row = gram.row(point);
                let mut s_cur = 0.0;
                let mut s_tgt = 0.0;
                for (y, &k) in row.iter().enumerate() {
                    let l = self.labels[y];
                    if l == cur {
                        s_cur += k;
                    } else if l == target {
                        s_tgt += k;
                    }
                }
                let total: f64 = cluster_self_sim.iter().sum();
                Ok(total - 2.0 * s_cur + 2.0 * s_tgt + 2.0)
            }
            CacheState::KMeans { sums, sumsq, d } => {
                let x = self.points.point(point);
                let ssq = self.total_ssq();
                let new_ssq = ssq - self.cluster_ssq_raw(cur, sums, sumsq, *d)
                    + self.cluster_ssq_after_remove(cur, x, sums, sumsq, *d)
                    - self.cluster_ssq_raw(target, sums, sumsq, *d)
                    + self.cluster_ssq_after_add(target, x, sums, sumsq, *d);
                Ok(1.0 / (KMEANS_EPS + new_ssq))
            }
        }
    }

    /// Candidate qualities for every target cluster of `point` in one pass;
    /// `out[current]` is the current quality bit-exactly.
    pub fn candidate_qualities(&self, point: usize, out: &mut Vec<f64>) -> Result<()> {
        if point >= self.labels.len() {
            return Err(Error::Param(format!("point {point} out of range")));
        }
        out.clear();
        out.resize(self.s, 0.0);
        let cur = self.labels[point];
        match &self.state {
            CacheState::Kernel {
                cluster_self_sim, ..
            } => {
                let mut row_sums = vec![0.0f64; self.s];
                self.kernel_row_sums(point, &mut row_sums);
                let total: f64 = cluster_self_sim.iter().sum();
                for j in 0..self.s {
                    out[j] = if j == cur {
                        total
                    } else {
                        total - 2.0 * row_sums[cur] + 2.0 * row_sums[j] + 2.0
                    };
                }
            }
            CacheState::KMeans { sums, sumsq, d } => {
                let x = self.points.point(point);
                let ssq = self.total_ssq();
                let base = ssq - self.cluster_ssq_raw(cur, sums, sumsq, *d)
                    + self.cluster_ssq_after_remove(cur, x, sums, sumsq, *d);
                for j in 0..self.s {
                    out[j] = if j == cur {
                        1.0 / (KMEANS_EPS + ssq)
                    } else {
                        let new_ssq = base - self.cluster_ssq_raw(j, sums, sumsq, *d)
                            + self.cluster_ssq_after_add(j, x, sums, sumsq, *d);
                        1.0 / (KMEANS_EPS + new_ssq)
                    };
                }
            }
        }
        Ok(())
    }

    fn cluster_ssq_raw(&self, j: usize, sums: &[f64], sumsq: &[f64], d: usize) -> f64 {
        if self.sizes[j] == 0 {
            return 0.0;
        }
        let norm_sq: f64 = sums[j * d..(j + 1) * d].iter().map(|v| v * v).sum();
        sumsq[j] - norm_sq / self.sizes[j] as f64
    }

    fn cluster_ssq_after_remove(
        &self,
        j: usize,
        x: &[f64],
        sums: &[f64],
        sumsq: &[f64],
        d: usize,
    ) -> f64 {
        let m = self.sizes[j];
        if m <= 1 {
            return 0.0;
        }
        let x_norm: f64 = x.iter().map(|v| v * v).sum();
        let norm_sq: f64 = sums[j * d..(j + 1) * d]
            .iter()
            .zip(x)
            .map(|(sv, xv)| {
                let r = sv - xv;
                r * r
            })
            .sum();
        sumsq[j] - x_norm - norm_sq / (m - 1) as f64
    }

    fn cluster_ssq_after_add(
        &self,
        j: usize,
        x: &[f64],
        sums: &[f64],
        sumsq: &[f64],
        d: usize,
    ) -> f64 {
        let m = self.sizes[j];
        let x_norm: f64 = x.iter().map(|v| v * v).sum();
        let norm_sq: f64 = sums[j * d..(j + 1) * d]
            .iter()
            .zip(x)
            .map(|(sv, xv)| {
                let r = sv + xv;
                r * r
            })
            .sum();
        sumsq[j] + x_norm - norm_sq / (m + 1) as f64
    }

    /// Moves `point` to `target`, updating cached totals incrementally.
    /// Rejects moves that would empty the source cluster.
    pub fn apply_move(&mut self, point: usize, target: usize) -> Result<()> {
        self.check_move_args(point, target)?;
        let cur = self.labels[point];
        if target == cur {
            return Ok(());
        }
        if self.sizes[cur] == 1 {
            return Err(Error::EmptyClusterMove);
        }
        match &mut self.state {
            CacheState::Kernel {
                gram,
                cluster_self_sim,
            } => {
                let row = gram.row(point);
                let mut s_cur = 0.0;
                let mut s_tgt = 0.0;
                for (y, &k) in row.iter().enumerate() {
                    let l = self.labels[y];
                    if l == cur {
                        s_cur += k;
                    } else if l == target {
                        s_tgt += k;
                    }
                }
                // kappa(A \ x) = kappa(A) - 2 S_A(x) + 1; kappa(B + x) = kappa(B) + 2 S_B(x) + 1.
                cluster_self_sim[cur] += -2.0 * s_cur + 1.0;
                cluster_self_sim[target] += 2.0 * s_tgt + 1.0;
            }
            CacheState::KMeans { sums, sumsq, d } => {
                let x = self.points.point(point);
                let mut x_norm = 0.0;
                for (c, v) in x.iter().enumerate() {
                    sums[cur * *d + c] -= v;
                    sums[target * *d + c] += v;
                    x_norm += v * v;
                }
                sumsq[cur] -= x_norm;
                sumsq[target] += x_norm;
            }
        }
        self.labels[point] = target;
        self.sizes[cur] -= 1;
        self.sizes[target] += 1;
        Ok(())
    }

    fn check_move_args(&self, point: usize, target: usize) -> Result<()> {
        if point >= self.labels.len() {
            return Err(Error::Param(format!("point {point} out of range")));
        }
        if target >= self.s {
            return Err(Error::Param(format!(
                "target cluster {target} outside 0..{}",
                self.s
            )));
        }
        Ok(())
    }

    /// Recomputes every cached total from scratch and errors if any drifted
    /// beyond [`CACHE_TOL`] relative.
    pub fn verify(&self) -> Result<()> {
        let partition = Partition::new(self.labels.clone(), self.s)
            .map_err(|e| Error::Consistency(format!("invalid cached labels: {e}")))?;
        let fresh = match &self.state {
            CacheState::Kernel { gram, .. } => kernel_quality_gram(&partition, gram),
            CacheState::KMeans { .. } => kmeans_quality(&partition, self.points),
        };
        let cached = self.quality();
        let rel = (cached - fresh).abs() / fresh.abs().max(f64::MIN_POSITIVE);
        if rel > CACHE_TOL {
            return Err(Error::Consistency(format!(
                "cached quality {cached} vs recomputed {fresh} (rel {rel:.3e})"
            )));
        }
        Ok(())
    }
}
