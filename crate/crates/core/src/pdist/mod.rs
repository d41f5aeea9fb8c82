//! Distances between partitions: membership-based (Rand, variation of
//! information, NMI), the spatially-sensitive LiftEMD (kernel mean
//! embeddings compared by exact earthmover's distance), and the density
//! rank distance over a sample collection.

mod emd;

pub use emd::{transport_emd, EmdSolver, BALANCE_TOL};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::partition::{confusion, Partition};
use crate::quality::{KernelGram, KernelSpec};

/// Element distance selectable for pairwise matrices and grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Rand,
    Vi,
    Nmi,
    LiftEmd,
}

impl DistanceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceKind::Rand => "rand",
            DistanceKind::Vi => "vi",
            DistanceKind::Nmi => "nmi",
            DistanceKind::LiftEmd => "liftemd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rand" => Ok(DistanceKind::Rand),
            "vi" => Ok(DistanceKind::Vi),
            "nmi" => Ok(DistanceKind::Nmi),
            "liftemd" => Ok(DistanceKind::LiftEmd),
            other => Err(Error::Param(format!(
                "unknown distance kind '{other}' (expected rand|vi|nmi|liftemd)"
            ))),
        }
    }
}

/// Symmetric nonnegative distances with zero diagonal over `m` items.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    m: usize,
    kind: String,
    vals: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from raw values, enforcing the symmetry/diagonal contract.
    pub fn new_raw(m: usize, kind: impl Into<String>, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != m * m {
            return Err(Error::Dimension {
                expected: m * m,
                got: vals.len(),
            });
        }
        for i in 0..m {
            if vals[i * m + i] != 0.0 {
                return Err(Error::Contract(format!(
                    "diagonal entry ({i},{i}) is {}, expected exactly 0",
                    vals[i * m + i]
                )));
            }
            for j in (i + 1)..m {
                let (a, b) = (vals[i * m + j], vals[j * m + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Contract(format!(
                        "asymmetric entries at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self {
            m,
            kind: kind.into(),
            vals,
        })
    }

    /// Computes entries `i < j` with `f` and mirrors them; the diagonal is
    /// exactly zero and the result is independent of evaluation order.
    pub fn try_from_fn<F>(
        m: usize,
        kind: impl Into<String>,
        parallel: bool,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let rows = triangle_rows(m, parallel, |i| {
            ((i + 1)..m).map(|j| f(i, j)).collect::<Result<Vec<f64>>>()
        })?;
        Ok(Self::assemble(m, kind, rows))
    }

    fn assemble(m: usize, kind: impl Into<String>, rows: Vec<Vec<f64>>) -> Self {
        let mut vals = vec![0.0f64; m * m];
        for (i, row) in rows.into_iter().enumerate() {
            for (offset, v) in row.into_iter().enumerate() {
                let j = i + 1 + offset;
                vals[i * m + j] = v;
                vals[j * m + i] = v;
            }
        }
        Self {
            m,
            kind: kind.into(),
            vals,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.vals[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vals[i * self.m..(i + 1) * self.m]
    }

    /// Principal submatrix over `indices` (used for the representative-only
    /// scaling step).
    pub fn submatrix(&self, indices: &[usize]) -> Result<DistanceMatrix> {
        for &i in indices {
            if i >= self.m {
                return Err(Error::Param(format!("index {i} out of range")));
            }
        }
        let k = indices.len();
        let mut vals = vec![0.0f64; k * k];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                vals[a * k + b] = self.get(i, j);
            }
        }
        DistanceMatrix::new_raw(k, self.kind.clone(), vals)
    }
}

fn triangle_rows<F>(m: usize, parallel: bool, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..m).into_par_iter().map(f).collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;
    (0..m).map(f).collect()
}

/// Fraction of unordered point pairs on which the two partitions disagree
/// (co-clustered in one, separated in the other).
pub fn rand_distance(p: &Partition, q: &Partition) -> Result<f64> {
    if p.n() < 2 {
        return Err(Error::Param("rand distance needs at least 2 points".into()));
    }
    let c = confusion(p, q)?;
    let pairs = |x: u64| -> u64 { x * x.saturating_sub(1) / 2 };
    let together_p: u64 = (0..c.rows()).map(|a| pairs(c.row_marginal(a))).sum();
    let together_q: u64 = (0..c.cols()).map(|b| pairs(c.col_marginal(b))).sum();
    let together_both: u64 = (0..c.rows())
        .map(|a| (0..c.cols()).map(|b| pairs(c.count(a, b))).sum::<u64>())
        .sum();
    let disagreements = together_p + together_q - 2 * together_both;
    Ok(disagreements as f64 / pairs(c.n() as u64) as f64)
}

/// Variation of information in nats: `H(p|q) + H(q|p)`. A metric on
/// partitions; exactly zero on identical partitions.
pub fn variation_of_information(p: &Partition, q: &Partition) -> Result<f64> {
    let c = confusion(p, q)?;
    let n = c.n() as f64;
    let mut vi = 0.0f64;
    for a in 0..c.rows() {
        for b in 0..c.cols() {
            let count = c.count(a, b);
            if count == 0 {
                continue;
            }
            let joint = count as f64;
            // (count/n) * [ln(col/count) + ln(row/count)]; ln(1) = 0 exactly
            // when the cell owns its whole marginal.
            vi += (joint / n)
                * ((c.col_marginal(b) as f64 / joint).ln()
                    + (c.row_marginal(a) as f64 / joint).ln());
        }
    }
    Ok(vi)
}

fn entropy_and_mutual_information(c: &crate::partition::ConfusionMatrix) -> (f64, f64, f64) {
    let n = c.n() as f64;
    let h = |marginal: &dyn Fn(usize) -> u64, len: usize| -> f64 {
        (0..len)
            .map(|i| {
                let m = marginal(i);
                if m == 0 {
                    0.0
                } else {
                    let p = m as f64 / n;
                    -p * p.ln()
                }
            })
            .sum()
    };
    let hp = h(&|a| c.row_marginal(a), c.rows());
    let hq = h(&|b| c.col_marginal(b), c.cols());
    let mut mi = 0.0f64;
    for a in 0..c.rows() {
        for b in 0..c.cols() {
            let count = c.count(a, b);
            if count == 0 {
                continue;
            }
            let joint = count as f64 / n;
            let expected =
                (c.row_marginal(a) as f64 / n) * (c.col_marginal(b) as f64 / n);
            mi += joint * (joint / expected).ln();
        }
    }
    (hp, hq, mi)
}

/// `1 - I(p,q) / sqrt(H(p) H(q))`, clamped to [0, 1]. Undefined when either
/// partition has a single cluster.
pub fn nmi_distance(p: &Partition, q: &Partition) -> Result<f64> {
    let c = confusion(p, q)?;
    let (hp, hq, mi) = entropy_and_mutual_information(&c);
    if hp == 0.0 || hq == 0.0 {
        return Err(Error::UndefinedNormalization(
            "NMI needs both partitions to have at least two clusters".into(),
        ));
    }
    Ok((1.0 - mi / (hp * hq).sqrt()).clamp(0.0, 1.0))
}

/// Per-cluster weights, normalized self-similarities, and kernel mean
/// embedding vectors for one partition; the lifted representation compared
/// by the earthmover's distance.
#[derive(Debug, Clone)]
pub struct ClusterEmbedding {
    /// `|X_j| / n` per cluster; sums to 1.
    pub weights: Vec<f64>,
    /// Normalized self-similarity `kappa(A,A) / |A|^2` per cluster.
    pub self_sim: Vec<f64>,
    // embed[a * n + i] = (1/|A|) sum_{x in A} K(i, x)
    embed: Vec<f64>,
    inv_sizes: Vec<f64>,
    labels: Vec<usize>,
    n: usize,
}

impl ClusterEmbedding {
    pub fn lift(p: &Partition, gram: &KernelGram) -> Self {
        let n = gram.n();
        debug_assert_eq!(p.n(), n);
        let s = p.num_clusters();
        let sizes = p.cluster_sizes();
        let mut embed = vec![0.0f64; s * n];
        for x in 0..n {
            let a = p.label_of(x);
            let row = gram.row(x);
            let dst = &mut embed[a * n..(a + 1) * n];
            for (e, &k) in dst.iter_mut().zip(row) {
                *e += k;
            }
        }
        let inv_sizes: Vec<f64> = sizes.iter().map(|&c| 1.0 / c as f64).collect();
        for a in 0..s {
            for e in &mut embed[a * n..(a + 1) * n] {
                *e *= inv_sizes[a];
            }
        }
        let self_sim: Vec<f64> = (0..s)
            .map(|a| {
                let row = &embed[a * n..(a + 1) * n];
                let sum: f64 = (0..n)
                    .filter(|&i| p.label_of(i) == a)
                    .map(|i| row[i])
                    .sum();
                sum * inv_sizes[a]
            })
            .collect();
        let weights = sizes.iter().map(|&c| c as f64 / n as f64).collect();
        ClusterEmbedding {
            weights,
            self_sim,
            embed,
            inv_sizes,
            labels: p.labels().to_vec(),
            n,
        }
    }

    pub fn num_clusters(&self) -> usize {
        self.weights.len()
    }

    /// Ground matrix between this embedding and `other`, written row-major
    /// into `ground`: `D(A,B) = sqrt(max(0, k(A,A) + k(B,B) - 2 k(A,B)))`.
    fn ground_into(&self, other: &ClusterEmbedding, acc: &mut Vec<f64>, ground: &mut Vec<f64>) {
        let (sp, sq, n) = (self.num_clusters(), other.num_clusters(), self.n);
        acc.clear();
        acc.resize(sp * sq, 0.0);
        for a in 0..sp {
            let row = &self.embed[a * n..(a + 1) * n];
            let acc_row = &mut acc[a * sq..(a + 1) * sq];
            for (i, &e) in row.iter().enumerate() {
                acc_row[other.labels[i]] += e;
            }
        }
        ground.clear();
        ground.resize(sp * sq, 0.0);
        for a in 0..sp {
            for b in 0..sq {
                let cross = acc[a * sq + b] * other.inv_sizes[b];
                let sq_dist = self.self_sim[a] + other.self_sim[b] - 2.0 * cross;
                ground[a * sq + b] = sq_dist.max(0.0).sqrt();
            }
        }
    }
}

/// LiftEMD between two partitions of the same point set: clusters lifted to
/// kernel mean embeddings, compared by exact EMD over cluster mass weights.
/// Zero on relabelings; symmetric; a pseudometric.
pub fn lift_emd(
    p: &Partition,
    q: &Partition,
    points: &PointSet,
    kernel: &KernelSpec,
) -> Result<f64> {
    if p.n() != q.n() || p.n() != points.n() {
        return Err(Error::Dimension {
            expected: points.n(),
            got: if p.n() != points.n() { p.n() } else { q.n() },
        });
    }
    let gram = KernelGram::compute(points, kernel);
    let lp = ClusterEmbedding::lift(p, &gram);
    let lq = ClusterEmbedding::lift(q, &gram);
    let mut acc = Vec::new();
    let mut ground = Vec::new();
    lp.ground_into(&lq, &mut acc, &mut ground);
    let mut solver = EmdSolver::new(lp.num_clusters(), lq.num_clusters());
    Ok(solver.solve(&lp.weights, &lq.weights, &ground))
}

fn lift_emd_rows(
    partitions: &[Partition],
    gram: &KernelGram,
    parallel: bool,
) -> Result<Vec<Vec<f64>>> {
    let m = partitions.len();
    let lift_one = |p: &Partition| ClusterEmbedding::lift(p, gram);
    #[cfg(feature = "parallel")]
    let lifted: Vec<ClusterEmbedding> = if parallel {
        use rayon::prelude::*;
        partitions.par_iter().map(lift_one).collect()
    } else {
        partitions.iter().map(lift_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let lifted: Vec<ClusterEmbedding> = partitions.iter().map(lift_one).collect();

    let s_max = lifted
        .iter()
        .map(ClusterEmbedding::num_clusters)
        .max()
        .unwrap_or(1);
    triangle_rows(m, parallel, |i| {
        let mut solver = EmdSolver::new(s_max, s_max);
        let mut acc = Vec::new();
        let mut ground = Vec::new();
        let li = &lifted[i];
        Ok(((i + 1)..m)
            .map(|j| {
                let lj = &lifted[j];
                li.ground_into(lj, &mut acc, &mut ground);
                solver.solve(&li.weights, &lj.weights, &ground)
            })
            .collect())
    })
}

fn pairwise_impl(
    partitions: &[Partition],
    kind: DistanceKind,
    points: &PointSet,
    kernel: &KernelSpec,
    parallel: bool,
) -> Result<DistanceMatrix> {
    if partitions.is_empty() {
        return Err(Error::EmptyInput("no partitions to compare".into()));
    }
    for p in partitions {
        if p.n() != points.n() {
            return Err(Error::Dimension {
                expected: points.n(),
                got: p.n(),
            });
        }
    }
    let m = partitions.len();
    match kind {
        DistanceKind::Rand => DistanceMatrix::try_from_fn(m, kind.as_str(), parallel, |i, j| {
            rand_distance(&partitions[i], &partitions[j])
        }),
        DistanceKind::Vi => DistanceMatrix::try_from_fn(m, kind.as_str(), parallel, |i, j| {
            variation_of_information(&partitions[i], &partitions[j])
        }),
        DistanceKind::Nmi => DistanceMatrix::try_from_fn(m, kind.as_str(), parallel, |i, j| {
            nmi_distance(&partitions[i], &partitions[j])
        }),
        DistanceKind::LiftEmd => {
            let gram = KernelGram::compute(points, kernel);
            let rows = lift_emd_rows(partitions, &gram, parallel)?;
            Ok(DistanceMatrix::assemble(m, kind.as_str(), rows))
        }
    }
}

/// Symmetric matrix of the chosen distance over a list of partitions.
/// Entries are independent of evaluation order; with the `parallel` feature
/// they are computed on the rayon pool, bit-identically to the sequential
/// path.
pub fn pairwise_matrix(
    partitions: &[Partition],
    kind: DistanceKind,
    points: &PointSet,
    kernel: &KernelSpec,
) -> Result<DistanceMatrix> {
    pairwise_impl(partitions, kind, points, kernel, cfg!(feature = "parallel"))
}

/// The always-sequential fallback path behind [`pairwise_matrix`]; exposed
/// so benchmarks can compare the two.
pub fn pairwise_matrix_sequential(
    partitions: &[Partition],
    kind: DistanceKind,
    points: &PointSet,
    kernel: &KernelSpec,
) -> Result<DistanceMatrix> {
    pairwise_impl(partitions, kind, points, kernel, false)
}

/// Density rank distance: how many samples of Z (excluding i itself) lie
/// strictly closer to i than j does. Asymmetric by definition; integer in
/// [0, m-1].
pub fn density_distance(base: &DistanceMatrix, i: usize, j: usize) -> Result<usize> {
    let m = base.m();
    if i >= m || j >= m {
        return Err(Error::Param(format!(
            "density index ({i},{j}) out of range for m={m}"
        )));
    }
    let t = base.get(i, j);
    Ok((0..m)
        .filter(|&l| l != i && base.get(i, l) < t)
        .count())
}

/// Symmetrized density matrix: entry (i,j) is
/// `max(density_distance(i,j), density_distance(j,i))` so the result can
/// feed grouping and scaling, which assume symmetry.
pub fn density_matrix(base: &DistanceMatrix) -> DistanceMatrix {
    let m = base.m();
    let rank_rows: Vec<Vec<f64>> = {
        let rank_row = |i: usize| -> Vec<f64> {
            let mut sorted: Vec<f64> = base.row(i).to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (0..m)
                .map(|j| {
                    let t = base.get(i, j);
                    let below = sorted.partition_point(|&v| v < t);
                    // d(i,i) = 0 contributes iff t > 0; the definition excludes l = i.
                    (below - usize::from(t > 0.0)) as f64
                })
                .collect()
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..m).into_par_iter().map(rank_row).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..m).map(rank_row).collect()
        }
    };
    let mut vals = vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            vals[i * m + j] = rank_rows[i][j].max(rank_rows[j][i]);
        }
    }
    DistanceMatrix {
        m,
        kind: format!("density({})", base.kind()),
        vals,
    }
}

/// Writes the matrix as CSV (m rows x m columns, 17-significant-digit
/// floats) plus a `<path>.meta` sidecar recording the distance kind.
pub fn write_matrix_csv(path: &Path, matrix: &DistanceMatrix) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let m = matrix.m();
    let mut line = String::new();
    for i in 0..m {
        line.clear();
        for j in 0..m {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.16e}", matrix.get(i, j)));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    let mut meta = BufWriter::new(File::create(sidecar_path(path))?);
    writeln!(meta, "kind {}", matrix.kind())?;
    meta.flush()?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".meta");
    PathBuf::from(os)
}

/// Reads a matrix written by [`write_matrix_csv`], validating the
/// symmetry/zero-diagonal contract.
pub fn read_matrix_csv(path: &Path) -> Result<DistanceMatrix> {
    let kind = {
        let meta = std::fs::read_to_string(sidecar_path(path))?;
        let line = meta.lines().next().unwrap_or_default();
        match line.strip_prefix("kind ") {
            Some(k) => k.trim().to_string(),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "sidecar must start with 'kind <tag>'".into(),
                })
            }
        }
    };
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut vals = Vec::new();
    let mut m = 0usize;
    let mut cols: Option<usize> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|c| {
                c.trim().parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad float '{}'", c.trim()),
                })
            })
            .collect::<Result<_>>()?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {c} columns, got {}", row.len()),
                })
            }
            _ => {}
        }
        vals.extend(row);
        m += 1;
    }
    if cols != Some(m) {
        return Err(Error::Input(format!(
            "matrix is {m} rows by {:?} columns, expected square",
            cols
        )));
    }
    DistanceMatrix::new_raw(m, kind, vals)
}
