//! Dataset ingestion, the synthetic five-blob benchmark, and the k-means
//! partition that seeds the sampler.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Ground-truth labeling used as the baseline for quality ratios.
pub type ReferencePartition = Partition;

/// `n` points in `d` dimensions, row-major. Row order is stable and defines
/// point identity for every assignment vector downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointSet {
    pub fn new(coords: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("need at least 2 points, got {n}")));
        }
        if d < 1 {
            return Err(Error::Input("need at least 1 dimension".into()));
        }
        if coords.len() != n * d {
            return Err(Error::Dimension {
                expected: n * d,
                got: coords.len(),
            });
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite coordinate at point {}, column {}",
                bad / d,
                bad % d
            )));
        }
        Ok(Self { coords, n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.point(i), self.point(j));
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.sq_dist(i, j).sqrt()
    }
}

fn parse_cell(cell: &str, line: usize) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse '{}' as a number", cell.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value '{}'", cell.trim()),
        });
    }
    Ok(v)
}

/// Loads a comma-separated numeric dataset. An optional header row is
/// auto-detected: if any non-label cell of the first row fails to parse as a
/// number, the row is treated as a header. If `label_column` is given, that
/// column is read as a categorical label and remapped to `0..s` by first
/// occurrence.
pub fn load_csv(
    path: &Path,
    label_column: Option<usize>,
) -> Result<(PointSet, Option<ReferencePartition>)> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);

    let mut coords: Vec<f64> = Vec::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut arity: Option<usize> = None;
    let mut n = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        match arity {
            None => {
                if let Some(lc) = label_column {
                    if lc >= cells.len() {
                        return Err(Error::Param(format!(
                            "label column {lc} out of range for {} columns",
                            cells.len()
                        )));
                    }
                }
                // Header detection: any non-label cell that is not numeric.
                let is_header = cells.iter().enumerate().any(|(c, cell)| {
                    label_column != Some(c) && cell.trim().parse::<f64>().is_err()
                });
                arity = Some(cells.len());
                if is_header {
                    continue;
                }
            }
            Some(a) => {
                if cells.len() != a {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected {a} columns, got {}", cells.len()),
                    });
                }
            }
        }
        for (c, cell) in cells.iter().enumerate() {
            if label_column == Some(c) {
                let name = cell.trim().to_string();
                let id = label_names.iter().position(|k| *k == name).unwrap_or_else(|| {
                    label_names.push(name);
                    label_names.len() - 1
                });
                labels.push(id);
            } else {
                coords.push(parse_cell(cell, lineno)?);
            }
        }
        n += 1;
    }

    if n < 2 {
        return Err(Error::Input(format!(
            "need at least 2 data rows, got {n}"
        )));
    }
    let cols = arity.expect("rows were read");
    let d = cols - usize::from(label_column.is_some());
    if d == 0 {
        return Err(Error::Input("no numeric columns left after label".into()));
    }
    let points = PointSet::new(coords, n, d)?;
    let reference = match label_column {
        Some(_) => Some(Partition::new(labels, label_names.len())?),
        None => None,
    };
    Ok((points, reference))
}

/// Writes the same dialect `load_csv` reads. Floats use the shortest
/// round-trip representation, so load(write(x)) reproduces x exactly.
pub fn write_csv(path: &Path, points: &PointSet, labels: Option<&Partition>) -> Result<()> {
    if let Some(p) = labels {
        if p.n() != points.n() {
            return Err(Error::Dimension {
                expected: points.n(),
                got: p.n(),
            });
        }
    }
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let names: Vec<String> = if points.d() == 2 {
        vec!["x".into(), "y".into()]
    } else {
        (0..points.d()).map(|c| format!("x{c}")).collect()
    };
    if labels.is_some() {
        writeln!(w, "{},label", names.join(","))?;
    } else {
        writeln!(w, "{}", names.join(","))?;
    }
    for i in 0..points.n() {
        let row: Vec<String> = points.point(i).iter().map(|v| format!("{v}")).collect();
        match labels {
            Some(p) => writeln!(w, "{},{}", row.join(","), p.label_of(i))?,
            None => writeln!(w, "{}", row.join(","))?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Number of Gaussian components in the synthetic benchmark.
pub const SYNTH_COMPONENTS: usize = 5;
/// Points drawn per component.
pub const SYNTH_POINTS_PER_COMPONENT: usize = 20;
/// Minimum pairwise distance between component means.
pub const SYNTH_SEPARATION: f64 = 10.0;

/// Generates the 100-point, 2-D, five-Gaussian benchmark: component means on
/// a regular pentagon with side [`SYNTH_SEPARATION`], isotropic unit
/// variance, 20 points per component. Pure function of the seed.
pub fn generate_2d5c(seed: u64) -> (PointSet, ReferencePartition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = SYNTH_SEPARATION / (2.0 * (PI / 5.0).sin());
    let n = SYNTH_COMPONENTS * SYNTH_POINTS_PER_COMPONENT;
    let mut coords = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for j in 0..SYNTH_COMPONENTS {
        let angle = 2.0 * PI * (j as f64) / (SYNTH_COMPONENTS as f64);
        let (cx, cy) = (radius * angle.cos(), radius * angle.sin());
        for _ in 0..SYNTH_POINTS_PER_COMPONENT {
            let zx: f64 = rng.sample(StandardNormal);
            let zy: f64 = rng.sample(StandardNormal);
            coords.push(cx + zx);
            coords.push(cy + zy);
            labels.push(j);
        }
    }
    let points = PointSet::new(coords, n, 2).expect("synthetic data is finite");
    let reference = Partition::new(labels, SYNTH_COMPONENTS).expect("all components populated");
    (points, reference)
}

/// Lloyd's algorithm from a k-means++ start, run to convergence (no
/// assignment changes) or 100 iterations. If an iteration empties a cluster,
/// its center is reseeded at the point farthest from the old center, which
/// guarantees exactly `s` nonempty clusters in the result. Deterministic
/// given the seed; the returned partition is canonical.
pub fn kmeans_seed(points: &PointSet, s: usize, seed: u64) -> Result<Partition> {
    if s < 2 || s > points.n() {
        return Err(Error::Param(format!(
            "cluster count {s} outside 2..={}",
            points.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = points.n();
    let d = points.d();

    // k-means++ initialization.
    let mut centers: Vec<f64> = Vec::with_capacity(s * d);
    let mut chosen: Vec<usize> = Vec::with_capacity(s);
    let first = rng.random_range(0..n);
    chosen.push(first);
    centers.extend_from_slice(points.point(first));
    let mut sq_to_nearest: Vec<f64> = (0..n).map(|i| points.sq_dist(i, first)).collect();
    while chosen.len() < s {
        let total: f64 = sq_to_nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in sq_to_nearest.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            // All remaining mass at distance zero: take the lowest unchosen index.
            (0..n)
                .find(|i| !chosen.contains(i))
                .expect("s <= n leaves an unchosen point")
        };
        chosen.push(pick);
        centers.extend_from_slice(points.point(pick));
        for i in 0..n {
            let sq = sq_dist_to(points.point(i), &centers[(chosen.len() - 1) * d..]);
            if sq < sq_to_nearest[i] {
                sq_to_nearest[i] = sq;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for _iter in 0..100 {
        // Assignment step; ties break toward the lowest center index.
        let mut changed = false;
        for i in 0..n {
            let mut best = 0usize;
            let mut best_sq = f64::INFINITY;
            for j in 0..s {
                let sq = sq_dist_to(points.point(i), &centers[j * d..(j + 1) * d]);
                if sq < best_sq {
                    best_sq = sq;
                    best = j;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }

        // Empty-cluster repair: reseed at the point farthest from the old center.
        let mut sizes = vec![0usize; s];
        for &a in &assignment {
            sizes[a] += 1;
        }
        let mut repaired = false;
        for j in 0..s {
            if sizes[j] > 0 {
                continue;
            }
            let center = centers[j * d..(j + 1) * d].to_vec();
            let far = (0..n)
                .max_by(|&a, &b| {
                    sq_dist_to(points.point(a), &center)
                        .partial_cmp(&sq_dist_to(points.point(b), &center))
                        .unwrap()
                        .then(b.cmp(&a)) // ties -> lowest index
                })
                .unwrap();
            centers[j * d..(j + 1) * d].copy_from_slice(points.point(far));
            sizes[assignment[far]] -= 1;
            assignment[far] = j;
            sizes[j] = 1;
            repaired = true;
        }

        // Update step.
        let mut sums = vec![0.0f64; s * d];
        for i in 0..n {
            let j = assignment[i];
            for (c, v) in points.point(i).iter().enumerate() {
                sums[j * d + c] += v;
            }
        }
        for j in 0..s {
            if sizes[j] > 0 {
                for c in 0..d {
                    centers[j * d + c] = sums[j * d + c] / sizes[j] as f64;
                }
            }
        }

        if !changed && !repaired {
            break;
        }
    }

    Ok(Partition::new(assignment, s)?.canonicalize())
}

fn sq_dist_to(p: &[f64], center: &[f64]) -> f64 {
    p.iter()
        .zip(center)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Best-matching label agreement between two partitions of the same points,
/// maximized over cluster relabelings (greedy on the confusion matrix; exact
/// for well-separated data). Test helper for recovery checks.
pub fn label_agreement(p: &Partition, q: &Partition) -> Result<f64> {
    let c = crate::partition::confusion(p, q)?;
    let mut used_rows = vec![false; c.rows()];
    let mut used_cols = vec![false; c.cols()];
    let mut matched = 0u64;
    for _ in 0..c.rows().min(c.cols()) {
        let mut best = 0u64;
        let mut at = None;
        for a in 0..c.rows() {
            for b in 0..c.cols() {
                if !used_rows[a] && !used_cols[b] && c.count(a, b) > best {
                    best = c.count(a, b);
                    at = Some((a, b));
                }
            }
        }
        match at {
            Some((a, b)) => {
                used_rows[a] = true;
                used_cols[b] = true;
                matched += best;
            }
            None => break,
        }
    }
    Ok(matched as f64 / c.n() as f64)
}
