//! Evaluation artifacts: classical multidimensional scaling of the
//! representative distances, quality-ratio series against a reference
//! partition, histograms, and the figure-data/SVG emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::grouping::{summarize_grouping, GroupingResult};
use crate::partition::Partition;
use crate::pdist::DistanceMatrix;
use crate::quality::{kernel_quality_gram, KernelGram, KernelSpec};
use crate::sampler::SampleSet;

/// Bins for the pooled member-distance histograms.
pub const MEMBER_DIST_BINS: usize = 20;
/// Bins for the quality-ratio histogram.
pub const RATIO_BINS: usize = 40;

/// Low-dimensional coordinates from classical MDS, with eigenvalue
/// diagnostics. Coordinates are centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: Vec<f64>,
    k: usize,
    dim: usize,
    /// All eigenvalues of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// How many of the selected eigenvalues were negative and clamped to 0.
    pub clamped: usize,
}

impl Embedding {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn embedded_distance(&self, i: usize, j: usize) -> f64 {
        self.coord(i)
            .iter()
            .zip(self.coord(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn from_parts(coords: Vec<f64>, k: usize, dim: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        if coords.len() != k * dim {
            return Err(Error::Dimension {
                expected: k * dim,
                got: coords.len(),
            });
        }
        Ok(Self {
            coords,
            k,
            dim,
            eigenvalues,
            clamped: 0,
        })
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix, row-major.
/// Returns (eigenvalues, eigenvectors) with eigenvector `c` stored in column
/// `c` of the returned row-major matrix. Deterministic.
fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    (eigenvalues, v)
}

/// Classical MDS: double-centers `-1/2 J D^2 J`, takes the top `dim`
/// eigenpairs, and scales eigenvectors by the square root of their
/// eigenvalues (negative values clamp to zero and are counted in the
/// diagnostics). Reproduces the input distances exactly when they are
/// Euclidean-realizable in `dim` dimensions; rank-deficient inputs simply
/// produce trailing zero eigenvalues.
pub fn classical_mds(d: &DistanceMatrix, dim: usize) -> Result<Embedding> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Param(format!("dim {dim} outside 1..=3")));
    }
    let k = d.m();
    if k < 1 {
        return Err(Error::Param("empty distance matrix".into()));
    }

    // B = -1/2 J D^2 J via the row/column/total means of D^2.
    let mut sq = vec![0.0f64; k * k];
    for i in 0..k {
        for j in 0..k {
            let v = d.get(i, j);
            sq[i * k + j] = v * v;
        }
    }
    let row_mean: Vec<f64> = (0..k)
        .map(|i| sq[i * k..(i + 1) * k].iter().sum::<f64>() / k as f64)
        .collect();
    let total_mean: f64 = row_mean.iter().sum::<f64>() / k as f64;
    let mut b = vec![0.0f64; k * k];
    for i in 0..k {
        for j in 0..k {
            b[i * k + j] = -0.5 * (sq[i * k + j] - row_mean[i] - row_mean[j] + total_mean);
        }
    }

    let (eigenvalues, vectors) = jacobi_eigen(b, k);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| eigenvalues[y].partial_cmp(&eigenvalues[x]).unwrap().then(x.cmp(&y)));

    let mut coords = vec![0.0f64; k * dim];
    let mut clamped = 0usize;
    for (t, &e) in order.iter().take(dim).enumerate() {
        let lambda = eigenvalues[e];
        let scale = if lambda > 0.0 {
            lambda.sqrt()
        } else {
            if lambda < 0.0 {
                clamped += 1;
            }
            0.0
        };
        // Deterministic orientation: largest-magnitude component positive.
        let mut flip = 1.0f64;
        let mut best = 0.0f64;
        for i in 0..k {
            let c = vectors[i * k + e];
            if c.abs() > best {
                best = c.abs();
                flip = if c < 0.0 { -1.0 } else { 1.0 };
            }
        }
        for i in 0..k {
            coords[i * dim + t] = flip * vectors[i * k + e] * scale;
        }
    }
    let sorted_eigenvalues = order.iter().map(|&e| eigenvalues[e]).collect();
    Ok(Embedding {
        coords,
        k,
        dim,
        eigenvalues: sorted_eigenvalues,
        clamped,
    })
}

/// Ratio of kernel quality against the reference partition, per sample.
/// Exactly 1 for samples identical to the reference.
pub fn quality_ratio_series(
    z: &SampleSet,
    reference: &Partition,
    points: &PointSet,
    kernel: &KernelSpec,
) -> Result<Vec<f64>> {
    if reference.n() != points.n() {
        return Err(Error::Dimension {
            expected: points.n(),
            got: reference.n(),
        });
    }
    let gram = KernelGram::compute(points, kernel);
    let q_ref = kernel_quality_gram(&reference.canonicalize(), &gram);
    Ok(z.partitions
        .iter()
        .map(|p| kernel_quality_gram(p, &gram) / q_ref)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` edges spanning [min, max].
    pub edges: Vec<f64>,
    /// Per-bin counts; the right-most bin is closed.
    pub counts: Vec<u64>,
}

/// Equal-width histogram over [min, max]; counts always sum to the input
/// length. A degenerate (constant) input lands in a single bin.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::EmptyInput("histogram needs at least one value".into()));
    }
    if bins < 1 {
        return Err(Error::Param("histogram needs at least one bin".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite value {bad}")));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|i| min + i as f64 * width).collect();
    edges[bins] = max;
    let mut counts = vec![0u64; bins];
    for &v in values {
        let idx = if width > 0.0 {
            (((v - min) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Writes the three figure-data CSVs and one SVG per figure under `out_dir`:
/// (a) per-representative member-distance histograms with
/// nearest-other-representative marker series, (b) the quality-ratio
/// histogram with representative markers and an optional external baseline,
/// (c) the MDS scatter with spread circles. Returns the created paths (6).
pub fn emit_report(
    g: &GroupingResult,
    ratios: &[f64],
    d: &DistanceMatrix,
    embedding: &Embedding,
    baseline: Option<f64>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if ratios.len() != d.m() || g.assignment.len() != d.m() {
        return Err(Error::Dimension {
            expected: d.m(),
            got: ratios.len(),
        });
    }
    let k = g.representatives.len();
    if embedding.k() != k {
        return Err(Error::Dimension {
            expected: k,
            got: embedding.k(),
        });
    }
    if embedding.dim() != 2 {
        return Err(Error::Param(format!(
            "report figures need a 2-D embedding, got dim {}",
            embedding.dim()
        )));
    }
    fs::create_dir_all(out_dir)?;
    let summaries = summarize_grouping(d, g);
    let mut files = Vec::with_capacity(6);

    // (a) member distances per representative + nearest-other-rep markers
    let mut csv = String::from("series,rep,x_lo,x_hi,value\n");
    for s in &summaries {
        let h = histogram(&s.member_distances, MEMBER_DIST_BINS)?;
        for (b, &count) in h.counts.iter().enumerate() {
            let _ = writeln!(
                csv,
                "hist,{},{},{},{}",
                s.rep,
                h.edges[b],
                h.edges[b + 1],
                count
            );
        }
    }
    for s in &summaries {
        if let Some(m) = s.nearest_other_rep {
            let _ = writeln!(csv, "rep_nearest,{},{},,", s.rep, m);
        }
    }
    let path = out_dir.join("fig_member_distances.csv");
    fs::write(&path, csv)?;
    files.push(path);

    let pooled: Vec<f64> = (0..d.m()).map(|i| d.get(i, g.assignment[i])).collect();
    let svg = svg_histogram_figure(
        "Distance to assigned representative",
        &histogram(&pooled, MEMBER_DIST_BINS)?,
        &summaries
            .iter()
            .filter_map(|s| s.nearest_other_rep)
            .collect::<Vec<_>>(),
        None,
    )?;
    let path = out_dir.join("fig_member_distances.svg");
    fs::write(&path, svg)?;
    files.push(path);

    // (b) quality-ratio distribution + representative markers (+ baseline)
    let h = histogram(ratios, RATIO_BINS)?;
    let mut csv = String::from("series,rep,x_lo,x_hi,value\n");
    for (b, &count) in h.counts.iter().enumerate() {
        let _ = writeln!(csv, "hist,,{},{},{}", h.edges[b], h.edges[b + 1], count);
    }
    if d.m() > 1 {
        for &r in &g.representatives {
            let _ = writeln!(csv, "rep_ratio,{r},{},,", ratios[r]);
        }
    }
    if let Some(b) = baseline {
        let _ = writeln!(csv, "baseline,,{b},,");
    }
    let path = out_dir.join("fig_quality_ratios.csv");
    fs::write(&path, csv)?;
    files.push(path);

    let rep_marks: Vec<f64> = if d.m() > 1 {
        g.representatives.iter().map(|&r| ratios[r]).collect()
    } else {
        Vec::new()
    };
    let svg = svg_histogram_figure("Quality ratio vs reference", &h, &rep_marks, baseline)?;
    let path = out_dir.join("fig_quality_ratios.svg");
    fs::write(&path, svg)?;
    files.push(path);

    // (c) MDS scatter with spread circles
    let mut csv = String::from("rep,x,y,radius\n");
    for (slot, &r) in g.representatives.iter().enumerate() {
        let c = embedding.coord(slot);
        let _ = writeln!(csv, "{r},{},{},{}", c[0], c[1], g.spreads[slot].sqrt());
    }
    let path = out_dir.join("fig_mds.csv");
    fs::write(&path, csv)?;
    files.push(path);

    let radii: Vec<f64> = g.spreads.iter().map(|v| v.sqrt()).collect();
    let svg = svg_mds_figure(embedding, &radii)?;
    let path = out_dir.join("fig_mds.svg");
    fs::write(&path, svg)?;
    files.push(path);

    Ok(files)
}

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 500.0;
const SVG_PAD: f64 = 50.0;

fn svg_histogram_figure(
    title: &str,
    h: &Histogram,
    markers: &[f64],
    baseline: Option<f64>,
) -> Result<String> {
    let x_min = h.edges[0];
    let x_max = *h.edges.last().unwrap();
    let span = (x_max - x_min).max(1e-12);
    let y_max = h.counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let sx = |x: f64| SVG_PAD + (x - x_min) / span * (SVG_W - 2.0 * SVG_PAD);
    let sy = |y: f64| SVG_H - SVG_PAD - y / y_max * (SVG_H - 2.0 * SVG_PAD);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>",
        SVG_PAD
    );
    let _ = writeln!(
        out,
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        SVG_PAD,
        SVG_H - SVG_PAD,
        SVG_W - SVG_PAD,
        SVG_H - SVG_PAD
    );
    for (b, &count) in h.counts.iter().enumerate() {
        let x0 = sx(h.edges[b]);
        let x1 = sx(h.edges[b + 1]);
        let y = sy(count as f64);
        let _ = writeln!(
            out,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"steelblue\" stroke=\"white\"/>",
            x0,
            y,
            (x1 - x0).max(0.0),
            SVG_H - SVG_PAD - y
        );
    }
    for &m in markers {
        let x = sx(m.clamp(x_min, x_max));
        let _ = writeln!(
            out,
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"8\" height=\"8\" fill=\"red\"/>",
            x - 4.0,
            SVG_H - SVG_PAD - 4.0
        );
    }
    if let Some(b) = baseline {
        let x = sx(b.clamp(x_min, x_max));
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"5\" fill=\"blue\"/>",
            x,
            SVG_H - SVG_PAD - 5.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{x_min:.4}</text>",
        SVG_PAD,
        SVG_H - SVG_PAD + 20.0
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{x_max:.4}</text>",
        SVG_W - SVG_PAD,
        SVG_H - SVG_PAD + 20.0
    );
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

fn svg_mds_figure(embedding: &Embedding, radii: &[f64]) -> Result<String> {
    let k = embedding.k();
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for i in 0..k {
        let c = embedding.coord(i);
        let r = radii.get(i).copied().unwrap_or(0.0);
        x_min = x_min.min(c[0] - r);
        x_max = x_max.max(c[0] + r);
        y_min = y_min.min(c[1] - r);
        y_max = y_max.max(c[1] + r);
    }
    let span = (x_max - x_min).max(y_max - y_min).max(1e-12);
    let side = SVG_H.min(SVG_W) - 2.0 * SVG_PAD;
    let sx = |x: f64| SVG_PAD + (x - x_min) / span * side;
    let sy = |y: f64| SVG_H - SVG_PAD - (y - y_min) / span * side;
    let scale = side / span;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">Representative partition landscape (classical MDS)</text>",
        SVG_PAD
    );
    for i in 0..k {
        let c = embedding.coord(i);
        let r = radii.get(i).copied().unwrap_or(0.0);
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\" fill=\"steelblue\" fill-opacity=\"0.2\" stroke=\"steelblue\"/>",
            sx(c[0]),
            sy(c[1]),
            (r * scale).max(1.0)
        );
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"crimson\"/>",
            sx(c[0]),
            sy(c[1])
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.3}\" y=\"{:.3}\" font-family=\"sans-serif\" font-size=\"11\">{i}</text>",
            sx(c[0]) + 5.0,
            sy(c[1]) - 5.0
        );
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
