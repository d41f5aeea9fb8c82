//! Pipeline stages with file-based handoff. `cmd_pipeline` simply runs the
//! same stage functions the individual subcommands expose, over canonical
//! file names inside the run directory, so staged and one-shot executions
//! produce byte-identical artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use partscape::dataset::{generate_2d5c, kmeans_seed, load_csv, write_csv, PointSet};
use partscape::error::{Error, Result};
use partscape::grouping::{
    gonzalez_kcenter, read_grouping, summarize_grouping, write_grouping,
    write_grouping_summary, GroupingResult,
};
use partscape::partition::Partition;
use partscape::pdist::{density_matrix, pairwise_matrix, read_matrix_csv, write_matrix_csv};
use partscape::quality::{median_heuristic_bandwidth, KernelSpec, QualityKind};
use partscape::report::{classical_mds, emit_report, quality_ratio_series, Embedding};
use partscape::sampler::{read_sample_set, run_chains, write_sample_set, ChainConfig, SampleSet};

use crate::config::{FirstCenter, GroupDistance, RunConfig, SigmaSpec};
use crate::manifest::Manifest;

/// Canonical artifact names inside a run directory.
pub mod files {
    pub const DATASET: &str = "dataset.csv";
    pub const SAMPLES: &str = "samples.txt";
    pub const DISTANCES: &str = "distances.csv";
    pub const GROUPING: &str = "grouping.txt";
    pub const GROUPING_SUMMARY: &str = "grouping_summary.csv";
    pub const EMBEDDING: &str = "embedding.csv";
    pub const MANIFEST: &str = "manifest.json";
}

/// Writes the synthetic benchmark as CSV with header `x,y,label`.
pub fn stage_synth(seed: u64, out: &Path) -> Result<()> {
    let (points, reference) = generate_2d5c(seed);
    write_csv(out, &points, Some(&reference))
}

/// Normalizes an input CSV into the run directory: numeric columns first,
/// label (if any) last, shortest-round-trip floats.
pub fn stage_ingest(csv: &Path, label_col: Option<usize>, out: &Path) -> Result<()> {
    let (points, reference) = load_csv(csv, label_col)?;
    write_csv(out, &points, reference.as_ref())
}

/// Loads a normalized dataset, optionally splitting off the label column.
pub fn load_dataset(
    path: &Path,
    label_col: Option<usize>,
) -> Result<(PointSet, Option<Partition>)> {
    load_csv(path, label_col)
}

/// Runs the sampler: k-means seed partition, then `chains` Gibbs chains.
/// The kernel bandwidth, quality kind, and master seed are recorded in the
/// sample-set header so downstream stages pick them up from the file.
#[allow(clippy::too_many_arguments)]
pub fn stage_sample(
    data: &Path,
    label_col: Option<usize>,
    s: Option<usize>,
    sigma: SigmaSpec,
    quality: QualityKind,
    burn_in: usize,
    samples: usize,
    thinning: usize,
    chains: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let (points, reference) = load_dataset(data, label_col)?;
    let s = match (s, &reference) {
        (Some(s), _) => s,
        (None, Some(r)) => r.num_clusters(),
        (None, None) => {
            return Err(Error::Param(
                "cluster count s is required for unlabeled datasets".into(),
            ))
        }
    };
    let bandwidth = match sigma {
        SigmaSpec::Fixed(v) => v,
        SigmaSpec::Median => median_heuristic_bandwidth(&points, seed),
    };
    let kernel = KernelSpec::gaussian(bandwidth)?;
    let seed_partition = kmeans_seed(&points, s, seed)?;
    let cfg = ChainConfig {
        s,
        burn_in,
        samples,
        thinning,
        seed,
        quality,
        kernel,
    };
    let z = run_chains(&points, &seed_partition, &cfg, chains)?;
    write_sample_set(out, &z)
}

/// Computes the pairwise distance matrix over the sample set. The kernel
/// for LiftEMD comes from the sample-set header.
pub fn stage_dist(
    data: &Path,
    label_col: Option<usize>,
    samples: &Path,
    distance: GroupDistance,
    out: &Path,
) -> Result<()> {
    let (points, _) = load_dataset(data, label_col)?;
    let z = read_sample_set(samples)?;
    if z.n != points.n() {
        return Err(Error::Dimension {
            expected: points.n(),
            got: z.n,
        });
    }
    let kernel = KernelSpec::gaussian(z.sigma)?;
    let matrix = match distance {
        GroupDistance::Plain(kind) => pairwise_matrix(&z.partitions, kind, &points, &kernel)?,
        GroupDistance::Density(kind) => {
            let base = pairwise_matrix(&z.partitions, kind, &points, &kernel)?;
            density_matrix(&base)
        }
    };
    write_matrix_csv(out, &matrix)
}

/// Highest-quality sample index, ties toward the lowest index.
pub fn best_quality_index(z: &SampleSet) -> usize {
    let mut best = 0usize;
    for (i, &q) in z.qualities.iter().enumerate() {
        if q > z.qualities[best] {
            best = i;
        }
    }
    best
}

/// Selects k representatives with the Gonzalez sweep and writes the
/// grouping record plus the per-representative summary table.
pub fn stage_group(
    distances: &Path,
    samples: &Path,
    k: usize,
    first_center: FirstCenter,
    out_grouping: &Path,
    out_summary: &Path,
) -> Result<()> {
    let d = read_matrix_csv(distances)?;
    let first = match first_center {
        FirstCenter::BestQuality => {
            let z = read_sample_set(samples)?;
            if z.len() != d.m() {
                return Err(Error::Dimension {
                    expected: d.m(),
                    got: z.len(),
                });
            }
            best_quality_index(&z)
        }
        FirstCenter::Index(i) => i,
    };
    let g = gonzalez_kcenter(&d, k, first)?;
    write_grouping(out_grouping, &g)?;
    write_grouping_summary(out_summary, &summarize_grouping(&d, &g))
}

/// Classical MDS over the representative-to-representative submatrix.
pub fn stage_mds(distances: &Path, grouping: &Path, dim: usize, out: &Path) -> Result<()> {
    let d = read_matrix_csv(distances)?;
    let (reps, _phi) = read_grouping(grouping)?;
    let sub = d.submatrix(&reps)?;
    let embedding = classical_mds(&sub, dim)?;
    write_embedding(out, &reps, &embedding)
}

fn write_embedding(path: &Path, reps: &[usize], embedding: &Embedding) -> Result<()> {
    let mut out = String::new();
    let names = ["x", "y", "z"];
    out.push_str("rep");
    for name in names.iter().take(embedding.dim()) {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (slot, &rep) in reps.iter().enumerate() {
        out.push_str(&rep.to_string());
        for c in embedding.coord(slot) {
            out.push(',');
            out.push_str(&format!("{c}"));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads the embedding written by [`stage_mds`]; returns (reps, embedding).
pub fn read_embedding(path: &Path) -> Result<(Vec<usize>, Embedding)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::EmptyInput("embedding file".into()))?;
    let dim = header.split(',').count() - 1;
    let mut reps = Vec::new();
    let mut coords = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let rep: usize = cells
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| Error::Parse {
                line: idx + 1,
                msg: "bad rep index".into(),
            })?;
        reps.push(rep);
        for cell in cells {
            coords.push(cell.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("bad coordinate '{cell}'"),
            })?);
        }
    }
    let k = reps.len();
    let embedding = Embedding::from_parts(coords, k, dim, Vec::new())?;
    Ok((reps, embedding))
}

/// Renders the figure data and SVGs from the staged artifacts. Requires a
/// labeled dataset: the reference partition anchors the quality ratios.
#[allow(clippy::too_many_arguments)]
pub fn stage_report(
    data: &Path,
    label_col: Option<usize>,
    samples: &Path,
    distances: &Path,
    grouping: &Path,
    embedding: &Path,
    baseline: Option<f64>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let (points, reference) = load_dataset(data, label_col)?;
    let reference = reference.ok_or_else(|| {
        Error::Param("report needs a labeled dataset for the reference partition".into())
    })?;
    let z = read_sample_set(samples)?;
    let d = read_matrix_csv(distances)?;
    let (reps, phi) = read_grouping(grouping)?;
    let g = GroupingResult::rebuild(&d, reps, phi)?;
    let (emb_reps, emb) = read_embedding(embedding)?;
    if emb_reps != g.representatives {
        return Err(Error::Contract(
            "embedding representatives do not match the grouping".into(),
        ));
    }
    let kernel = KernelSpec::gaussian(z.sigma)?;
    let ratios = quality_ratio_series(&z, &reference, &points, &kernel)?;
    emit_report(&g, &ratios, &d, &emb, baseline, out_dir)
}

/// Runs every stage over the run directory named by the config hash and
/// writes a manifest listing each artifact with its content hash. Re-running
/// the same config reproduces the directory byte for byte. On a stage error
/// the manifest records the failing stage and the error is propagated.
pub fn cmd_pipeline(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let run_dir = cfg.run_dir();
    fs::create_dir_all(&run_dir)?;

    let result = run_stages(cfg, &run_dir);
    let error = result.as_ref().err().map(|(stage, e)| (*stage, e.to_string()));
    let manifest = Manifest::collect(cfg, &run_dir, error.clone())?;
    manifest.write(&run_dir.join(files::MANIFEST))?;
    match result {
        Ok(()) => {
            log::info!("pipeline complete: {}", run_dir.display());
            Ok(run_dir)
        }
        Err((stage, e)) => {
            log::error!("pipeline failed at stage {stage}: {e}");
            Err(e)
        }
    }
}

fn run_stages(cfg: &RunConfig, run_dir: &Path) -> std::result::Result<(), (&'static str, Error)> {
    let dataset = run_dir.join(files::DATASET);
    let samples = run_dir.join(files::SAMPLES);
    let distances = run_dir.join(files::DISTANCES);
    let grouping = run_dir.join(files::GROUPING);
    let summary = run_dir.join(files::GROUPING_SUMMARY);
    let embedding = run_dir.join(files::EMBEDDING);

    let tag = |stage: &'static str| move |e: Error| (stage, e);

    match (&cfg.synthetic, &cfg.csv) {
        (Some(_), None) => stage_synth(cfg.seed, &dataset).map_err(tag("synth"))?,
        (None, Some(csv)) => {
            stage_ingest(csv, cfg.label_col, &dataset).map_err(tag("ingest"))?
        }
        _ => unreachable!("validated"),
    }
    // The normalized dataset always carries the label in the last column.
    let label_col = if cfg.synthetic.is_some() || cfg.label_col.is_some() {
        let text = fs::read_to_string(&dataset).map_err(|e| tag("ingest")(e.into()))?;
        let cols = text.lines().next().unwrap_or_default().split(',').count();
        Some(cols - 1)
    } else {
        None
    };

    stage_sample(
        &dataset,
        label_col,
        cfg.s,
        cfg.sigma,
        cfg.quality,
        cfg.burn_in,
        cfg.samples,
        cfg.thinning,
        cfg.chains,
        cfg.seed,
        &samples,
    )
    .map_err(tag("sample"))?;

    stage_dist(&dataset, label_col, &samples, cfg.distance, &distances)
        .map_err(tag("dist"))?;

    stage_group(
        &distances,
        &samples,
        cfg.k,
        cfg.first_center,
        &grouping,
        &summary,
    )
    .map_err(tag("group"))?;

    stage_mds(&distances, &grouping, 2, &embedding).map_err(tag("mds"))?;

    stage_report(
        &dataset,
        label_col,
        &samples,
        &distances,
        &grouping,
        &embedding,
        cfg.baseline,
        run_dir,
    )
    .map_err(tag("report"))?;

    Ok(())
}

/// Byte-compares two run directories (used by tests and documented for
/// reproducibility checks). Returns the first differing relative path.
pub fn diff_run_dirs(a: &Path, b: &Path) -> Result<Option<String>> {
    let list = |root: &Path| -> Result<Vec<String>> {
        let mut names = Vec::new();
        collect_files(root, root, &mut names)?;
        names.sort();
        Ok(names)
    };
    let files_a = list(a)?;
    let files_b = list(b)?;
    if files_a != files_b {
        let set_b: std::collections::BTreeSet<_> = files_b.iter().collect();
        for f in &files_a {
            if !set_b.contains(f) {
                return Ok(Some(format!("{f} (only in first)")));
            }
        }
        for f in &files_b {
            if !files_a.contains(f) {
                return Ok(Some(format!("{f} (only in second)")));
            }
        }
    }
    for f in &files_a {
        if fs::read(a.join(f))? != fs::read(b.join(f))? {
            return Ok(Some(f.clone()));
        }
    }
    Ok(None)
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.push(
                path.strip_prefix(root)
                    .expect("children live under the root")
                    .to_string_lossy()
                    .into_owned(),
            );
        }
    }
    Ok(())
}
