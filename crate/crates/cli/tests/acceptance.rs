//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`). The oracles
//! here are deliberately independent of the library implementation paths
//! they check.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use partscape::dataset::{generate_2d5c, kmeans_seed, load_csv, PointSet};
use partscape::grouping::{gonzalez_kcenter, summarize_grouping, GroupingResult};
use partscape::partition::{enumerate_partitions, stirling2, Partition};
use partscape::pdist::{
    pairwise_matrix, read_matrix_csv, transport_emd, variation_of_information, DistanceKind,
    DistanceMatrix,
};
use partscape::quality::{
    kernel_quality, kmeans_quality, KernelGram, KernelSpec, QualityCache, QualityKind,
};
use partscape::report::classical_mds;
use partscape::sampler::{read_sample_set, run_chains, ChainConfig, SampleSet};
use partscape_cli::config::{RunConfig, SigmaSpec};
use partscape_cli::manifest::Manifest;
use partscape_cli::stages::{self, best_quality_index, cmd_pipeline, diff_run_dirs};

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    println!(
        "acceptance {id} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} {name} failed: {detail}");
}

// ---------------------------------------------------------------------------
// Shared full-scale pipeline run (criteria 2, 3, 9)

/// Acceptance pipeline parameters: the generate-then-group protocol at full
/// scale. Sigma is pinned to 18.0; the band below brackets the reported
/// behavior with slack for the unspecified bandwidth, and this value keeps
/// both the mean-band and the near-1 sub-criterion satisfiable at once.
const ACCEPT_SIGMA: f64 = 18.0;
const ACCEPT_SEED: u64 = 7;

fn accept_config(out_dir: PathBuf, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.synthetic = Some("2d5c".into());
    cfg.s = Some(5);
    cfg.sigma = SigmaSpec::Fixed(ACCEPT_SIGMA);
    cfg.burn_in = 1000;
    cfg.samples = 4000;
    cfg.k = 10;
    cfg.seed = seed;
    cfg.out_dir = out_dir;
    cfg
}

struct BaseRun {
    dir: PathBuf,
    // Kept alive so the directory survives for all dependent criteria.
    _tmp: tempfile::TempDir,
}

static BASE: OnceLock<BaseRun> = OnceLock::new();

fn base_run() -> &'static BaseRun {
    BASE.get_or_init(|| {
        let tmp = tempfile::tempdir().expect("tempdir");
        let cfg = accept_config(tmp.path().to_path_buf(), ACCEPT_SEED);
        let dir = cmd_pipeline(&cfg).expect("base pipeline run");
        BaseRun { dir, _tmp: tmp }
    })
}

// ---------------------------------------------------------------------------
// Criterion 1: stationarity of the Gibbs chain against the exact target

fn two_blob_points_n8() -> PointSet {
    let xs = vec![0.0, 0.5, 1.0, 1.5, 6.0, 6.5, 7.0, 7.5];
    PointSet::new(xs, 8, 1).unwrap()
}

#[test]
fn criterion_1_stationarity() {
    let points = two_blob_points_n8();
    let kernel = KernelSpec::gaussian(1.0).unwrap();

    // Exact target pi(p) proportional to Q_K(p) over all S(8,2) partitions.
    let all = enumerate_partitions(8, 2).unwrap();
    assert_eq!(all.len() as u64, stirling2(8, 2));
    assert_eq!(all.len(), 127);
    let weights: Vec<f64> = all
        .iter()
        .map(|p| kernel_quality(p, &points, &kernel))
        .collect();
    let total: f64 = weights.iter().sum();
    let index: HashMap<&Partition, usize> =
        all.iter().enumerate().map(|(i, p)| (p, i)).collect();

    let seed_partition = kmeans_seed(&points, 2, ACCEPT_SEED).unwrap();
    let cfg = ChainConfig {
        s: 2,
        burn_in: 2000,
        samples: 200_000,
        thinning: 1,
        seed: ACCEPT_SEED,
        quality: QualityKind::Kernel,
        kernel,
    };
    let z = run_chains(&points, &seed_partition, &cfg, 1).unwrap();

    let mut counts = vec![0u64; all.len()];
    for p in &z.partitions {
        counts[*index.get(p).expect("sample is a valid 2-partition")] += 1;
    }
    let m = z.len() as f64;
    let tv: f64 = counts
        .iter()
        .zip(&weights)
        .map(|(&c, &w)| (c as f64 / m - w / total).abs())
        .sum::<f64>()
        / 2.0;

    // Sanity: the target is far from uniform, so the check has power.
    let tv_uniform: f64 = weights
        .iter()
        .map(|&w| (1.0 / all.len() as f64 - w / total).abs())
        .sum::<f64>()
        / 2.0;
    assert!(
        tv_uniform > 0.10,
        "degenerate target (TV to uniform {tv_uniform:.3}); test would be vacuous"
    );

    verdict(
        1,
        "stationarity",
        tv < 0.05,
        format!("TV(empirical, target) = {tv:.4} over 127 states; TV(uniform, target) = {tv_uniform:.3}"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: quality-ratio band on the full 2D5C pipeline

#[test]
fn criterion_2_quality_ratio_band() {
    let base = base_run();
    let (points, reference) =
        load_csv(&base.dir.join(stages::files::DATASET), Some(2)).unwrap();
    let reference = reference.unwrap();
    let z = read_sample_set(&base.dir.join(stages::files::SAMPLES)).unwrap();
    assert_eq!(z.len(), 4000);
    let kernel = KernelSpec::gaussian(z.sigma).unwrap();
    let ratios =
        partscape::report::quality_ratio_series(&z, &reference, &points, &kernel).unwrap();

    let mean: f64 = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let in_band = (0.55..=0.90).contains(&mean);
    let near_one = max >= 0.95;

    verdict(
        2,
        "quality-ratio band",
        in_band && near_one,
        format!("mean ratio {mean:.4} (band [0.55, 0.90]), max ratio {max:.4} (needs >= 0.95)"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: representatives are mutually farther apart than typical
// members are from them, on 3 seeds

fn grouping_for_seed(seed: u64) -> (DistanceMatrix, GroupingResult, SampleSet, PointSet) {
    let (points, _) = generate_2d5c(seed);
    let kernel = KernelSpec::gaussian(ACCEPT_SIGMA).unwrap();
    let seed_partition = kmeans_seed(&points, 5, seed).unwrap();
    let cfg = ChainConfig {
        s: 5,
        burn_in: 1000,
        samples: 4000,
        thinning: 1,
        seed,
        quality: QualityKind::Kernel,
        kernel,
    };
    let z = run_chains(&points, &seed_partition, &cfg, 1).unwrap();
    let d = pairwise_matrix(&z.partitions, DistanceKind::LiftEmd, &points, &kernel).unwrap();
    let g = gonzalez_kcenter(&d, 10, best_quality_index(&z)).unwrap();
    (d, g, z, points)
}

fn diversity_holds(d: &DistanceMatrix, g: &GroupingResult) -> (bool, String) {
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for s in summarize_grouping(d, g) {
        let mut md = s.member_distances.clone();
        md.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = md[md.len() / 2];
        let nearest = s.nearest_other_rep.expect("k = 10 > 1");
        let margin = nearest - median;
        worst = worst.min(margin);
        ok &= nearest > median;
    }
    (ok, format!("worst (nearest-rep - median-member) margin {worst:.4}"))
}

#[test]
fn criterion_3_diversity_structure() {
    // Seed 7 from the persisted base pipeline: recompute the matrix, check
    // the stored grouping matches it, then test the diversity property.
    let base = base_run();
    let (d7, g7, _, _) = grouping_for_seed(ACCEPT_SEED);
    let (reps, phi) =
        partscape::grouping::read_grouping(&base.dir.join(stages::files::GROUPING)).unwrap();
    assert_eq!(
        reps, g7.representatives,
        "persisted grouping must match the recomputed pipeline stages"
    );
    assert_eq!(phi, g7.assignment);

    let mut details = Vec::new();
    let mut all_ok = true;
    for (seed, (d, g)) in [
        (ACCEPT_SEED, (d7, g7)),
        (8, {
            let (d, g, _, _) = grouping_for_seed(8);
            (d, g)
        }),
        (9, {
            let (d, g, _, _) = grouping_for_seed(9);
            (d, g)
        }),
    ] {
        let (ok, detail) = diversity_holds(&d, &g);
        all_ok &= ok;
        details.push(format!("seed {seed}: {detail}"));
    }
    verdict(3, "diversity structure", all_ok, details.join("; "));
}

// ---------------------------------------------------------------------------
// Criterion 4: transport EMD vs a brute-force LP-vertex oracle

/// Exact transportation optimum by enumerating all spanning trees of the
/// complete bipartite graph (every LP vertex is supported on a spanning
/// forest, and trees with zero flows cover the degenerate ones), solving
/// each tree's unique flow by leaf elimination.
fn emd_spanning_tree_oracle(wa: &[f64], wb: &[f64], cost: &[Vec<f64>]) -> f64 {
    let a = wa.len();
    let b = wb.len();
    let nodes = a + b;
    let edges: Vec<(usize, usize)> = (0..a)
        .flat_map(|i| (0..b).map(move |j| (i, j)))
        .collect();
    let need = nodes - 1;
    let mut best = f64::INFINITY;
    let mut chosen = vec![0usize; need];

    fn rec(
        edges: &[(usize, usize)],
        start: usize,
        chosen: &mut [usize],
        depth: usize,
        wa: &[f64],
        wb: &[f64],
        cost: &[Vec<f64>],
        best: &mut f64,
    ) {
        let need = chosen.len();
        if depth == need {
            if let Some(c) = tree_cost(edges, chosen, wa, wb, cost) {
                if c < *best {
                    *best = c;
                }
            }
            return;
        }
        for e in start..edges.len() {
            if edges.len() - e < need - depth {
                break;
            }
            chosen[depth] = e;
            rec(edges, e + 1, chosen, depth + 1, wa, wb, cost, best);
        }
    }

    fn tree_cost(
        edges: &[(usize, usize)],
        chosen: &[usize],
        wa: &[f64],
        wb: &[f64],
        cost: &[Vec<f64>],
    ) -> Option<f64> {
        let a = wa.len();
        let nodes = a + wb.len();
        // Check the edge set spans all nodes as a tree (n-1 edges, connected).
        let mut degree = vec![0usize; nodes];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for (slot, &e) in chosen.iter().enumerate() {
            let (i, j) = edges[e];
            degree[i] += 1;
            degree[a + j] += 1;
            incident[i].push(slot);
            incident[a + j].push(slot);
        }
        if degree.iter().any(|&d| d == 0) {
            return None;
        }
        // Leaf elimination solves the unique flow; failure to exhaust all
        // edges means a cycle (not a tree).
        let mut balance: Vec<f64> = wa
            .iter()
            .copied()
            .chain(wb.iter().map(|&w| -w))
            .collect();
        let mut used = vec![false; chosen.len()];
        let mut flows = vec![0.0f64; chosen.len()];
        let mut remaining_deg = degree.clone();
        let mut queue: Vec<usize> = (0..nodes).filter(|&v| remaining_deg[v] == 1).collect();
        let mut processed = 0;
        while let Some(v) = queue.pop() {
            let Some(&slot) = incident[v].iter().find(|&&s| !used[s]) else {
                continue;
            };
            used[slot] = true;
            processed += 1;
            let (i, j) = edges[chosen[slot]];
            let (u, w) = (i, a + j);
            // Flow oriented supply -> demand; v's full balance leaves on it.
            let f = if v == u { balance[v] } else { -balance[v] };
            flows[slot] = f;
            let other = if v == u { w } else { u };
            balance[other] += balance[v];
            balance[v] = 0.0;
            remaining_deg[v] = 0;
            remaining_deg[other] -= 1;
            if remaining_deg[other] == 1 {
                queue.push(other);
            }
        }
        if processed != chosen.len() {
            return None; // cycle
        }
        if flows.iter().any(|&f| f < -1e-9) {
            return None; // infeasible vertex
        }
        let mut total = 0.0;
        for (slot, &e) in chosen.iter().enumerate() {
            let (i, j) = edges[e];
            total += flows[slot].max(0.0) * cost[i][j];
        }
        Some(total)
    }

    rec(&edges, 0, &mut chosen, 0, wa, wb, cost, &mut best);
    best
}

#[test]
fn criterion_4_emd_exactness() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let a = rng.random_range(1..=4);
        let b = rng.random_range(1..=4);
        let mut wa: Vec<f64> = (0..a).map(|_| rng.random::<f64>() + 0.05).collect();
        let mut wb: Vec<f64> = (0..b).map(|_| rng.random::<f64>() + 0.05).collect();
        let sa: f64 = wa.iter().sum();
        let sb: f64 = wb.iter().sum();
        wa.iter_mut().for_each(|w| *w /= sa);
        wb.iter_mut().for_each(|w| *w /= sb);
        let cost: Vec<Vec<f64>> = (0..a)
            .map(|_| (0..b).map(|_| rng.random::<f64>()).collect())
            .collect();

        let solver = transport_emd(&wa, &wb, &cost).unwrap();
        let oracle = emd_spanning_tree_oracle(&wa, &wb, &cost);
        let diff = (solver - oracle).abs();
        worst = worst.max(diff);
        assert!(
            diff <= 1e-9,
            "trial {trial}: solver {solver} vs oracle {oracle} (diff {diff:.2e})"
        );
    }
    verdict(
        4,
        "EMD exactness",
        worst <= 1e-9,
        format!("200 instances, worst |solver - oracle| = {worst:.2e}, {:?}", start.elapsed()),
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: Gonzalez 2-approximation vs exhaustive search

fn random_euclidean_matrix(rng: &mut ChaCha8Rng, m: usize, dim: usize) -> DistanceMatrix {
    let coords: Vec<f64> = (0..m * dim).map(|_| rng.random::<f64>() * 10.0).collect();
    let mut vals = vec![0.0f64; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let d: f64 = (0..dim)
                .map(|c| {
                    let r = coords[i * dim + c] - coords[j * dim + c];
                    r * r
                })
                .sum::<f64>()
                .sqrt();
            vals[i * m + j] = d;
            vals[j * m + i] = d;
        }
    }
    DistanceMatrix::new_raw(m, "euclidean", vals).unwrap()
}

fn optimal_kcenter_radius(d: &DistanceMatrix, k: usize) -> f64 {
    let m = d.m();
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = Vec::with_capacity(k);
    fn rec(d: &DistanceMatrix, k: usize, start: usize, subset: &mut Vec<usize>, best: &mut f64) {
        if subset.len() == k {
            let radius = (0..d.m())
                .map(|i| {
                    subset
                        .iter()
                        .map(|&c| d.get(i, c))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max);
            if radius < *best {
                *best = radius;
            }
            return;
        }
        for c in start..d.m() {
            subset.push(c);
            rec(d, k, c + 1, subset, best);
            subset.pop();
        }
    }
    rec(d, k, 0, &mut subset, &mut best);
    best
}

#[test]
fn criterion_5_gonzalez_guarantee() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_ratio = 0.0f64;
    for trial in 0..100 {
        let m = rng.random_range(4..=12);
        let k = rng.random_range(1..=3);
        let dim = rng.random_range(2..=5);
        let d = random_euclidean_matrix(&mut rng, m, dim);
        let first = rng.random_range(0..m);
        let g = gonzalez_kcenter(&d, k, first).unwrap();
        let radius = g.max_radius(&d);
        let opt = optimal_kcenter_radius(&d, k);
        if opt > 0.0 {
            worst_ratio = worst_ratio.max(radius / opt);
        }
        assert!(
            radius <= 2.0 * opt + 1e-12,
            "trial {trial}: gonzalez {radius} > 2 x optimal {opt}"
        );
    }
    verdict(
        5,
        "Gonzalez 2-approximation",
        worst_ratio <= 2.0 + 1e-12,
        format!("100 instances, worst radius ratio {worst_ratio:.4}, {:?}", start.elapsed()),
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: VI metric axioms, exhaustively for n = 5, s in {2, 3}

#[test]
fn criterion_6_vi_metric_axioms() {
    let start = std::time::Instant::now();
    let mut parts = enumerate_partitions(5, 2).unwrap();
    parts.extend(enumerate_partitions(5, 3).unwrap());
    let n = parts.len();
    assert_eq!(n as u64, stirling2(5, 2) + stirling2(5, 3));

    let mut vi = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            vi[i * n + j] = variation_of_information(&parts[i], &parts[j]).unwrap();
        }
    }
    let mut worst_identity = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    let mut worst_triangle = 0.0f64;
    for i in 0..n {
        worst_identity = worst_identity.max(vi[i * n + i].abs());
        for j in 0..n {
            worst_symmetry = worst_symmetry.max((vi[i * n + j] - vi[j * n + i]).abs());
            for l in 0..n {
                let slack = vi[i * n + l] - vi[i * n + j] - vi[j * n + l];
                worst_triangle = worst_triangle.max(slack);
            }
        }
    }
    let pass = worst_identity <= 1e-12 && worst_symmetry <= 1e-12 && worst_triangle <= 1e-12;
    verdict(
        6,
        "VI metric axioms",
        pass,
        format!(
            "{n} partitions, {t} triples: identity {worst_identity:.2e}, symmetry {worst_symmetry:.2e}, triangle slack {worst_triangle:.2e}, {e:?}",
            t = n * n * n,
            e = start.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: incremental-quality drift over 10^4 moves

#[test]
fn criterion_7_incremental_drift() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let n = 50;
    let coords: Vec<f64> = (0..n * 2).map(|_| rng.random::<f64>() * 20.0).collect();
    let points = PointSet::new(coords, n, 2).unwrap();
    let kernel = KernelSpec::gaussian(3.0).unwrap();
    let gram = KernelGram::compute(&points, &kernel);
    let seed_partition = kmeans_seed(&points, 5, 707).unwrap();

    let mut kernel_cache = QualityCache::kernel(&points, &gram, &seed_partition).unwrap();
    let mut kmeans_cache = QualityCache::kmeans(&points, &seed_partition).unwrap();
    let mut moves = 0usize;
    while moves < 10_000 {
        let point = rng.random_range(0..n);
        let target = rng.random_range(0..5);
        let cur = kernel_cache.labels()[point];
        if target != cur && kernel_cache.cluster_size(cur) == 1 {
            continue;
        }
        kernel_cache.apply_move(point, target).unwrap();
        kmeans_cache.apply_move(point, target).unwrap();
        moves += 1;
    }
    let snapshot = kernel_cache.snapshot();
    let fresh_kernel = kernel_quality(&snapshot, &points, &kernel);
    let fresh_kmeans = kmeans_quality(&snapshot, &points);
    let rel_kernel = ((kernel_cache.quality() - fresh_kernel) / fresh_kernel).abs();
    let rel_kmeans = ((kmeans_cache.quality() - fresh_kmeans) / fresh_kmeans).abs();
    kernel_cache.verify().unwrap();
    kmeans_cache.verify().unwrap();
    let pass = rel_kernel <= 1e-9 && rel_kmeans <= 1e-9;
    verdict(
        7,
        "incremental-quality drift",
        pass,
        format!(
            "10^4 moves on n=50: kernel drift {rel_kernel:.2e}, kmeans drift {rel_kmeans:.2e}, {:?}",
            start.elapsed()
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: MDS reconstruction of Euclidean-realizable inputs

#[test]
fn criterion_8_mds_reconstruction() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    for k in 3..=10 {
        let coords: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let mut vals = vec![0.0f64; k * k];
        for i in 0..k {
            for j in 0..k {
                let dx = coords[i].0 - coords[j].0;
                let dy = coords[i].1 - coords[j].1;
                vals[i * k + j] = (dx * dx + dy * dy).sqrt();
            }
        }
        let d = DistanceMatrix::new_raw(k, "euclidean", vals).unwrap();
        let e = classical_mds(&d, 2).unwrap();
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((e.embedded_distance(i, j) - d.get(i, j)).abs());
            }
        }
    }
    verdict(
        8,
        "MDS reconstruction",
        worst <= 1e-9,
        format!("k = 3..=10, worst |embedded - input| = {worst:.2e}, {:?}", start.elapsed()),
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: byte-identical run directories

#[test]
fn criterion_9_determinism() {
    let base = base_run();
    let tmp = tempfile::tempdir().unwrap();
    let cfg = accept_config(tmp.path().to_path_buf(), ACCEPT_SEED);
    let second = cmd_pipeline(&cfg).expect("second pipeline run");

    let diff = diff_run_dirs(&base.dir, &second).unwrap();
    // The manifest must also list every artifact with a hash.
    let manifest = Manifest::read(&second.join(stages::files::MANIFEST)).unwrap();
    let mut missing = Vec::new();
    for name in [
        stages::files::DATASET,
        stages::files::SAMPLES,
        stages::files::DISTANCES,
        "distances.csv.meta",
        stages::files::GROUPING,
        stages::files::GROUPING_SUMMARY,
        stages::files::EMBEDDING,
        "fig_member_distances.csv",
        "fig_member_distances.svg",
        "fig_quality_ratios.csv",
        "fig_quality_ratios.svg",
        "fig_mds.csv",
        "fig_mds.svg",
    ] {
        if !manifest.files.contains_key(name) {
            missing.push(name);
        }
    }
    let pass = diff.is_none() && missing.is_empty() && manifest.error.is_none();
    verdict(
        9,
        "determinism",
        pass,
        format!(
            "rerun diff: {diff:?}; manifest lists {} files, missing {missing:?}",
            manifest.files.len()
        ),
    );
}

// ---------------------------------------------------------------------------
// Desk-scale smoke: labeled 150x4 dataset through the whole pipeline

#[test]
fn smoke_labeled_iris_scale_pipeline() {
    // A 150-point, 4-dimensional, 3-species-style labeled CSV (the Iris
    // shape). Only completion and invariant satisfaction are asserted.
    let mut rng = ChaCha8Rng::seed_from_u64(150);
    let tmp = tempfile::tempdir().unwrap();
    let csv_path = tmp.path().join("iris_like.csv");
    let mut text = String::from("sepal_a,sepal_b,petal_a,petal_b,species\n");
    let species = ["iris-alpha", "iris-beta", "iris-gamma"];
    let centers = [
        [5.0, 3.4, 1.5, 0.2],
        [5.9, 2.8, 4.3, 1.3],
        [6.6, 3.0, 5.6, 2.0],
    ];
    for (sp, center) in species.iter().zip(&centers) {
        for _ in 0..50 {
            let row: Vec<String> = center
                .iter()
                .map(|&c| format!("{:.2}", c + rng.random::<f64>() * 0.8 - 0.4))
                .collect();
            text.push_str(&format!("{},{sp}\n", row.join(",")));
        }
    }
    std::fs::write(&csv_path, text).unwrap();

    // Parse contract at the Iris shape: 150 rows, 4 numeric columns, 3 labels.
    let (points, reference) = load_csv(&csv_path, Some(4)).unwrap();
    assert_eq!(points.n(), 150);
    assert_eq!(points.d(), 4);
    assert_eq!(reference.as_ref().unwrap().num_clusters(), 3);

    let mut cfg = RunConfig::default();
    cfg.csv = Some(csv_path);
    cfg.label_col = Some(4);
    cfg.burn_in = 100;
    cfg.samples = 300;
    cfg.k = 5;
    cfg.seed = 11;
    cfg.out_dir = tmp.path().join("runs");
    let dir = cmd_pipeline(&cfg).expect("labeled pipeline completes");

    let z = read_sample_set(&dir.join(stages::files::SAMPLES)).unwrap();
    assert_eq!(z.len(), 300);
    for p in &z.partitions {
        assert_eq!(p.num_clusters(), 3);
        assert!(p.cluster_sizes().iter().all(|&c| c > 0));
        assert!(p.is_canonical());
    }
    let d = read_matrix_csv(&dir.join(stages::files::DISTANCES)).unwrap();
    assert_eq!(d.m(), 300);
    let manifest = Manifest::read(&dir.join(stages::files::MANIFEST)).unwrap();
    assert!(manifest.error.is_none());
    println!("smoke iris-scale pipeline: PASS ({})", dir.display());
}
