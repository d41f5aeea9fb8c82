//! Stage-wise handoff equivalence: running the six subcommand stage
//! functions by hand over each other's files must reproduce the one-shot
//! pipeline byte for byte. Plus exit-code behavior of the binary.

use std::process::Command;

use partscape_cli::config::{FirstCenter, GroupDistance, RunConfig, SigmaSpec};
use partscape_cli::stages::{self, files};

fn small_config(out_dir: std::path::PathBuf) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.synthetic = Some("2d5c".into());
    cfg.s = Some(5);
    cfg.sigma = SigmaSpec::Fixed(18.0);
    cfg.burn_in = 30;
    cfg.samples = 150;
    cfg.k = 4;
    cfg.seed = 3;
    cfg.out_dir = out_dir;
    cfg
}

#[test]
fn pipeline_equals_manual_stage_sequence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path().join("auto"));
    let auto_dir = stages::cmd_pipeline(&cfg).unwrap();

    let manual = tmp.path().join("manual");
    std::fs::create_dir_all(&manual).unwrap();
    let dataset = manual.join(files::DATASET);
    let samples = manual.join(files::SAMPLES);
    let distances = manual.join(files::DISTANCES);
    let grouping = manual.join(files::GROUPING);
    let summary = manual.join(files::GROUPING_SUMMARY);
    let embedding = manual.join(files::EMBEDDING);

    stages::stage_synth(cfg.seed, &dataset).unwrap();
    stages::stage_sample(
        &dataset,
        Some(2),
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
    .unwrap();
    stages::stage_dist(&dataset, Some(2), &samples, cfg.distance, &distances).unwrap();
    stages::stage_group(
        &distances,
        &samples,
        cfg.k,
        cfg.first_center,
        &grouping,
        &summary,
    )
    .unwrap();
    stages::stage_mds(&distances, &grouping, 2, &embedding).unwrap();
    stages::stage_report(
        &dataset,
        Some(2),
        &samples,
        &distances,
        &grouping,
        &embedding,
        cfg.baseline,
        &manual,
    )
    .unwrap();

    // Every pipeline artifact except the manifest must match byte for byte.
    let mut compared = 0;
    for entry in std::fs::read_dir(&auto_dir).unwrap() {
        let name = entry.unwrap().file_name();
        if name.to_string_lossy() == files::MANIFEST {
            continue;
        }
        let a = std::fs::read(auto_dir.join(&name)).unwrap();
        let b = std::fs::read(manual.join(&name)).unwrap();
        assert_eq!(a, b, "stage handoff differs for {name:?}");
        compared += 1;
    }
    assert!(compared >= 13, "expected all artifacts, compared {compared}");
}

#[test]
fn density_grouping_distance_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config(tmp.path().to_path_buf());
    cfg.samples = 80;
    cfg.burn_in = 10;
    cfg.distance = GroupDistance::parse("density(liftemd)").unwrap();
    cfg.first_center = FirstCenter::Index(0);
    let dir = stages::cmd_pipeline(&cfg).unwrap();
    let meta = std::fs::read_to_string(dir.join("distances.csv.meta")).unwrap();
    assert_eq!(meta.trim(), "kind density(liftemd)");
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_partscape"))
}

#[test]
fn exit_codes_follow_error_categories() {
    // Config error (no dataset): 2.
    let out = bin().args(["pipeline"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{:?}", out);

    // Data error (malformed CSV): 3.
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,oops\n").unwrap();
    let out = bin()
        .args(["sample", "--data"])
        .arg(&bad)
        .args(["--s", "2", "--m", "5", "--t0", "0", "--out"])
        .arg(tmp.path().join("z.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{:?}", out);

    // I/O error (missing file): 5.
    let out = bin()
        .args(["sample", "--data", "/nonexistent/nope.csv", "--s", "2", "--out"])
        .arg(tmp.path().join("z.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5), "{:?}", out);

    // Success: 0.
    let data = tmp.path().join("ok.csv");
    let out_dir = tmp.path().join("runs");
    let out = bin()
        .args(["synth", "--seed", "1", "--out"])
        .arg(&data)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let out = bin()
        .args(["pipeline", "--csv"])
        .arg(&data)
        .args([
            "--label-col",
            "2",
            "--m",
            "40",
            "--t0",
            "5",
            "--k",
            "3",
            "--sigma",
            "10",
            "--seed",
            "2",
            "--out-dir",
        ])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
}

#[test]
fn config_file_with_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.cfg");
    std::fs::write(
        &cfg_path,
        "data.synthetic = 2d5c\nsamples = 30\nburn_in = 5\nk = 3\nsigma = 12\nseed = 4\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("runs");
    let out = bin()
        .args(["pipeline", "--config"])
        .arg(&cfg_path)
        .args(["--m", "25", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let run_dir = String::from_utf8(out.stdout).unwrap().trim().to_string();
    let samples = std::fs::read_to_string(
        std::path::Path::new(&run_dir).join(files::SAMPLES),
    )
    .unwrap();
    let header = samples.lines().next().unwrap();
    // n s m sigma quality-kind seed: the flag's m=25 wins over the file's 30.
    assert_eq!(header, "100 5 25 12 kernel 4");
}
