use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use partscape::error::{Error, ErrorCategory};
use partscape_cli::config::{FirstCenter, GroupDistance, RunConfig, SigmaSpec};
use partscape_cli::stages;

/// Sample many high-quality partitions of a dataset and select k diverse
/// representatives.
#[derive(Parser)]
#[command(name = "partscape", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline (synth/ingest -> sample -> dist -> group ->
    /// mds -> report) into a run directory named by the config hash.
    Pipeline(PipelineArgs),
    /// Generate the synthetic 2d5c benchmark as CSV (header x,y,label).
    Synth {
        /// RNG seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample partitions proportional to quality from a dataset CSV.
    Sample(SampleArgs),
    /// Compute the pairwise distance matrix over a sample set.
    Dist {
        /// Dataset CSV (as written by synth/ingest).
        #[arg(long)]
        data: PathBuf,
        /// Label column index in the dataset CSV, if present.
        #[arg(long)]
        label_col: Option<usize>,
        /// Sample-set file from `sample`.
        #[arg(long)]
        samples: PathBuf,
        /// rand | vi | nmi | liftemd | density(liftemd)
        #[arg(long, default_value = "liftemd", value_parser = GroupDistance::parse)]
        kind: GroupDistance,
        /// Output matrix CSV path (a `.meta` sidecar records the kind).
        #[arg(long)]
        out: PathBuf,
    },
    /// Select k representatives with the Gonzalez k-center sweep.
    Group {
        /// Distance matrix CSV from `dist`.
        #[arg(long)]
        distances: PathBuf,
        /// Sample-set file (for the best-quality first-center rule).
        #[arg(long)]
        samples: PathBuf,
        /// Number of representatives.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// 'best-quality' or an explicit sample index.
        #[arg(long, default_value = "best-quality", value_parser = FirstCenter::parse)]
        first_center: FirstCenter,
        /// Output grouping record path.
        #[arg(long)]
        out: PathBuf,
        /// Output summary CSV path.
        #[arg(long)]
        summary: PathBuf,
    },
    /// Classical MDS over the representative-to-representative distances.
    Mds {
        #[arg(long)]
        distances: PathBuf,
        #[arg(long)]
        grouping: PathBuf,
        /// Target dimension (1-3).
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render figure data and SVGs from staged artifacts.
    Report {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        label_col: Option<usize>,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        distances: PathBuf,
        #[arg(long)]
        grouping: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        /// Optional external consensus-quality marker (blue circle).
        #[arg(long)]
        baseline: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// Flat key=value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Synthetic dataset name (2d5c).
    #[arg(long)]
    synthetic: Option<String>,
    /// Input dataset CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Label column index in the input CSV.
    #[arg(long)]
    label_col: Option<usize>,
    /// Cluster count (defaults to the reference partition's).
    #[arg(long = "s")]
    s: Option<usize>,
    /// Kernel bandwidth: a number or 'median'.
    #[arg(long, value_parser = SigmaSpec::parse)]
    sigma: Option<SigmaSpec>,
    /// kernel | kmeans
    #[arg(long, value_parser = partscape::quality::QualityKind::parse)]
    quality: Option<partscape::quality::QualityKind>,
    /// Burn-in sweeps.
    #[arg(long = "t0")]
    burn_in: Option<usize>,
    /// Kept samples.
    #[arg(long = "m")]
    samples: Option<usize>,
    /// Sweeps between kept samples.
    #[arg(long)]
    thinning: Option<usize>,
    /// Independent chains (samples split evenly).
    #[arg(long)]
    chains: Option<usize>,
    /// Grouping distance: rand | vi | nmi | liftemd | density(liftemd).
    #[arg(long, value_parser = GroupDistance::parse)]
    distance: Option<GroupDistance>,
    /// Number of representatives.
    #[arg(long = "k")]
    k: Option<usize>,
    /// 'best-quality' or an explicit sample index.
    #[arg(long, value_parser = FirstCenter::parse)]
    first_center: Option<FirstCenter>,
    /// Optional external consensus-quality marker value.
    #[arg(long)]
    baseline: Option<f64>,
    /// Parent directory for run directories.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl PipelineArgs {
    fn into_config(self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(v) = self.synthetic {
            cfg.synthetic = Some(v);
        }
        if let Some(v) = self.csv {
            cfg.csv = Some(v);
        }
        if let Some(v) = self.label_col {
            cfg.label_col = Some(v);
        }
        if let Some(v) = self.s {
            cfg.s = Some(v);
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.quality {
            cfg.quality = v;
        }
        if let Some(v) = self.burn_in {
            cfg.burn_in = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.thinning {
            cfg.thinning = v;
        }
        if let Some(v) = self.chains {
            cfg.chains = v;
        }
        if let Some(v) = self.distance {
            cfg.distance = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.first_center {
            cfg.first_center = v;
        }
        if let Some(v) = self.baseline {
            cfg.baseline = Some(v);
        }
        if let Some(v) = self.out_dir {
            cfg.out_dir = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Pipeline(args) => {
            let cfg = args.into_config()?;
            let dir = stages::cmd_pipeline(&cfg)?;
            println!("{}", dir.display());
            Ok(())
        }
        Command::Synth { seed, out } => stages::stage_synth(seed, &out),
        Command::Sample(args) => args.run(),
        Command::Dist {
            data,
            label_col,
            samples,
            kind,
            out,
        } => stages::stage_dist(&data, label_col, &samples, kind, &out),
        Command::Group {
            distances,
            samples,
            k,
            first_center,
            out,
            summary,
        } => stages::stage_group(&distances, &samples, k, first_center, &out, &summary),
        Command::Mds {
            distances,
            grouping,
            dim,
            out,
        } => stages::stage_mds(&distances, &grouping, dim, &out),
        Command::Report {
            data,
            label_col,
            samples,
            distances,
            grouping,
            embedding,
            baseline,
            out_dir,
        } => stages::stage_report(
            &data,
            label_col,
            &samples,
            &distances,
            &grouping,
            &embedding,
            baseline,
            &out_dir,
        )
        .map(|_| ()),
    }
}

#[derive(Args)]
struct SampleArgs {
    /// Dataset CSV.
    #[arg(long)]
    data: PathBuf,
    /// Label column index, if present.
    #[arg(long)]
    label_col: Option<usize>,
    /// Cluster count (defaults to the reference partition's).
    #[arg(long = "s")]
    s: Option<usize>,
    /// Kernel bandwidth: a number or 'median'.
    #[arg(long, default_value = "median", value_parser = SigmaSpec::parse)]
    sigma: SigmaSpec,
    /// kernel | kmeans
    #[arg(long, default_value = "kernel", value_parser = partscape::quality::QualityKind::parse)]
    quality: partscape::quality::QualityKind,
    /// Burn-in sweeps.
    #[arg(long = "t0", default_value_t = 1000)]
    burn_in: usize,
    /// Kept samples.
    #[arg(long = "m", default_value_t = 4000)]
    samples: usize,
    /// Sweeps between kept samples.
    #[arg(long, default_value_t = 1)]
    thinning: usize,
    /// Independent chains.
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output sample-set path.
    #[arg(long)]
    out: PathBuf,
}

impl SampleArgs {
    fn run(self) -> Result<(), Error> {
        stages::stage_sample(
            &self.data,
            self.label_col,
            self.s,
            self.sigma,
            self.quality,
            self.burn_in,
            self.samples,
            self.thinning,
            self.chains,
            self.seed,
            &self.out,
        )
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Config => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Numeric => 4,
        ErrorCategory::Io => 5,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
