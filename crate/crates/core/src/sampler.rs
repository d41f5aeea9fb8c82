//! Gibbs sampling over partition space: per-sweep random point ordering,
//! s-way conditional reassignment with probability proportional to the
//! resulting partition quality, burn-in, and sample collection.
//!
//! One chain is strictly sequential. Multiple chains run concurrently with
//! independent RNG streams and are merged by concatenation.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::quality::{KernelGram, KernelSpec, QualityCache, QualityKind};

/// Chain parameters. Defaults follow the generate-then-group protocol:
/// 1000 burn-in sweeps, 4000 kept samples, consecutive sweeps as samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub s: usize,
    pub burn_in: usize,
    pub samples: usize,
    pub thinning: usize,
    pub seed: u64,
    pub quality: QualityKind,
    pub kernel: KernelSpec,
}

impl ChainConfig {
    pub fn new(s: usize, seed: u64, kernel: KernelSpec) -> Self {
        Self {
            s,
            burn_in: 1000,
            samples: 4000,
            thinning: 1,
            seed,
            quality: QualityKind::Kernel,
            kernel,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.s < 2 || self.s > n {
            return Err(Error::Param(format!(
                "cluster count {} outside 2..={n}",
                self.s
            )));
        }
        if self.samples < 1 {
            return Err(Error::Param("need at least one sample".into()));
        }
        if self.thinning < 1 {
            return Err(Error::Param("thinning must be at least 1".into()));
        }
        Ok(())
    }
}

/// The collection Z of sampled partitions with their qualities, plus the
/// run parameters echoed by the sample-set file header.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub partitions: Vec<Partition>,
    pub qualities: Vec<f64>,
    pub n: usize,
    pub s: usize,
    pub sigma: f64,
    pub quality_kind: QualityKind,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// Concatenates per-chain sample sets. All parts must agree on every
    /// header field except the seed; `master_seed` is recorded instead.
    pub fn merge(master_seed: u64, parts: Vec<SampleSet>) -> Result<SampleSet> {
        let first = parts
            .first()
            .ok_or_else(|| Error::EmptyInput("no sample sets to merge".into()))?;
        let (n, s, sigma, kind) = (first.n, first.s, first.sigma, first.quality_kind);
        let mut partitions = Vec::new();
        let mut qualities = Vec::new();
        for part in parts {
            if part.n != n || part.s != s || part.sigma != sigma || part.quality_kind != kind {
                return Err(Error::Input(
                    "sample sets with different parameters cannot be merged".into(),
                ));
            }
            partitions.extend(part.partitions);
            qualities.extend(part.qualities);
        }
        Ok(SampleSet {
            partitions,
            qualities,
            n,
            s,
            sigma,
            quality_kind: kind,
            seed: master_seed,
        })
    }
}

/// One full sweep: draws a uniform random point ordering, then resamples
/// every point's cluster from the exact conditional proportional to the
/// resulting partition quality. Moves that would empty the source cluster
/// are excluded from the candidate set; the point may still stay put.
pub fn gibbs_sweep(cache: &mut QualityCache<'_>, rng: &mut ChaCha8Rng) -> Result<()> {
    let n = cache.n();
    let s = cache.num_clusters();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut weights: Vec<f64> = Vec::with_capacity(s);
    for &point in &order {
        let cur = cache.labels()[point];
        if cache.cluster_size(cur) == 1 {
            // Sole member: every other target would empty the cluster.
            continue;
        }
        cache.candidate_qualities(point, &mut weights)?;
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Underflow(format!(
                "all candidate weights vanished at point {point} (total {total}); \
                 rescale the kernel bandwidth"
            )));
        }
        let mut u = rng.random::<f64>() * total;
        let mut target = s - 1;
        for (j, &w) in weights.iter().enumerate() {
            if u < w {
                target = j;
                break;
            }
            u -= w;
        }
        if target != cur {
            cache.apply_move(point, target)?;
        }
    }
    Ok(())
}

/// Exact conditional move distribution for one point in the current state:
/// `(targets, probabilities)`. Test hook for the conditional-frequency check.
pub fn conditional_distribution(
    cache: &QualityCache<'_>,
    point: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let cur = cache.labels()[point];
    if cache.cluster_size(cur) == 1 {
        return Ok((vec![cur], vec![1.0]));
    }
    let mut weights = Vec::new();
    cache.candidate_qualities(point, &mut weights)?;
    let total: f64 = weights.iter().sum();
    let targets = (0..cache.num_clusters()).collect();
    let probs = weights.iter().map(|w| w / total).collect();
    Ok((targets, probs))
}

/// Runs one chain: `burn_in` sweeps discarded, then `samples * thinning`
/// sweeps recording the partition after every `thinning`-th sweep.
/// Deterministic given (points, seed partition, config); the chain uses RNG
/// stream `chain_index` of the seeded generator so multiple chains draw
/// independent streams from one master seed.
pub fn run_chain(
    points: &PointSet,
    seed_partition: &Partition,
    cfg: &ChainConfig,
) -> Result<SampleSet> {
    let gram = match cfg.quality {
        QualityKind::Kernel => Some(KernelGram::compute(points, &cfg.kernel)),
        QualityKind::KMeans => None,
    };
    run_chain_with_gram(points, gram.as_ref(), seed_partition, cfg, 0)
}

pub(crate) fn run_chain_with_gram(
    points: &PointSet,
    gram: Option<&KernelGram>,
    seed_partition: &Partition,
    cfg: &ChainConfig,
    chain_index: u64,
) -> Result<SampleSet> {
    cfg.validate(points.n())?;
    if seed_partition.n() != points.n() {
        return Err(Error::Dimension {
            expected: points.n(),
            got: seed_partition.n(),
        });
    }
    if seed_partition.num_clusters() != cfg.s {
        return Err(Error::Param(format!(
            "seed partition has {} clusters, config wants {}",
            seed_partition.num_clusters(),
            cfg.s
        )));
    }

    let mut cache = match cfg.quality {
        QualityKind::Kernel => {
            let gram = gram.ok_or_else(|| {
                Error::Param("kernel quality requires a Gram matrix".into())
            })?;
            QualityCache::kernel(points, gram, seed_partition)?
        }
        QualityKind::KMeans => QualityCache::kmeans(points, seed_partition)?,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain_index);

    let total_sweeps = cfg.burn_in + cfg.samples * cfg.thinning;
    let report_every = (total_sweeps / 10).max(1);
    let mut partitions = Vec::with_capacity(cfg.samples);
    let mut qualities = Vec::with_capacity(cfg.samples);

    for sweep in 0..total_sweeps {
        gibbs_sweep(&mut cache, &mut rng)?;
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in + 1) % cfg.thinning == 0 {
            partitions.push(cache.snapshot());
            qualities.push(cache.quality());
        }
        if (sweep + 1) % report_every == 0 {
            log::debug!(
                "chain {chain_index}: sweep {}/{total_sweeps} ({} samples kept)",
                sweep + 1,
                partitions.len()
            );
        }
    }
    debug_assert_eq!(partitions.len(), cfg.samples);

    Ok(SampleSet {
        partitions,
        qualities,
        n: points.n(),
        s: cfg.s,
        sigma: cfg.kernel.bandwidth,
        quality_kind: cfg.quality,
        seed: cfg.seed,
    })
}

/// Runs `chains` independent chains from the same seed partition, splitting
/// `cfg.samples` as evenly as possible (earlier chains take the remainder),
/// and concatenates the results in chain order. The Gram matrix is shared;
/// with the `parallel` feature the chains run on the rayon pool. The output
/// is identical either way.
pub fn run_chains(
    points: &PointSet,
    seed_partition: &Partition,
    cfg: &ChainConfig,
    chains: usize,
) -> Result<SampleSet> {
    if chains == 0 {
        return Err(Error::Param("need at least one chain".into()));
    }
    if chains > cfg.samples {
        return Err(Error::Param(format!(
            "cannot split {} samples across {chains} chains",
            cfg.samples
        )));
    }
    cfg.validate(points.n())?;
    let gram = match cfg.quality {
        QualityKind::Kernel => Some(KernelGram::compute(points, &cfg.kernel)),
        QualityKind::KMeans => None,
    };

    let per_chain: Vec<usize> = (0..chains)
        .map(|c| cfg.samples / chains + usize::from(c < cfg.samples % chains))
        .collect();

    let run_one = |(index, &samples): (usize, &usize)| -> Result<SampleSet> {
        let chain_cfg = ChainConfig {
            samples,
            ..cfg.clone()
        };
        run_chain_with_gram(
            points,
            gram.as_ref(),
            seed_partition,
            &chain_cfg,
            index as u64,
        )
    };

    #[cfg(feature = "parallel")]
    let parts: Result<Vec<SampleSet>> = {
        use rayon::prelude::*;
        per_chain
            .par_iter()
            .enumerate()
            .map(run_one)
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Result<Vec<SampleSet>> = per_chain.iter().enumerate().map(run_one).collect();

    SampleSet::merge(cfg.seed, parts?)
}

/// Writes the sample-set file: header `n s m sigma quality-kind seed`, then
/// one line per sample holding the quality followed by the n labels. Floats
/// use the shortest round-trip representation, so read(write(z)) == z
/// bit-exactly and write(read(f)) == f byte-exactly.
pub fn write_sample_set(path: &Path, z: &SampleSet) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "{} {} {} {} {} {}",
        z.n,
        z.s,
        z.len(),
        z.sigma,
        z.quality_kind.as_str(),
        z.seed
    )?;
    for (p, q) in z.partitions.iter().zip(&z.qualities) {
        write!(w, "{q}")?;
        for &l in p.labels() {
            write!(w, " {l}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sample_set(path: &Path) -> Result<SampleSet> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("sample-set file is empty".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected 6 header fields, got {}", fields.len()),
        });
    }
    let parse_usize = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad {what} '{s}'"),
        })
    };
    let n = parse_usize(fields[0], "n")?;
    let s = parse_usize(fields[1], "s")?;
    let m = parse_usize(fields[2], "m")?;
    let sigma: f64 = fields[3].parse().map_err(|_| Error::Parse {
        line: 1,
        msg: format!("bad sigma '{}'", fields[3]),
    })?;
    let quality_kind = QualityKind::parse(fields[4])?;
    let seed: u64 = fields[5].parse().map_err(|_| Error::Parse {
        line: 1,
        msg: format!("bad seed '{}'", fields[5]),
    })?;

    let mut partitions = Vec::with_capacity(m);
    let mut qualities = Vec::with_capacity(m);
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let q: f64 = fields
            .next()
            .ok_or_else(|| Error::Parse {
                line: lineno,
                msg: "missing quality".into(),
            })?
            .parse()
            .map_err(|_| Error::Parse {
                line: lineno,
                msg: "bad quality value".into(),
            })?;
        let labels: Vec<usize> = fields
            .map(|f| {
                f.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad label '{f}'"),
                })
            })
            .collect::<Result<_>>()?;
        if labels.len() != n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {n} labels, got {}", labels.len()),
            });
        }
        partitions.push(Partition::new(labels, s)?);
        qualities.push(q);
    }
    if partitions.len() != m {
        return Err(Error::Input(format!(
            "header promises {m} samples, file holds {}",
            partitions.len()
        )));
    }
    Ok(SampleSet {
        partitions,
        qualities,
        n,
        s,
        sigma,
        quality_kind,
        seed,
    })
}
