//! Declarative run configuration: flat key=value files merged with CLI
//! flags (flags win), resolved defaults, and a stable content hash that
//! names the run directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use partscape::error::{Error, Result};
use partscape::pdist::DistanceKind;
use partscape::quality::QualityKind;
use sha2::{Digest, Sha256};

/// Kernel bandwidth: a fixed value or the median heuristic resolved at
/// sampling time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSpec {
    Median,
    Fixed(f64),
}

impl SigmaSpec {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "median" {
            return Ok(SigmaSpec::Median);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Param(format!("sigma must be a number or 'median', got '{s}'")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Param(format!("sigma must be positive, got {v}")));
        }
        Ok(SigmaSpec::Fixed(v))
    }
}

impl fmt::Display for SigmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaSpec::Median => write!(f, "median"),
            SigmaSpec::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Distance driving the grouping step: an element distance, or density
/// ranks derived from one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupDistance {
    Plain(DistanceKind),
    Density(DistanceKind),
}

impl GroupDistance {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(inner) = s
            .strip_prefix("density(")
            .and_then(|rest| rest.strip_suffix(')'))
            .or_else(|| s.strip_prefix("density-"))
        {
            return Ok(GroupDistance::Density(DistanceKind::parse(inner)?));
        }
        Ok(GroupDistance::Plain(DistanceKind::parse(s)?))
    }
}

impl fmt::Display for GroupDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDistance::Plain(k) => write!(f, "{}", k.as_str()),
            GroupDistance::Density(k) => write!(f, "density({})", k.as_str()),
        }
    }
}

/// How the first Gonzalez center is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstCenter {
    /// The highest-quality sample (ties toward the lowest index). Default.
    BestQuality,
    /// An explicit sample index.
    Index(usize),
}

impl FirstCenter {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "best-quality" {
            return Ok(FirstCenter::BestQuality);
        }
        s.parse()
            .map(FirstCenter::Index)
            .map_err(|_| Error::Param(format!("first-center must be 'best-quality' or an index, got '{s}'")))
    }
}

impl fmt::Display for FirstCenter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FirstCenter::BestQuality => write!(f, "best-quality"),
            FirstCenter::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Fully-resolved pipeline configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub synthetic: Option<String>,
    pub csv: Option<PathBuf>,
    pub label_col: Option<usize>,
    pub s: Option<usize>,
    pub sigma: SigmaSpec,
    pub quality: QualityKind,
    pub burn_in: usize,
    pub samples: usize,
    pub thinning: usize,
    pub chains: usize,
    pub distance: GroupDistance,
    pub k: usize,
    pub first_center: FirstCenter,
    pub baseline: Option<f64>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            synthetic: None,
            csv: None,
            label_col: None,
            s: None,
            sigma: SigmaSpec::Median,
            quality: QualityKind::Kernel,
            burn_in: 1000,
            samples: 4000,
            thinning: 1,
            chains: 1,
            distance: GroupDistance::Plain(DistanceKind::LiftEmd),
            k: 10,
            first_center: FirstCenter::BestQuality,
            baseline: None,
            out_dir: PathBuf::from("runs"),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Applies one key=value pair (config-file key space).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "data.synthetic" => self.synthetic = Some(value.to_string()),
            "data.csv" => self.csv = Some(PathBuf::from(value)),
            "data.label_col" => {
                self.label_col = Some(value.parse().map_err(|_| bad(key, value))?)
            }
            "s" => self.s = Some(value.parse().map_err(|_| bad(key, value))?),
            "sigma" => self.sigma = SigmaSpec::parse(value)?,
            "quality" => self.quality = QualityKind::parse(value)?,
            "burn_in" => self.burn_in = value.parse().map_err(|_| bad(key, value))?,
            "samples" => self.samples = value.parse().map_err(|_| bad(key, value))?,
            "thinning" => self.thinning = value.parse().map_err(|_| bad(key, value))?,
            "chains" => self.chains = value.parse().map_err(|_| bad(key, value))?,
            "distance" => self.distance = GroupDistance::parse(value)?,
            "k" => self.k = value.parse().map_err(|_| bad(key, value))?,
            "first_center" => self.first_center = FirstCenter::parse(value)?,
            "baseline" => self.baseline = Some(value.parse().map_err(|_| bad(key, value))?),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            other => return Err(Error::Param(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Loads `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected key=value, got '{line}'"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.synthetic, &self.csv) {
            (Some(_), Some(_)) => {
                return Err(Error::Param(
                    "choose either a synthetic dataset or a CSV, not both".into(),
                ))
            }
            (None, None) => {
                return Err(Error::Param("no dataset: set data.synthetic or data.csv".into()))
            }
            (Some(name), None) if name != "2d5c" => {
                return Err(Error::Param(format!(
                    "unknown synthetic dataset '{name}' (only 2d5c)"
                )))
            }
            _ => {}
        }
        if self.synthetic.is_some() && self.label_col.is_some() {
            return Err(Error::Param(
                "label_col applies only to CSV datasets".into(),
            ));
        }
        if self.k < 1 || self.k > self.samples {
            return Err(Error::Param(format!(
                "k = {} outside 1..={}",
                self.k, self.samples
            )));
        }
        if self.chains < 1 || self.chains > self.samples {
            return Err(Error::Param(format!(
                "chains = {} outside 1..={}",
                self.chains, self.samples
            )));
        }
        Ok(())
    }

    /// Canonical serialization: sorted key=value lines over the resolved
    /// config (excluding out_dir), so the hash ignores key order and
    /// explicitly-spelled defaults.
    pub fn canonical_lines(&self) -> String {
        let mut map: BTreeMap<&'static str, String> = BTreeMap::new();
        if let Some(s) = &self.synthetic {
            map.insert("data.synthetic", s.clone());
        }
        if let Some(p) = &self.csv {
            map.insert("data.csv", p.display().to_string());
        }
        if let Some(c) = self.label_col {
            map.insert("data.label_col", c.to_string());
        }
        if let Some(s) = self.s {
            map.insert("s", s.to_string());
        }
        map.insert("sigma", self.sigma.to_string());
        map.insert("quality", self.quality.as_str().to_string());
        map.insert("burn_in", self.burn_in.to_string());
        map.insert("samples", self.samples.to_string());
        map.insert("thinning", self.thinning.to_string());
        map.insert("chains", self.chains.to_string());
        map.insert("distance", self.distance.to_string());
        map.insert("k", self.k.to_string());
        map.insert("first_center", self.first_center.to_string());
        if let Some(b) = self.baseline {
            map.insert("baseline", b.to_string());
        }
        map.insert("seed", self.seed.to_string());
        let mut out = String::new();
        for (k, v) in map {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    /// Full sha256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_lines().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Run directory: `<out_dir>/<first 16 hash chars>`.
    pub fn run_dir(&self) -> PathBuf {
        self.out_dir.join(&self.hash()[..16])
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Param(format!("bad value '{value}' for key '{key}'"))
}
