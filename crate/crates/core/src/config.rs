//! Experiment configuration: a flat `key = value` text format shared by
//! config files and command-line overrides, plus the derived sweep grid.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fbas::ThresholdMode;
use crate::walk::CutoffParams;

/// Version of the config text format this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Where the base trust graph comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DatasetSpec {
    /// Whitespace-separated edge list on disk, one link per line.
    Path(PathBuf),
    /// Generated mutual-link graph over `nodes` nodes: `cycles` seeded
    /// Hamiltonian cycles alternating between two halves plus one cycle
    /// within each half, so degrees concentrate at `2 * cycles + 2`.
    Synthetic { nodes: usize, cycles: usize },
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSpec::Path(p) => write!(f, "{}", p.display()),
            DatasetSpec::Synthetic { nodes, cycles } => {
                write!(f, "synthetic:nodes={nodes},cycles={cycles}")
            }
        }
    }
}

impl DatasetSpec {
    fn parse(value: &str) -> Result<Self> {
        let Some(body) = value.strip_prefix("synthetic:") else {
            if value.is_empty() {
                return Err(Error::arg("dataset must not be empty"));
            }
            return Ok(DatasetSpec::Path(PathBuf::from(value)));
        };
        let mut nodes = None;
        let mut cycles = None;
        for part in body.split(',') {
            let (key, num) = part
                .split_once('=')
                .ok_or_else(|| Error::arg(format!("malformed synthetic field {part:?}")))?;
            let slot = match key.trim() {
                "nodes" => &mut nodes,
                "cycles" => &mut cycles,
                other => {
                    return Err(Error::arg(format!("unknown synthetic field {other:?}")))
                }
            };
            if slot.is_some() {
                return Err(Error::arg(format!("synthetic field {key:?} given twice")));
            }
            *slot = Some(num.trim().parse::<usize>().map_err(|_| {
                Error::arg(format!("synthetic field {key} needs an integer, got {num:?}"))
            })?);
        }
        match (nodes, cycles) {
            (Some(nodes), Some(cycles)) => Ok(DatasetSpec::Synthetic { nodes, cycles }),
            _ => Err(Error::arg("synthetic dataset needs both nodes= and cycles=")),
        }
    }
}

/// Which adversary the experiment runs against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// One newcomer with two honest links and no stake of its own.
    Benign,
    /// Preset worst case: a third of the network in Sybils backed by half
    /// the honest committed stake.
    Byzantine,
    /// Attack parameters taken from the `n_s`/`l_s`/`l_n`/`f_n` axes.
    Custom,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Benign => "benign",
            Condition::Byzantine => "byzantine",
            Condition::Custom => "custom",
        })
    }
}

/// One cell of the custom-attack grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_s: usize,
    pub l_s: u64,
    pub l_n: u64,
    pub f_n: f64,
}

/// Full description of an experiment run. Parsed from `key = value` lines;
/// [`ExperimentConfig::set`] applies a single assignment, so command-line
/// overrides reuse the file syntax.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    /// Random node sample taken before pruning; 0 keeps the whole graph.
    pub subsample: usize,
    /// Minimum degree kept by the iterated core pruning.
    pub core_degree: u32,
    /// Balance minted for every account when the base ledger is built.
    pub genesis_balance: u64,
    pub condition: Condition,
    pub repeats: usize,
    pub seed: u64,
    /// How many honest verifiers get a detailed per-verifier report row.
    pub verifier_sample: usize,
    /// Walk-length multiplier `m` in `ceil(m ln N)` steps.
    pub walk_multiplier: f64,
    /// Logistic steepness multiplier `k` in `k * N`.
    pub steepness: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub y_step: f64,
    /// How surviving thresholds are set after deleting the detected set.
    pub delete_mode: ThresholdMode,
    /// Whether a run counts as failed when the post-deletion system is
    /// unsafe.
    pub require_safety: bool,
    /// Whether a run counts as failed when the residual honest set cannot
    /// form a quorum.
    pub require_liveness: bool,
    /// Custom-condition axes; the cartesian product defines the sweep grid.
    pub n_s: Vec<usize>,
    pub l_s: Vec<u64>,
    pub l_n: Vec<u64>,
    pub f_n: Vec<f64>,
    pub stake_per_link: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSpec::Synthetic { nodes: 5001, cycles: 6 },
            subsample: 0,
            core_degree: 3,
            genesis_balance: 64,
            condition: Condition::Benign,
            repeats: 10,
            seed: 42,
            verifier_sample: 20,
            walk_multiplier: 3.0,
            steepness: 10.0,
            y_min: 0.45,
            y_max: 0.55,
            y_step: 0.01,
            delete_mode: ThresholdMode::Recompute,
            require_safety: true,
            require_liveness: true,
            n_s: vec![10],
            l_s: vec![20],
            l_n: vec![20],
            f_n: vec![0.5],
            stake_per_link: 1,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::arg(format!("{key} needs a number, got {value:?}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Result<Vec<T>> =
        value.split(',').map(|part| parse_num::<T>(key, part)).collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::arg(format!("{key} needs at least one value")));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::arg(format!("{key} needs true or false, got {other:?}"))),
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment. Unknown keys are errors so
    /// typos never silently fall back to a default.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "schema" => {
                let v: u32 = parse_num(key, value)?;
                if v != SCHEMA_VERSION {
                    return Err(Error::arg(format!(
                        "config schema {v} not supported, expected {SCHEMA_VERSION}"
                    )));
                }
            }
            "dataset" => self.dataset = DatasetSpec::parse(value)?,
            "subsample" => self.subsample = parse_num(key, value)?,
            "core_degree" => self.core_degree = parse_num(key, value)?,
            "genesis_balance" => self.genesis_balance = parse_num(key, value)?,
            "condition" => {
                self.condition = match value {
                    "benign" => Condition::Benign,
                    "byzantine" => Condition::Byzantine,
                    "custom" => Condition::Custom,
                    other => {
                        return Err(Error::arg(format!(
                            "condition must be benign, byzantine, or custom, got {other:?}"
                        )))
                    }
                }
            }
            "repeats" => self.repeats = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "verifier_sample" => self.verifier_sample = parse_num(key, value)?,
            "m" => self.walk_multiplier = parse_num(key, value)?,
            "k" => self.steepness = parse_num(key, value)?,
            "y_min" => self.y_min = parse_num(key, value)?,
            "y_max" => self.y_max = parse_num(key, value)?,
            "y_step" => self.y_step = parse_num(key, value)?,
            "delete_mode" => {
                self.delete_mode = match value {
                    "recompute" => ThresholdMode::Recompute,
                    "preserve" => ThresholdMode::Preserve,
                    other => {
                        return Err(Error::arg(format!(
                            "delete_mode must be recompute or preserve, got {other:?}"
                        )))
                    }
                }
            }
            "require_safety" => self.require_safety = parse_bool(key, value)?,
            "require_liveness" => self.require_liveness = parse_bool(key, value)?,
            "n_s" => self.n_s = parse_list(key, value)?,
            "l_s" => self.l_s = parse_list(key, value)?,
            "l_n" => self.l_n = parse_list(key, value)?,
            "f_n" => self.f_n = parse_list(key, value)?,
            "stake_per_link" => self.stake_per_link = parse_num(key, value)?,
            other => return Err(Error::arg(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a whole config text. Missing keys keep their defaults; each
    /// key may appear at most once. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(lineno, format!("expected key = value, got {line:?}")));
            };
            let key = key.trim().to_string();
            if seen.contains(&key) {
                return Err(Error::parse(lineno, format!("duplicate key {key:?}")));
            }
            cfg.set(&key, value)
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
            seen.push(key);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Canonical text form: every key in a fixed order, parseable back into
    /// an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("schema", SCHEMA_VERSION.to_string());
        line("dataset", self.dataset.to_string());
        line("subsample", self.subsample.to_string());
        line("core_degree", self.core_degree.to_string());
        line("genesis_balance", self.genesis_balance.to_string());
        line("condition", self.condition.to_string());
        line("repeats", self.repeats.to_string());
        line("seed", self.seed.to_string());
        line("verifier_sample", self.verifier_sample.to_string());
        line("m", self.walk_multiplier.to_string());
        line("k", self.steepness.to_string());
        line("y_min", self.y_min.to_string());
        line("y_max", self.y_max.to_string());
        line("y_step", self.y_step.to_string());
        line(
            "delete_mode",
            match self.delete_mode {
                ThresholdMode::Recompute => "recompute".to_string(),
                ThresholdMode::Preserve => "preserve".to_string(),
            },
        );
        line("require_safety", self.require_safety.to_string());
        line("require_liveness", self.require_liveness.to_string());
        line("n_s", join(&self.n_s));
        line("l_s", join(&self.l_s));
        line("l_n", join(&self.l_n));
        line("f_n", join(&self.f_n));
        line("stake_per_link", self.stake_per_link.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        if let DatasetSpec::Synthetic { nodes, cycles } = self.dataset {
            if nodes < 3 {
                return Err(Error::arg("synthetic dataset needs at least 3 nodes"));
            }
            if cycles == 0 {
                return Err(Error::arg("synthetic dataset needs at least 1 cycle"));
            }
        }
        if self.subsample == 1 || self.subsample == 2 {
            return Err(Error::arg("subsample must be 0 (off) or at least 3"));
        }
        if self.genesis_balance == 0 {
            return Err(Error::arg("genesis_balance must be positive"));
        }
        if self.repeats == 0 {
            return Err(Error::arg("repeats must be positive"));
        }
        if self.verifier_sample == 0 {
            return Err(Error::arg("verifier_sample must be positive"));
        }
        self.cutoff().validate()?;
        if self.stake_per_link == 0 {
            return Err(Error::arg("stake_per_link must be positive"));
        }
        for &f in &self.f_n {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::arg(format!("f_n entries must be in [0, 1], got {f}")));
            }
        }
        Ok(())
    }

    /// Walk and scoring parameters in the form the inference layer takes.
    pub fn cutoff(&self) -> CutoffParams {
        CutoffParams {
            y_min: self.y_min,
            y_max: self.y_max,
            y_step: self.y_step,
            m: self.walk_multiplier,
            k: self.steepness,
        }
    }

    /// Cartesian product of the custom-attack axes, `n_s` outermost and
    /// `f_n` innermost. Preset conditions ignore the grid.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let mut points = Vec::new();
        for &n_s in &self.n_s {
            for &l_s in &self.l_s {
                for &l_n in &self.l_n {
                    for &f_n in &self.f_n {
                        points.push(SweepPoint { n_s, l_s, l_n, f_n });
                    }
                }
            }
        }
        points
    }
}
