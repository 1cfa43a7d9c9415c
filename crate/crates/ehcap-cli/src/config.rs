//! Experiment configuration: a flat `key = value` text format with
//! lossless round-tripping, plus helpers to resolve the configured harvest
//! and energy grid into `ehcap-core` model objects.

use std::fmt;
use std::str::FromStr;

use ehcap_core::{ChannelModel, EnergyGrid, HarvestModel};

/// Which pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// One row per maximum harvest: greedy rate, buffer capacity, and the
    /// infinite-buffer reference.
    CapacitySweep,
    /// Simulated truncated-Gaussian rates over a list of buffer sizes, plus
    /// the infinite-buffer reference row.
    TgConvergence,
    /// A single detailed comparison of the greedy baseline against the
    /// optimized capacity on one instance.
    GreedyCompare,
    /// Strategy-letter lower bounds against the side-information reference
    /// on the chain induced by the greedy policy.
    NoBsir,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::CapacitySweep => "capacity-sweep",
            Self::TgConvergence => "tg-convergence",
            Self::GreedyCompare => "greedy-compare",
            Self::NoBsir => "no-bsir",
        };
        f.write_str(s)
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "capacity-sweep" => Ok(Self::CapacitySweep),
            "tg-convergence" => Ok(Self::TgConvergence),
            "greedy-compare" => Ok(Self::GreedyCompare),
            "no-bsir" => Ok(Self::NoBsir),
            other => Err(format!(
                "unknown experiment '{other}' (expected capacity-sweep, \
                 tg-convergence, greedy-compare, or no-bsir)"
            )),
        }
    }
}

/// How harvested energy is distributed each slot.
#[derive(Debug, Clone, PartialEq)]
pub enum HarvestSpec {
    /// Point mass at `ymax`.
    Point,
    /// Uniform over the quanta `{0, 1, ..., ymax/quantum}`.
    Uniform,
    /// Explicit law loaded from a harvest description file.
    Pmf(String),
}

impl fmt::Display for HarvestSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Point => f.write_str("point"),
            Self::Uniform => f.write_str("uniform"),
            Self::Pmf(path) => write!(f, "pmf:{path}"),
        }
    }
}

impl FromStr for HarvestSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "point" => Ok(Self::Point),
            "uniform" => Ok(Self::Uniform),
            other => match other.strip_prefix("pmf:") {
                Some(path) if !path.is_empty() => Ok(Self::Pmf(path.to_string())),
                _ => Err(format!(
                    "unknown harvest '{other}' (expected point, uniform, or pmf:<path>)"
                )),
            },
        }
    }
}

/// Grid resolution: a fixed energy quantum, or `auto` (1.0, or the quantum
/// declared by a harvest file).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantum {
    Auto,
    Fixed(f64),
}

impl fmt::Display for Quantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(q) => write!(f, "{q}"),
        }
    }
}

impl FromStr for Quantum {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        let q: f64 = s
            .parse()
            .map_err(|_| format!("quantum must be 'auto' or a number, got '{s}'"))?;
        if !(q.is_finite() && q > 0.0) {
            return Err(format!("quantum must be positive and finite, got {q}"));
        }
        Ok(Self::Fixed(q))
    }
}

/// Output serialisation format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format '{other}' (expected csv or json)")),
        }
    }
}

/// Complete description of one experiment run.
///
/// Serialises to a flat `key = value` file; [`ExperimentConfig::from_file_str`]
/// of [`ExperimentConfig::to_file_str`] reproduces the value exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Buffer capacity in energy units.
    pub gamma: f64,
    pub quantum: Quantum,
    /// Largest per-slot harvest in energy units.
    pub ymax: f64,
    pub harvest: HarvestSpec,
    /// Noise variance.
    pub sigma2: f64,
    /// Backoff of the simulated signalling power below the mean harvest.
    pub epsilon: f64,
    pub seed: u64,
    /// Search restarts for the capacity optimizer.
    pub restarts: usize,
    /// Monte-Carlo slots recorded per buffer size.
    pub samples: usize,
    /// Monte-Carlo slots discarded per replica before recording.
    pub burn_in: usize,
    /// Independent Monte-Carlo chains pooled per buffer size.
    pub replicas: usize,
    /// Buffer sizes for the convergence sweep, strictly ascending.
    pub gammas: Vec<f64>,
    /// Strategy orders for the no-side-information bounds.
    pub orders: Vec<usize>,
    pub format: OutputFormat,
    /// Output path; stdout when unset.
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::CapacitySweep,
            gamma: 4.0,
            quantum: Quantum::Auto,
            ymax: 4.0,
            harvest: HarvestSpec::Uniform,
            sigma2: 1.0,
            epsilon: 0.05,
            seed: 7,
            restarts: 20,
            samples: 1_000_000,
            burn_in: 10_000,
            replicas: 4,
            gammas: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
            orders: vec![1, 2],
            format: OutputFormat::Csv,
            out: None,
        }
    }
}

fn join<T: fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list<T: FromStr>(value: &str, key: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| format!("bad entry '{s}' in {key}: {e}"))
        })
        .collect()
}

impl ExperimentConfig {
    /// Canonical text form, parseable back into an equal value.
    pub fn to_file_str(&self) -> String {
        let mut s = self.scientific_keys();
        s.push_str(&format!("format = {}\n", self.format));
        if let Some(out) = &self.out {
            s.push_str(&format!("out = {out}\n"));
        }
        s
    }

    /// The keys that define what is computed — everything except where and
    /// how the table is serialised. The config hash in output headers is
    /// taken over this string, so redirecting or reformatting a run does not
    /// change its identity.
    pub fn scientific_keys(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("experiment = {}\n", self.experiment));
        s.push_str(&format!("gamma = {}\n", self.gamma));
        s.push_str(&format!("quantum = {}\n", self.quantum));
        s.push_str(&format!("ymax = {}\n", self.ymax));
        s.push_str(&format!("harvest = {}\n", self.harvest));
        s.push_str(&format!("sigma2 = {}\n", self.sigma2));
        s.push_str(&format!("epsilon = {}\n", self.epsilon));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("restarts = {}\n", self.restarts));
        s.push_str(&format!("samples = {}\n", self.samples));
        s.push_str(&format!("burn-in = {}\n", self.burn_in));
        s.push_str(&format!("replicas = {}\n", self.replicas));
        s.push_str(&format!("gammas = {}\n", join(&self.gammas)));
        s.push_str(&format!("orders = {}\n", join(&self.orders)));
        s
    }

    /// Parse the flat key-value format. Unknown and repeated keys are
    /// errors; `#` starts a comment.
    pub fn from_file_str(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(format!("line {}: key '{key}' repeated", lineno + 1));
            }
            seen.push(key.to_string());
            cfg.set(key, value)
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        }
        Ok(cfg)
    }

    /// Apply one `key = value` assignment (shared by the file parser and the
    /// flag overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(value: &str, key: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            value
                .parse::<T>()
                .map_err(|e| format!("bad value '{value}' for {key}: {e}"))
        }
        match key {
            "experiment" => self.experiment = value.parse()?,
            "gamma" => self.gamma = num(value, key)?,
            "quantum" => self.quantum = value.parse()?,
            "ymax" => self.ymax = num(value, key)?,
            "harvest" => self.harvest = value.parse()?,
            "sigma2" => self.sigma2 = num(value, key)?,
            "epsilon" => self.epsilon = num(value, key)?,
            "seed" => self.seed = num(value, key)?,
            "restarts" => self.restarts = num(value, key)?,
            "samples" => self.samples = num(value, key)?,
            "burn-in" => self.burn_in = num(value, key)?,
            "replicas" => self.replicas = num(value, key)?,
            "gammas" => self.gammas = parse_list(value, key)?,
            "orders" => self.orders = parse_list(value, key)?,
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(value.to_string()),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Structural validation; grid and harvest consistency is checked later
    /// by [`resolve`] once files are loaded.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(format!("gamma must be finite and >= 0, got {}", self.gamma));
        }
        if !(self.ymax.is_finite() && self.ymax >= 0.0) {
            return Err(format!("ymax must be finite and >= 0, got {}", self.ymax));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.restarts == 0 {
            return Err("restarts must be at least 1".into());
        }
        if self.replicas == 0 {
            return Err("replicas must be at least 1".into());
        }
        if self.samples < self.replicas * 64 {
            return Err(format!(
                "samples = {} leaves fewer than 64 slots per replica",
                self.samples
            ));
        }
        if self.gammas.is_empty() {
            return Err("gammas must list at least one buffer size".into());
        }
        if self.gammas.windows(2).any(|w| w[0] >= w[1]) {
            return Err("gammas must be strictly ascending".into());
        }
        if self
            .gammas
            .iter()
            .any(|g| !(g.is_finite() && *g >= 0.0))
        {
            return Err("gammas must be finite and >= 0".into());
        }
        if self.orders.is_empty() || self.orders.iter().any(|m| !(1..=2).contains(m)) {
            return Err("orders must be a non-empty subset of {1, 2}".into());
        }
        Ok(())
    }
}

/// Config resolved into model objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub quantum: f64,
    pub gamma_q: u32,
    pub ymax_q: u32,
    pub harvest: HarvestModel,
    pub channel: ChannelModel,
}

impl Resolved {
    pub fn grid(&self) -> EnergyGrid {
        EnergyGrid::new(self.quantum, self.gamma_q, self.ymax_q)
            .expect("resolved parameters are grid-valid")
    }
}

fn to_quanta(value: f64, quantum: f64, what: &str) -> Result<u32, String> {
    let q = (value / quantum).round();
    if (value - q * quantum).abs() > 1e-9 * value.abs().max(1.0) {
        return Err(format!(
            "{what} = {value} is not a multiple of the quantum {quantum}"
        ));
    }
    if q < 0.0 || q > u32::MAX as f64 {
        return Err(format!("{what} = {value} is out of range"));
    }
    Ok(q as u32)
}

/// Turn a validated config into model objects, loading harvest files as
/// needed. All failures here are configuration errors.
pub fn resolve(cfg: &ExperimentConfig) -> Result<Resolved, String> {
    cfg.validate()?;
    let channel = ChannelModel::new(cfg.sigma2).map_err(|e| e.to_string())?;
    let (quantum, harvest) = match &cfg.harvest {
        HarvestSpec::Pmf(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read harvest file '{path}': {e}"))?;
            let harvest = HarvestModel::from_config_str(&text)
                .map_err(|e| format!("harvest file '{path}': {e}"))?;
            let quantum = match cfg.quantum {
                Quantum::Auto => harvest.quantum(),
                Quantum::Fixed(q) => {
                    if (q - harvest.quantum()).abs() > 1e-12 * q.max(1.0) {
                        return Err(format!(
                            "quantum = {q} conflicts with the harvest file's {}",
                            harvest.quantum()
                        ));
                    }
                    q
                }
            };
            (quantum, harvest)
        }
        simple => {
            let quantum = match cfg.quantum {
                Quantum::Auto => 1.0,
                Quantum::Fixed(q) => q,
            };
            let ymax_q = to_quanta(cfg.ymax, quantum, "ymax")?;
            let harvest = match simple {
                HarvestSpec::Point => HarvestModel::point(quantum, ymax_q),
                HarvestSpec::Uniform => HarvestModel::uniform(quantum, ymax_q),
                HarvestSpec::Pmf(_) => unreachable!("handled above"),
            }
            .map_err(|e| e.to_string())?;
            (quantum, harvest)
        }
    };
    let gamma_q = to_quanta(cfg.gamma, quantum, "gamma")?;
    let resolved = Resolved {
        quantum,
        gamma_q,
        ymax_q: harvest.ymax_q(),
        harvest,
        channel,
    };
    EnergyGrid::new(resolved.quantum, resolved.gamma_q, resolved.ymax_q)
        .map_err(|e| e.to_string())?;
    Ok(resolved)
}
