//! Experiment configuration in plain `key = value` form.
//!
//! The same keys are accepted from a config file, from command-line flags
//! (applied afterwards, so they override the file), and from the metadata
//! block at the top of every CSV written by this crate.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cloning::{binomial_distribution, uniform_distribution};
use crate::error::{Error, Result};
use crate::protocol::{SearchBounds, TauPolicy, WeightedEnsemble, DEFAULT_RESOLUTION};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QUBIT_TRANSFER_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    /// Per-step branch weights of one run.
    WeightsEvolution,
    /// Mean atoms to escape a trapping state against σ_rel.
    TrappingCurves,
    /// Mean clone quality against the ground-streak cutoff.
    QualityCutoff,
    /// Batch of runs with one summary row each.
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::WeightsEvolution => "weights-evolution",
            Experiment::TrappingCurves => "trapping-curves",
            Experiment::QualityCutoff => "quality-cutoff",
            Experiment::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "weights-evolution" | "fig2" => Ok(Experiment::WeightsEvolution),
            "trapping-curves" | "fig3" => Ok(Experiment::TrappingCurves),
            "quality-cutoff" | "fig4" => Ok(Experiment::QualityCutoff),
            "custom" => Ok(Experiment::Custom),
            other => Err(Error::param("experiment", format!("unknown experiment `{other}`"))),
        }
    }

    fn default_file(self) -> &'static str {
        match self {
            Experiment::WeightsEvolution => "fig2.csv",
            Experiment::TrappingCurves => "fig3.csv",
            Experiment::QualityCutoff => "fig4.csv",
            Experiment::Custom => "custom.csv",
        }
    }
}

/// Shape of the initial photon-number distribution. The largest photon
/// number comes from `n_max` for the presets.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Binomial,
    Uniform {
        n_min: usize,
    },
    /// Weights for n = 1, 2, ….
    Explicit(Vec<f64>),
}

impl Distribution {
    fn parse(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        match kind.trim() {
            "binomial" => Ok(Distribution::Binomial),
            "uniform" => {
                let n_min = if arg.is_empty() {
                    1
                } else {
                    parse_num("distribution", arg)?
                };
                Ok(Distribution::Uniform { n_min })
            }
            "explicit" => Ok(Distribution::Explicit(parse_list("distribution", arg)?)),
            other => Err(Error::param("distribution", format!("unknown kind `{other}`"))),
        }
    }

    /// Weights indexed by photon number (not yet normalized).
    pub fn weights(&self, n_max: usize) -> Result<Vec<f64>> {
        match self {
            Distribution::Binomial => binomial_distribution(n_max),
            Distribution::Uniform { n_min } => uniform_distribution(*n_min, n_max),
            Distribution::Explicit(w) => Ok(std::iter::once(0.0).chain(w.iter().copied()).collect()),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Binomial => write!(f, "binomial"),
            Distribution::Uniform { n_min } => write!(f, "uniform:{n_min}"),
            Distribution::Explicit(w) => write!(f, "explicit:{}", join(w)),
        }
    }
}

/// Interaction-time rule as configured.
#[derive(Debug, Clone, PartialEq)]
pub enum TauSpec {
    Fixed(f64),
    /// Optimum for the initial distribution, then held constant.
    OptimalInitial,
    /// Re-optimized after every measurement.
    Adaptive,
    /// Half Rabi period for a known photon number.
    HalfRabi(usize),
}

impl TauSpec {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(TauSpec::OptimalInitial),
            "adaptive" => Ok(TauSpec::Adaptive),
            _ => {
                if let Some(n) = s.strip_prefix("half-rabi:") {
                    Ok(TauSpec::HalfRabi(parse_num("tau", n)?))
                } else {
                    Ok(TauSpec::Fixed(parse_num("tau", s)?))
                }
            }
        }
    }
}

impl fmt::Display for TauSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauSpec::Fixed(t) => write!(f, "{t}"),
            TauSpec::OptimalInitial => write!(f, "optimal"),
            TauSpec::Adaptive => write!(f, "adaptive"),
            TauSpec::HalfRabi(n) => write!(f, "half-rabi:{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub distribution: Distribution,
    /// Largest photon number; several values only for quality-cutoff.
    pub n_max: Vec<usize>,
    pub gamma: f64,
    pub tau: TauSpec,
    /// Relative jitter of τ; a list only for trapping-curves.
    pub sigma_rel: Vec<f64>,
    /// Rabi oscillation counts for trapping-curves.
    pub m_rabi: Vec<usize>,
    /// Photon number used by the trapping Monte Carlo.
    pub trap_n: usize,
    pub cutoff: usize,
    pub cutoffs: Vec<usize>,
    pub atom_budget: usize,
    pub runs: usize,
    pub trials: usize,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub n_originals: usize,
    pub resolution: usize,
}

impl ExperimentConfig {
    /// Defaults for an experiment. Seeds are never defaulted.
    pub fn new(experiment: Experiment) -> Self {
        let (n_max, cutoff, sigma_rel) = match experiment {
            Experiment::WeightsEvolution => (vec![6], 20, vec![0.0]),
            Experiment::QualityCutoff => (vec![10], 20, vec![0.0]),
            Experiment::TrappingCurves => (vec![6], 20, range(0.01, 0.2, 0.01)),
            Experiment::Custom => (vec![6], 20, vec![0.0]),
        };
        Self {
            experiment,
            distribution: Distribution::Binomial,
            n_max,
            gamma: 1.0,
            tau: TauSpec::OptimalInitial,
            sigma_rel,
            m_rabi: vec![1, 2, 3],
            trap_n: 1,
            cutoff,
            cutoffs: (1..=30).collect(),
            atom_budget: 100_000,
            runs: 1000,
            trials: 10_000,
            seed: None,
            output: None,
            n_originals: 1,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "experiment" => self.experiment = Experiment::parse(value)?,
            "distribution" => self.distribution = Distribution::parse(value)?,
            "n_max" | "nmax" => self.n_max = parse_list("n_max", value)?,
            "gamma" => self.gamma = parse_num("gamma", value)?,
            "tau" => self.tau = TauSpec::parse(value)?,
            "sigma_rel" | "sigma-rel" => self.sigma_rel = parse_range("sigma_rel", value)?,
            "m_rabi" | "m" => self.m_rabi = parse_list("m_rabi", value)?,
            "trap_n" => self.trap_n = parse_num("trap_n", value)?,
            "cutoff" => self.cutoff = parse_num("cutoff", value)?,
            "cutoffs" => self.cutoffs = parse_int_range("cutoffs", value)?,
            "atom_budget" | "atom-budget" => self.atom_budget = parse_num("atom_budget", value)?,
            "runs" => self.runs = parse_num("runs", value)?,
            "trials" => self.trials = parse_num("trials", value)?,
            "seed" => self.seed = Some(parse_num("seed", value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            "n_originals" | "n-originals" => self.n_originals = parse_num("n_originals", value)?,
            "resolution" => self.resolution = parse_num("resolution", value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::param("config", format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Every setting in `key = value` form, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![
            ("experiment", self.experiment.name().to_string()),
            ("distribution", self.distribution.to_string()),
            ("n_max", join(&self.n_max)),
            ("gamma", self.gamma.to_string()),
            ("tau", self.tau.to_string()),
            ("sigma_rel", join(&self.sigma_rel)),
            ("m_rabi", join(&self.m_rabi)),
            ("trap_n", self.trap_n.to_string()),
            ("cutoff", self.cutoff.to_string()),
            ("cutoffs", join(&self.cutoffs)),
            ("atom_budget", self.atom_budget.to_string()),
            ("runs", self.runs.to_string()),
            ("trials", self.trials.to_string()),
            ("n_originals", self.n_originals.to_string()),
            ("resolution", self.resolution.to_string()),
        ];
        if let Some(seed) = self.seed {
            pairs.push(("seed", seed.to_string()));
        }
        pairs
    }

    /// Output file: the configured path, else `<$QUBIT_TRANSFER_OUT_DIR or .>/<experiment>.csv`.
    pub fn output_path(&self) -> PathBuf {
        if let Some(p) = &self.output {
            return p.clone();
        }
        let dir = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
        dir.join(self.experiment.default_file())
    }

    /// Normalized initial ensemble for a given largest photon number.
    pub fn initial_ensemble(&self, n_max: usize) -> Result<WeightedEnsemble> {
        WeightedEnsemble::from_weights(self.distribution.weights(n_max)?)
    }

    /// Largest photon number the run can start with.
    pub fn support_max(&self, n_max: usize) -> Result<usize> {
        Ok(self.initial_ensemble(n_max)?.max_photons())
    }

    /// Resolves the τ rule for one initial ensemble.
    pub fn tau_policy(&self, initial: &WeightedEnsemble) -> Result<TauPolicy> {
        let bounds = SearchBounds::default_for(self.gamma);
        let center = match self.tau {
            TauSpec::Fixed(t) => t,
            TauSpec::OptimalInitial => crate::protocol::optimal_tau(initial, self.gamma, bounds, self.resolution)?,
            TauSpec::Adaptive => {
                return Ok(TauPolicy::OptimalEachStep {
                    bounds,
                    resolution: self.resolution,
                })
            }
            TauSpec::HalfRabi(n) => return Ok(TauPolicy::HalfRabi { n }),
        };
        let sigma_rel = self.sigma_rel.first().copied().unwrap_or(0.0);
        if sigma_rel > 0.0 {
            Ok(TauPolicy::Jittered {
                center,
                sigma: sigma_rel * center,
            })
        } else {
            Ok(TauPolicy::Fixed(center))
        }
    }
}

pub(crate) fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_num<T: std::str::FromStr>(field: &'static str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::param(field, format!("cannot parse `{}`", s.trim())))
}

fn parse_list<T: std::str::FromStr>(field: &'static str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| parse_num(field, x))
        .collect()
}

/// `start:stop:step`, inclusive of `stop` within rounding, or a plain list.
fn parse_range(field: &'static str, s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step): (f64, f64, f64) = (
                parse_num(field, start)?,
                parse_num(field, stop)?,
                parse_num(field, step)?,
            );
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(Error::param(field, format!("bad range `{s}`")));
            }
            Ok(range(start, stop, step))
        }
        [_] => parse_list(field, s),
        _ => Err(Error::param(field, format!("bad range `{s}`"))),
    }
}

/// start, start + step, … up to stop. Points are computed as start + k·step
/// and rounded to 12 decimals so that 0.01:0.20:0.01 yields exactly 20 values.
fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| ((start + step * k as f64) * 1e12).round() / 1e12)
        .collect()
}

/// `a..b` (inclusive) or a comma list.
fn parse_int_range(field: &'static str, s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (parse_num(field, a)?, parse_num(field, b.trim_start_matches('='))?);
        if b < a {
            return Err(Error::param(field, format!("empty range `{s}`")));
        }
        Ok((a..=b).collect())
    } else {
        parse_list(field, s)
    }
}
