//! Ensemble-level execution of the transfer schemes.
//!
//! The cavity is tracked as a classical mixture over the total photon number
//! n it started with, plus the count m of qubits already moved onto atoms.
//! Every component of branch n holds n - m photons, so a fresh ground-state
//! atom Rabi-oscillates at frequency √(n-m)γ regardless of how the photons
//! are distributed over the two modes. That makes the branch weights evolve
//! independently of the encoded qubit state:
//!
//! * excited with probability p_e = Σ_n p_n sin²(√(n-m)γτ), after which
//!   p_n ∝ p_n sin²(√(n-m)γτ) and m → m + 1;
//! * ground otherwise, after which p_n ∝ p_n cos²(√(n-m)γτ).
//!
//! Each step draws from the supplied generator in a fixed order: the τ
//! jitter (if any, resampling until τ > 0) and then one uniform variate u,
//! with the outcome excited iff u < p_e.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::cloning::{atom_fidelity, FidelityReport};
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::symstate::SymmetricStateVector;

const TIE_TOL: f64 = 1e-12;

/// Result of a projective energy measurement on an atom leaving the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasurementOutcome {
    Ground,
    Excited,
}

impl MeasurementOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementOutcome::Ground => "ground",
            MeasurementOutcome::Excited => "excited",
        }
    }
}

/// Mixture over initial total photon number n with weights p_n, after
/// `transferred` qubits have been moved onto atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnsemble {
    /// Indexed by n.
    weights: Vec<f64>,
    transferred: usize,
    /// Optional symmetric state carried by each branch, indexed by n. The
    /// transfer maps leave it untouched; it is kept for reporting only.
    payload: Option<Vec<Option<SymmetricStateVector>>>,
}

impl WeightedEnsemble {
    /// Normalizes `weights` (indexed by photon number) into an ensemble with
    /// nothing transferred yet.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        Self::with_transferred(weights, 0)
    }

    pub fn with_transferred(mut weights: Vec<f64>, transferred: usize) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("weights", "must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::param("weights", "must have positive total"));
        }
        if weights.iter().take(transferred).any(|&w| w > 0.0) {
            return Err(Error::param(
                "weights",
                format!("branches below {transferred} transferred qubits must be empty"),
            ));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        while weights.len() > 1 && weights.last() == Some(&0.0) {
            weights.pop();
        }
        Ok(Self {
            weights,
            transferred,
            payload: None,
        })
    }

    /// All weight on a single photon number.
    pub fn single(n: usize) -> Self {
        let mut weights = vec![0.0; n + 1];
        weights[n] = 1.0;
        Self {
            weights,
            transferred: 0,
            payload: None,
        }
    }

    /// Attaches the symmetric state encoded in each branch.
    pub fn with_payload(mut self, payload: Vec<Option<SymmetricStateVector>>) -> Result<Self> {
        for (n, p) in payload.iter().enumerate() {
            if let Some(state) = p {
                if state.qubits() != n {
                    return Err(Error::param(
                        "payload",
                        format!("branch {n} carries a {}-qubit state", state.qubits()),
                    ));
                }
            }
        }
        self.payload = Some(payload);
        Ok(self)
    }

    pub fn payload(&self, n: usize) -> Option<&SymmetricStateVector> {
        self.payload.as_ref()?.get(n)?.as_ref()
    }

    /// p_n indexed by n (trailing zero branches trimmed).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights.get(n).copied().unwrap_or(0.0)
    }

    pub fn transferred(&self) -> usize {
        self.transferred
    }

    /// Largest photon number with non-zero weight.
    pub fn max_photons(&self) -> usize {
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    /// Exactly one branch survives and its photons are all transferred.
    pub fn is_vacuum_certain(&self) -> bool {
        let mut alive = self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0);
        matches!((alive.next(), alive.next()), (Some((n, _)), None) if n == self.transferred)
    }

    /// Branch with the largest weight (smallest n on ties).
    pub fn dominant_branch(&self) -> usize {
        self.weights
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (n, &w)| if w > best.1 { (n, w) } else { best })
            .0
    }

    /// Shannon entropy of {p_n} in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| w * w.ln())
            .sum::<f64>()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Probability that branch n excites an atom after m transfers.
pub fn branch_excite_prob(n: usize, transferred: usize, gamma: f64, tau: f64) -> f64 {
    if n <= transferred {
        return 0.0;
    }
    (((n - transferred) as f64).sqrt() * gamma * tau).sin().powi(2)
}

/// p_e = Σ_n p_n sin²(√(n-m)γτ).
pub fn excite_prob(ens: &WeightedEnsemble, gamma: f64, tau: f64) -> f64 {
    let p: f64 = ens
        .weights
        .iter()
        .enumerate()
        .map(|(n, &w)| w * branch_excite_prob(n, ens.transferred, gamma, tau))
        .sum();
    p.clamp(0.0, 1.0)
}

/// Bayesian update of the branch weights on a measurement outcome.
pub fn update_weights(
    ens: &WeightedEnsemble,
    gamma: f64,
    tau: f64,
    outcome: MeasurementOutcome,
) -> Result<WeightedEnsemble> {
    let m = ens.transferred;
    let mut weights: Vec<f64> = ens
        .weights
        .iter()
        .enumerate()
        .map(|(n, &w)| {
            if w == 0.0 {
                return 0.0;
            }
            let pe = branch_excite_prob(n, m, gamma, tau);
            match outcome {
                MeasurementOutcome::Excited => w * pe,
                MeasurementOutcome::Ground => w * (1.0 - pe),
            }
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbability);
    }
    weights.iter_mut().for_each(|w| *w /= total);
    let transferred = match outcome {
        MeasurementOutcome::Excited => {
            // A branch with no photons left cannot have excited the atom.
            weights.iter_mut().take(m + 1).for_each(|w| *w = 0.0);
            m + 1
        }
        MeasurementOutcome::Ground => m,
    };
    Ok(WeightedEnsemble {
        weights,
        transferred,
        payload: ens.payload.clone(),
    })
}

/// Interval (lo, hi] searched for the optimal interaction time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBounds {
    pub lo: f64,
    pub hi: f64,
}

impl SearchBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let bounds = Self { lo, hi };
        bounds.check()?;
        Ok(bounds)
    }

    /// (0, π/γ].
    pub fn default_for(gamma: f64) -> Self {
        Self {
            lo: 0.0,
            hi: PI / gamma,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo >= 0.0 && self.hi > self.lo) {
            return Err(Error::param(
                "bounds",
                format!("({}, {}] is not a non-empty subset of (0, inf)", self.lo, self.hi),
            ));
        }
        Ok(())
    }
}

pub const DEFAULT_RESOLUTION: usize = 2000;

/// Interaction time maximizing the excitation probability over (lo, hi]:
/// a uniform grid of `resolution` points followed by golden-section
/// refinement on the bracket around the best grid point. Ties on the grid go
/// to the smaller τ.
pub fn optimal_tau(ens: &WeightedEnsemble, gamma: f64, bounds: SearchBounds, resolution: usize) -> Result<f64> {
    bounds.check()?;
    if resolution == 0 {
        return Err(Error::param("resolution", "must be at least 1"));
    }
    let f = |tau: f64| excite_prob(ens, gamma, tau);
    let h = (bounds.hi - bounds.lo) / resolution as f64;
    let grid = |k: usize| bounds.lo + h * k as f64;
    let values: Vec<f64> = (1..=resolution).map(|k| f(grid(k))).collect();
    let mut best: Option<(f64, f64)> = None;
    for k in 1..=resolution {
        let v = values[k - 1];
        let left = if k > 1 { values[k - 2] } else { f64::NEG_INFINITY };
        let right = values.get(k).copied().unwrap_or(f64::NEG_INFINITY);
        if v < left || v < right {
            continue;
        }
        // Refine every local grid maximum; separate peaks can be equally
        // high and the grid alone cannot rank them.
        let a = grid(k - 1);
        let b = grid((k + 1).min(resolution));
        let (t, tv) = golden_section_max(f, a, b, h * 1e-9);
        let (t, tv) = if tv > v && t > bounds.lo { (t, tv) } else { (grid(k), v) };
        // Maxima equal up to rounding keep the earlier, shorter τ.
        if best.is_none_or(|(_, bv)| tv > bv + TIE_TOL) {
            best = Some((t, tv));
        }
    }
    Ok(best.expect("grid has a maximum").0)
}

/// Golden-section search for a maximum of a unimodal `f` on [a, b].
fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Below π/(γ√n_max) no branch with at most n_max photons is trapped.
pub fn trapping_safe_tau(n_max: usize, gamma: f64) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    Ok(PI / (gamma * (n_max as f64).sqrt()))
}

/// How each atom's interaction time is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum TauPolicy {
    Fixed(f64),
    /// Re-optimized after every measurement.
    OptimalEachStep {
        bounds: SearchBounds,
        resolution: usize,
    },
    /// Half a Rabi period for a known photon number n: π/(2√(n-m)γ).
    HalfRabi {
        n: usize,
    },
    /// τ ~ Normal(center, sigma), resampled until positive.
    Jittered {
        center: f64,
        sigma: f64,
    },
}

impl TauPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TauPolicy::Fixed(tau) if !(tau > 0.0 && tau.is_finite()) => Err(Error::param("tau", "must be positive")),
            TauPolicy::OptimalEachStep { bounds, resolution } => {
                bounds.check()?;
                if resolution == 0 {
                    return Err(Error::param("resolution", "must be at least 1"));
                }
                Ok(())
            }
            TauPolicy::HalfRabi { n: 0 } => Err(Error::param("n", "must be at least 1")),
            TauPolicy::Jittered { center, sigma } => {
                if !(center > 0.0 && center.is_finite()) {
                    return Err(Error::param("tau", "must be positive"));
                }
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::param("sigma", "must be non-negative"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Interaction time for the next atom.
    pub fn choose<R: Rng + ?Sized>(&self, ens: &WeightedEnsemble, gamma: f64, rng: &mut R) -> Result<f64> {
        match *self {
            TauPolicy::Fixed(tau) => Ok(tau),
            TauPolicy::OptimalEachStep { bounds, resolution } => optimal_tau(ens, gamma, bounds, resolution),
            TauPolicy::HalfRabi { n } => {
                let m = ens.transferred();
                if m >= n {
                    return Err(Error::param("n", format!("all {n} photons already transferred")));
                }
                Ok(PI / (2.0 * ((n - m) as f64).sqrt() * gamma))
            }
            TauPolicy::Jittered { center, sigma } => sample_positive_normal(center, sigma, rng),
        }
    }
}

/// Draws from Normal(mean, sigma) conditioned on a positive result.
pub fn sample_positive_normal<R: Rng + ?Sized>(mean: f64, sigma: f64, rng: &mut R) -> Result<f64> {
    if sigma == 0.0 {
        return Ok(mean);
    }
    let normal = Normal::new(mean, sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    loop {
        let tau = normal.sample(rng);
        if tau > 0.0 {
            return Ok(tau);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub outcome: MeasurementOutcome,
    pub ensemble: WeightedEnsemble,
    pub tau: f64,
    /// Excitation probability before the measurement.
    pub p_excite: f64,
}

/// Sends one ground-state atom through the cavity and measures it.
pub fn step<R: Rng + ?Sized>(ens: &WeightedEnsemble, policy: &TauPolicy, gamma: f64, rng: &mut R) -> Result<Step> {
    let tau = policy.choose(ens, gamma, rng)?;
    let p_excite = excite_prob(ens, gamma, tau);
    let outcome = if rng.random::<f64>() < p_excite {
        MeasurementOutcome::Excited
    } else {
        MeasurementOutcome::Ground
    };
    let ensemble = update_weights(ens, gamma, tau, outcome)?;
    Ok(Step {
        outcome,
        ensemble,
        tau,
        p_excite,
    })
}

/// Protocol-level parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    initial: WeightedEnsemble,
    gamma: f64,
    policy: TauPolicy,
    cutoff: usize,
    atom_budget: usize,
    originals: usize,
}

impl RunConfig {
    pub fn new(
        initial: WeightedEnsemble,
        gamma: f64,
        policy: TauPolicy,
        cutoff: usize,
        atom_budget: usize,
        originals: usize,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", "must be positive"));
        }
        policy.validate()?;
        if cutoff == 0 {
            return Err(Error::param("cutoff", "must be at least 1"));
        }
        if atom_budget == 0 {
            return Err(Error::param("atom_budget", "must be at least 1"));
        }
        if originals == 0 {
            return Err(Error::param("n_originals", "must be at least 1"));
        }
        if initial.weights().iter().take(originals).any(|&w| w > 0.0) {
            return Err(Error::param(
                "distribution",
                format!("photon numbers below n_originals = {originals} have weight"),
            ));
        }
        Ok(Self {
            initial,
            gamma,
            policy,
            cutoff,
            atom_budget,
            originals,
        })
    }

    pub fn initial(&self) -> &WeightedEnsemble {
        &self.initial
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn policy(&self) -> &TauPolicy {
        &self.policy
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn atom_budget(&self) -> usize {
        self.atom_budget
    }

    pub fn originals(&self) -> usize {
        self.originals
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub atom_index: usize,
    pub tau: f64,
    pub outcome: MeasurementOutcome,
    pub p_excite_before: f64,
    pub weights_after: Vec<f64>,
    pub transferred_after: usize,
    pub f_atom_after: f64,
    /// `None` while nothing has been transferred.
    pub quality_after: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalReason {
    CutoffReached,
    VacuumCertain,
    AtomBudgetExhausted,
}

impl TerminalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalReason::CutoffReached => "cutoff",
            TerminalReason::VacuumCertain => "vacuum",
            TerminalReason::AtomBudgetExhausted => "budget",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    pub initial: WeightedEnsemble,
    pub originals: usize,
    pub events: Vec<TraceEvent>,
    pub terminal: TerminalReason,
    final_ensemble: WeightedEnsemble,
}

impl ProtocolTrace {
    pub fn final_ensemble(&self) -> &WeightedEnsemble {
        &self.final_ensemble
    }

    pub fn transferred(&self) -> usize {
        self.final_ensemble.transferred()
    }

    pub fn report(&self) -> FidelityReport {
        FidelityReport::new(self.final_ensemble.weights(), self.originals, self.transferred())
            .expect("run config guarantees branches at or above n_originals")
    }

    /// Terminal quality, or `None` when no qubit was transferred.
    pub fn quality(&self) -> Option<f64> {
        self.report().quality
    }

    pub fn excited_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.outcome == MeasurementOutcome::Excited)
            .count()
    }
}

/// Passes atoms until `cutoff` consecutive ground outcomes, vacuum
/// certainty, or the atom budget is spent.
pub fn run<R: Rng + ?Sized>(config: &RunConfig, rng: &mut R) -> ProtocolTrace {
    let mut ens = config.initial.clone();
    let mut events = Vec::new();
    let mut streak = 0;
    let terminal = loop {
        if ens.is_vacuum_certain() {
            break TerminalReason::VacuumCertain;
        }
        if streak >= config.cutoff {
            break TerminalReason::CutoffReached;
        }
        if events.len() >= config.atom_budget {
            break TerminalReason::AtomBudgetExhausted;
        }
        let s = step(&ens, &config.policy, config.gamma, rng)
            .expect("validated config never conditions on an impossible outcome");
        match s.outcome {
            MeasurementOutcome::Ground => streak += 1,
            MeasurementOutcome::Excited => streak = 0,
        }
        let report = FidelityReport::new(s.ensemble.weights(), config.originals, s.ensemble.transferred())
            .expect("run config guarantees branches at or above n_originals");
        events.push(TraceEvent {
            atom_index: events.len(),
            tau: s.tau,
            outcome: s.outcome,
            p_excite_before: s.p_excite,
            weights_after: s.ensemble.weights().to_vec(),
            transferred_after: s.ensemble.transferred(),
            f_atom_after: report.f_atom,
            quality_after: report.quality,
        });
        ens = s.ensemble;
    };
    ProtocolTrace {
        initial: config.initial.clone(),
        originals: config.originals,
        events,
        terminal,
        final_ensemble: ens,
    }
}

/// Independent runs on streams `stream_base .. stream_base + runs` of `seed`,
/// executed in parallel and returned in stream order.
pub fn run_batch(config: &RunConfig, seed: u64, stream_base: u64, runs: usize) -> Vec<ProtocolTrace> {
    (0..runs as u64)
        .into_par_iter()
        .map(|i| run(config, &mut stream_rng(seed, stream_base + i)))
        .collect()
}

/// F_atom of the current ensemble.
pub fn ensemble_fidelity(ens: &WeightedEnsemble, originals: usize) -> Result<f64> {
    atom_fidelity(ens.weights(), originals)
}
