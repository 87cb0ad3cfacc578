//! Experiment harness: configuration, validation, CSV output and checking.

mod check;
mod config;
mod experiments;

use std::fmt;

pub use check::{check_csv, CheckReport};
pub use config::{Distribution, Experiment, ExperimentConfig, TauSpec, OUT_DIR_ENV};
pub use experiments::{compute, run_experiment, write_csv, Table};

use crate::protocol::trapping_safe_tau;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub level: Level,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.level {
            Level::Warning => "warning",
            Level::Error => "error",
        };
        write!(f, "{level}: {}: {}", self.field, self.message)
    }
}

/// Checks a configuration without running it. An empty list means ok.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut error = |field, message: String| {
        out.push(Diagnostic {
            level: Level::Error,
            field,
            message,
        })
    };

    if !(config.gamma > 0.0 && config.gamma.is_finite()) {
        error("gamma", format!("must be positive, got {}", config.gamma));
    }
    if config.seed.is_none() {
        error(
            "seed",
            format!("required for the stochastic experiment `{}`", config.experiment.name()),
        );
    }
    if config.sigma_rel.is_empty() {
        error("sigma_rel", "no values".into());
    }
    if let Some(s) = config.sigma_rel.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        error("sigma_rel", format!("must be non-negative, got {s}"));
    }

    let protocol_experiment = matches!(
        config.experiment,
        Experiment::WeightsEvolution | Experiment::QualityCutoff | Experiment::Custom
    );
    if config.experiment == Experiment::TrappingCurves {
        if config.sigma_rel.contains(&0.0) {
            error("sigma_rel", "escape needs a positive spread".into());
        }
        if config.m_rabi.is_empty() || config.m_rabi.contains(&0) {
            error("m_rabi", "needs one or more values >= 1".into());
        }
        if config.trap_n == 0 {
            error("trap_n", "must be at least 1".into());
        }
        if config.trials == 0 {
            error("trials", "must be at least 1".into());
        }
    }
    if protocol_experiment {
        if config.n_max.is_empty() || config.n_max.contains(&0) {
            error("n_max", "needs one or more values >= 1".into());
        }
        if config.experiment != Experiment::QualityCutoff && config.n_max.len() > 1 {
            error("n_max", "only quality-cutoff accepts several values".into());
        }
        if config.sigma_rel.len() > 1 {
            error("sigma_rel", "protocol runs take a single value".into());
        }
        let jitter = config.sigma_rel.first().is_some_and(|&s| s > 0.0);
        if jitter && matches!(config.tau, TauSpec::Adaptive | TauSpec::HalfRabi(_)) {
            error("sigma_rel", "jitter applies only to a constant tau".into());
        }
        if config.cutoff == 0 {
            error("cutoff", "must be at least 1".into());
        }
        if config.experiment == Experiment::QualityCutoff && (config.cutoffs.is_empty() || config.cutoffs.contains(&0))
        {
            error("cutoffs", "needs one or more values >= 1".into());
        }
        if config.atom_budget == 0 {
            error("atom_budget", "must be at least 1".into());
        }
        if config.runs == 0 {
            error("runs", "must be at least 1".into());
        }
        if config.n_originals == 0 {
            error("n_originals", "must be at least 1".into());
        }
        if config.resolution == 0 {
            error("resolution", "must be at least 1".into());
        }
        match config.tau {
            TauSpec::Fixed(t) if !(t > 0.0 && t.is_finite()) => error("tau", format!("must be positive, got {t}")),
            TauSpec::HalfRabi(0) => error("tau", "half-rabi needs a photon number >= 1".into()),
            _ => {}
        }
        for &n_max in &config.n_max {
            match config.initial_ensemble(n_max) {
                Err(e) => error("distribution", e.to_string()),
                Ok(ens) => {
                    if ens.weights().iter().take(config.n_originals).any(|&w| w > 0.0) {
                        error(
                            "distribution",
                            format!("photon numbers below n_originals = {} have weight", config.n_originals),
                        );
                    }
                }
            }
        }
    }

    if protocol_experiment {
        if let TauSpec::Fixed(tau) = config.tau {
            for &n_max in &config.n_max {
                let Ok(top) = config.support_max(n_max) else { continue };
                let Ok(bound) = trapping_safe_tau(top.max(1), config.gamma) else {
                    continue;
                };
                if tau >= bound {
                    out.push(Diagnostic {
                        level: Level::Warning,
                        field: "tau",
                        message: format!(
                            "tau = {tau} is not below pi/(gamma*sqrt({top})) = {bound:.6}; \
                             some photon numbers up to {top} can be trapped"
                        ),
                    });
                }
            }
        }
    }
    out
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.level == Level::Error)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(tau: &str, n_max: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Experiment::WeightsEvolution);
        c.set("tau", tau).unwrap();
        c.set("n_max", n_max).unwrap();
        c.set("seed", "1").unwrap();
        c
    }

    #[test]
    fn tau_at_trapping_bound_warns() {
        let d = validate(&fixed(&std::f64::consts::FRAC_PI_2.to_string(), "4"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].level, Level::Warning);
        assert_eq!(d[0].field, "tau");
    }

    #[test]
    fn reference_tau_is_safe() {
        assert!(validate(&fixed("0.825", "6")).is_empty());
    }

    #[test]
    fn negative_sigma_is_an_error() {
        let mut c = fixed("0.825", "6");
        c.sigma_rel = vec![-0.1];
        let d = validate(&c);
        assert!(has_errors(&d));
        assert!(d.iter().any(|x| x.field == "sigma_rel"));
    }

    #[test]
    fn seed_is_mandatory() {
        let c = ExperimentConfig::new(Experiment::TrappingCurves);
        let d = validate(&c);
        assert!(d.iter().any(|x| x.field == "seed" && x.level == Level::Error));
    }

    #[test]
    fn vacuum_branch_rejected() {
        let mut c = fixed("0.5", "3");
        c.set("distribution", "uniform:0").unwrap();
        assert!(validate(&c).iter().any(|x| x.field == "distribution"));
    }
}
