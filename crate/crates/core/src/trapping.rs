//! Escape from trapping states when the interaction time fluctuates.
//!
//! A cavity with n photons is trapped whenever √nγτ is a multiple of π: the
//! atom leaves in g with certainty. The trapping point used here is
//! τ₀ = 2π·m_rabi/(γ√n), after which the joint atom-cavity state has
//! completed m_rabi full cycles. With τ Gaussian around that point (standard deviation σ) the mean excitation probability is
//! ½(1 - exp(-2nγ²σ²)), and the number of atoms needed to escape is
//! geometric with mean 2/(1 - exp(-2nγ²σ²)). Written in terms of the
//! relative spread σ_rel = σ/τ₀ this becomes 2/(1 - exp(-8π²m_rabi²σ_rel²)),
//! with no dependence on n.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::protocol::sample_positive_normal;

/// A trapping point and the spread of the interaction time around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    /// Photons in the cavity.
    pub n: usize,
    /// Full cycles of the joint state completed at the trapping point.
    pub m_rabi: usize,
    pub gamma: f64,
    /// Absolute standard deviation of τ.
    pub sigma: f64,
}

impl TrapSpec {
    pub fn new(n: usize, m_rabi: usize, gamma: f64, sigma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if m_rabi == 0 {
            return Err(Error::param("m_rabi", "must be at least 1"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", "must be positive"));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::param("sigma", "must be non-negative"));
        }
        Ok(Self {
            n,
            m_rabi,
            gamma,
            sigma,
        })
    }

    /// Builds the spec from a relative spread σ_rel = σ/τ₀.
    pub fn with_relative_sigma(n: usize, m_rabi: usize, gamma: f64, sigma_rel: f64) -> Result<Self> {
        let probe = Self::new(n, m_rabi, gamma, 0.0)?;
        if !(sigma_rel >= 0.0 && sigma_rel.is_finite()) {
            return Err(Error::param("sigma_rel", "must be non-negative"));
        }
        Self::new(n, m_rabi, gamma, sigma_rel * probe.tau0())
    }

    /// Trapping centre τ₀ = 2π·m_rabi/(γ√n).
    pub fn tau0(&self) -> f64 {
        2.0 * PI * self.m_rabi as f64 / (self.gamma * (self.n as f64).sqrt())
    }

    pub fn sigma_rel(&self) -> f64 {
        self.sigma / self.tau0()
    }
}

/// p̄(n, σ) = ½(1 - exp(-2nγ²σ²)).
pub fn mean_success_prob(n: usize, sigma: f64, gamma: f64) -> f64 {
    let x = 2.0 * n as f64 * (gamma * sigma).powi(2);
    // -expm1(-x) = 1 - e^{-x} without cancellation at small spread.
    0.5 * -(-x).exp_m1()
}

/// Mean number of atoms to escape, 1/p̄. Infinite at σ = 0.
pub fn mean_atoms_abs(n: usize, sigma: f64, gamma: f64) -> f64 {
    let p = mean_success_prob(n, sigma, gamma);
    if p == 0.0 {
        f64::INFINITY
    } else {
        1.0 / p
    }
}

/// 2/(1 - exp(-8π²m²σ_rel²)). Infinite at σ_rel = 0.
pub fn mean_atoms_rel(m_rabi: usize, sigma_rel: f64) -> f64 {
    let x = 8.0 * PI * PI * (m_rabi as f64 * sigma_rel).powi(2);
    let p = -(-x).exp_m1();
    if p == 0.0 {
        f64::INFINITY
    } else {
        2.0 / p
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

/// Simulates escapes from the trap: each atom draws its own τ from the
/// positive part of Normal(τ₀, σ) and absorbs with probability sin²(√nγτ).
/// Reports the mean number of atoms up to and including the first
/// absorption.
pub fn monte_carlo_escape<R: Rng + ?Sized>(spec: &TrapSpec, trials: usize, rng: &mut R) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    if spec.sigma <= 0.0 {
        return Err(Error::param("sigma", "escape never happens without spread"));
    }
    let tau0 = spec.tau0();
    let freq = (spec.n as f64).sqrt() * spec.gamma;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..trials {
        let mut atoms = 0u64;
        loop {
            atoms += 1;
            let tau = sample_positive_normal(tau0, spec.sigma, rng)?;
            if rng.random::<f64>() < (freq * tau).sin().powi(2) {
                break;
            }
        }
        let a = atoms as f64;
        sum += a;
        sum_sq += a * a;
    }
    let n = trials as f64;
    let mean = sum / n;
    let std_error = if trials > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0) / n).max(0.0).sqrt()
    } else {
        f64::NAN
    };
    Ok(Estimate {
        mean,
        std_error,
        trials,
    })
}
