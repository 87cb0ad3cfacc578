//! Fidelity bookkeeping for optimally cloned qubits carried by the atoms.

use crate::error::{Error, Result};
use crate::symstate::binom_usize;

/// Optimal single-copy fidelity of an n → m universal cloner,
/// (nm + n + m) / (m(n + 2)).
pub fn clone_fidelity(originals: usize, clones: usize) -> Result<f64> {
    if originals == 0 || clones < originals {
        return Err(Error::InvalidCloneCount { originals, clones });
    }
    let (n, m) = (originals as f64, clones as f64);
    Ok((n * m + n + m) / (m * (n + 2.0)))
}

/// Fidelity of one atomic qubit when the register holds a mixture of clone
/// counts: Σ_m p_m F_{n→m}. `weights[m]` is the weight of m clones; entries
/// below `originals` must be zero.
pub fn atom_fidelity(weights: &[f64], originals: usize) -> Result<f64> {
    let mut total = 0.0;
    for (clones, &p) in weights.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        total += p * clone_fidelity(originals, clones)?;
    }
    Ok(total)
}

/// Binomial photon-number preset over n = 1..=n_max:
/// p_n = C(n_max - 1, n - 1) / 2^(n_max - 1). Indexed by n (entry 0 is zero).
pub fn binomial_distribution(n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    if n_max > 63 {
        return Err(Error::param("n_max", "binomial preset supports at most 63 photons"));
    }
    let denom = (1u64 << (n_max - 1)) as f64;
    let mut weights = vec![0.0; n_max + 1];
    for (n, w) in weights.iter_mut().enumerate().skip(1) {
        *w = binom_usize(n_max - 1, n - 1) as f64 / denom;
    }
    Ok(weights)
}

/// Uniform preset over n = n_min..=n_max, indexed by n.
pub fn uniform_distribution(n_min: usize, n_max: usize) -> Result<Vec<f64>> {
    if n_min > n_max {
        return Err(Error::param("distribution", format!("empty range {n_min}..{n_max}")));
    }
    let p = 1.0 / (n_max - n_min + 1) as f64;
    let mut weights = vec![0.0; n_max + 1];
    weights[n_min..].iter_mut().for_each(|w| *w = p);
    Ok(weights)
}

/// Achieved fidelity relative to the optimum for the realized clone count.
pub fn quality(f_atom: f64, originals: usize, transferred: usize) -> Result<f64> {
    if transferred == 0 {
        return Err(Error::param(
            "m_transferred",
            "quality is undefined before any transfer",
        ));
    }
    Ok(f_atom / clone_fidelity(originals, transferred)?)
}

/// Snapshot of the clone fidelity at one point of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub f_atom: f64,
    /// `None` while no qubit has been transferred.
    pub quality: Option<f64>,
    pub m_transferred: usize,
    pub weights: Vec<f64>,
}

impl FidelityReport {
    pub fn new(weights: &[f64], originals: usize, transferred: usize) -> Result<Self> {
        let f_atom = atom_fidelity(weights, originals)?;
        let quality = if transferred == 0 {
            None
        } else {
            Some(quality(f_atom, originals, transferred)?)
        };
        Ok(Self {
            f_atom,
            quality,
            m_transferred: transferred,
            weights: weights.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_values() {
        assert_eq!(clone_fidelity(1, 2).unwrap(), 5.0 / 6.0);
        assert_eq!(clone_fidelity(1, 1).unwrap(), 1.0);
        assert!((clone_fidelity(1, 1_000_000).unwrap() - 2.0 / 3.0).abs() < 1e-5);
        assert!(matches!(clone_fidelity(3, 2), Err(Error::InvalidCloneCount { .. })));
        assert!(clone_fidelity(0, 2).is_err());
    }

    #[test]
    fn fidelity_is_monotone() {
        for n in 1..=50 {
            for m in n..50 {
                assert!(clone_fidelity(n, m + 1).unwrap() < clone_fidelity(n, m).unwrap());
            }
        }
        for m in 2..=50 {
            for n in 1..m {
                assert!(clone_fidelity(n + 1, m).unwrap() > clone_fidelity(n, m).unwrap());
            }
        }
    }

    #[test]
    fn one_to_many_bounds() {
        for m in 1..=10_000 {
            let f = clone_fidelity(1, m).unwrap();
            assert!((2.0 / 3.0..=1.0).contains(&f));
        }
    }

    #[test]
    fn mixtures() {
        assert_eq!(atom_fidelity(&[0.0, 0.0, 1.0], 1).unwrap(), 5.0 / 6.0);
        assert!((atom_fidelity(&[0.0, 0.5, 0.5], 1).unwrap() - 11.0 / 12.0).abs() < 1e-15);
        assert!(atom_fidelity(&[0.5, 0.5], 1).is_err());
    }

    #[test]
    fn binomial_preset() {
        let w = binomial_distribution(6).unwrap();
        assert_eq!(w[1], 1.0 / 32.0);
        assert_eq!(w[4], 10.0 / 32.0);
        assert_eq!(w[0], 0.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(binomial_distribution(1).unwrap(), vec![0.0, 1.0]);

        // Mixed register beats the fidelity of the largest clone count.
        let f = atom_fidelity(&w, 1).unwrap();
        assert!(f > clone_fidelity(1, 6).unwrap());
    }

    #[test]
    fn uniform_preset() {
        let w = uniform_distribution(2, 5).unwrap();
        assert_eq!(w, vec![0.0, 0.0, 0.25, 0.25, 0.25, 0.25]);
        assert!(uniform_distribution(3, 2).is_err());
    }

    #[test]
    fn quality_values() {
        let f13 = clone_fidelity(1, 3).unwrap();
        assert_eq!(quality(f13, 1, 3).unwrap(), 1.0);
        assert!((quality(5.0 / 6.0, 1, 3).unwrap() - 15.0 / 14.0).abs() < 1e-15);
        assert!(quality(0.9, 1, 0).is_err());

        let report = FidelityReport::new(&[0.0, 0.5, 0.5], 1, 0).unwrap();
        assert_eq!(report.quality, None);
    }
}
