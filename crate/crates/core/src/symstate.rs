//! Symmetric n-qubit states |S(j, n-j)⟩ and their subset decomposition.
//!
//! Two storage modes are supported. Exhaustive mode keeps all 2^n amplitudes
//! over the computational basis and exists for cross-checks at small n.
//! Compact (Dicke) mode keeps the n+1 coefficients over the symmetric basis.
//!
//! Computational basis convention: qubit `q` (0-based) is bit `n-1-q` of the
//! basis index, and a cleared bit is |0⟩. So index 0 is |00…0⟩ and qubit 0 is
//! the leftmost factor of the tensor product.
//!
//! All symmetric basis states carry real, non-negative amplitudes.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest qubit count for which exhaustive (2^n) vectors are built.
pub const MAX_EXHAUSTIVE_QUBITS: usize = 12;

const NORM_TOL: f64 = 1e-12;

/// Exact binomial coefficient C(a, b), zero when `b < 0` or `b > a`.
pub fn binom(a: u64, b: i64) -> Result<u64> {
    if b < 0 || b as u64 > a {
        return Ok(0);
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc: u128 = 1;
    for i in 0..b {
        // acc * (a - i) / (i + 1) is C(a, i + 1) and therefore an integer.
        acc = acc * u128::from(a - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::BinomialOverflow(a, b as i64));
        }
    }
    Ok(acc as u64)
}

/// `binom` for arguments already known to be in range.
pub(crate) fn binom_usize(a: usize, b: usize) -> u64 {
    binom(a as u64, b as i64).expect("binomial within 64-bit range")
}

/// Label of the symmetric state with `j` qubits in |0⟩ out of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymLabel {
    j: usize,
    n: usize,
}

impl SymLabel {
    pub fn new(j: usize, n: usize) -> Result<Self> {
        if n == 0 || j > n {
            return Err(Error::InvalidLabel { j, n });
        }
        Ok(Self { j, n })
    }

    /// Number of qubits in |0⟩.
    pub fn zeros(&self) -> usize {
        self.j
    }

    /// Number of qubits in |1⟩.
    pub fn ones(&self) -> usize {
        self.n - self.j
    }

    pub fn qubits(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// 2^n amplitudes over the computational basis.
    Exhaustive,
    /// n+1 amplitudes over the symmetric basis, indexed by j.
    Dicke,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricStateVector {
    n: usize,
    mode: Mode,
    amplitudes: Vec<Complex64>,
}

impl SymmetricStateVector {
    /// Compact state from coefficients over |S(j, n-j)⟩, j = 0..=n.
    pub fn from_dicke(n: usize, coefficients: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if coefficients.len() != n + 1 {
            return Err(Error::Dimension {
                expected: n + 1,
                found: coefficients.len(),
            });
        }
        let state = Self {
            n,
            mode: Mode::Dicke,
            amplitudes: coefficients,
        };
        state.check_normalized()?;
        Ok(state)
    }

    /// Compact basis state |S(j, n-j)⟩.
    pub fn dicke(label: SymLabel) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); label.n + 1];
        amplitudes[label.j] = Complex64::new(1.0, 0.0);
        Self {
            n: label.n,
            mode: Mode::Dicke,
            amplitudes,
        }
    }

    /// Exhaustive state from 2^n amplitudes. Rejects vectors that are not
    /// normalized or not symmetric under qubit exchange.
    pub fn from_exhaustive(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_capacity(n)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::Dimension {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        let state = Self {
            n,
            mode: Mode::Exhaustive,
            amplitudes,
        };
        state.check_normalized()?;
        if !state.is_exchange_symmetric(NORM_TOL) {
            return Err(Error::param("amplitudes", "not symmetric under qubit exchange"));
        }
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::param("amplitudes", format!("norm {norm} is not 1")));
        }
        Ok(())
    }

    /// Expands a compact state into the computational basis.
    pub fn to_exhaustive(&self) -> Result<Self> {
        match self.mode {
            Mode::Exhaustive => Ok(self.clone()),
            Mode::Dicke => {
                check_capacity(self.n)?;
                let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << self.n];
                for (idx, amp) in amplitudes.iter_mut().enumerate() {
                    let j = zeros_in(idx, self.n);
                    let weight = (binom_usize(self.n, j) as f64).sqrt();
                    *amp = self.amplitudes[j] / weight;
                }
                Ok(Self {
                    n: self.n,
                    mode: Mode::Exhaustive,
                    amplitudes,
                })
            }
        }
    }

    /// Exchanges qubit slots `a` and `b`. The Dicke representation is
    /// invariant by construction and is returned unchanged.
    pub fn swap_qubits(&self, a: usize, b: usize) -> Self {
        assert!(a < self.n && b < self.n, "qubit index out of range");
        if self.mode == Mode::Dicke || a == b {
            return self.clone();
        }
        let (ba, bb) = (self.n - 1 - a, self.n - 1 - b);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let (xa, xb) = ((idx >> ba) & 1, (idx >> bb) & 1);
            let swapped = if xa == xb { idx } else { idx ^ (1 << ba) ^ (1 << bb) };
            out[swapped] = *amp;
        }
        Self {
            n: self.n,
            mode: self.mode,
            amplitudes: out,
        }
    }

    /// True if every transposition of qubit slots leaves the amplitudes
    /// unchanged within `tol`.
    pub fn is_exchange_symmetric(&self, tol: f64) -> bool {
        if self.mode == Mode::Dicke {
            return true;
        }
        // Adjacent transpositions generate the symmetric group.
        (0..self.n.saturating_sub(1)).all(|q| {
            let swapped = self.swap_qubits(q, q + 1);
            swapped
                .amplitudes
                .iter()
                .zip(&self.amplitudes)
                .all(|(x, y)| (x - y).norm() <= tol)
        })
    }

    /// ⟨self|other⟩. Both states must share mode and qubit count.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.n != other.n || self.mode != other.mode {
            return Err(Error::Dimension {
                expected: self.amplitudes.len(),
                found: other.amplitudes.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Tensor product `self ⊗ other` of two exhaustive vectors, with `self`
    /// occupying the leading qubit slots.
    pub fn tensor(&self, other: &Self) -> Result<Vec<Complex64>> {
        if self.mode != Mode::Exhaustive || other.mode != Mode::Exhaustive {
            return Err(Error::param("mode", "tensor product needs exhaustive vectors"));
        }
        check_capacity(self.n + other.n)?;
        let mut out = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            out.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(out)
    }
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_QUBITS {
        return Err(Error::Capacity {
            n,
            max: MAX_EXHAUSTIVE_QUBITS,
        });
    }
    Ok(())
}

/// Number of |0⟩ qubits in computational basis index `idx` of an n-qubit register.
pub fn zeros_in(idx: usize, n: usize) -> usize {
    n - idx.count_ones() as usize
}

/// |S(j, n-j)⟩ over the computational basis: every string with `j` zeros has
/// amplitude 1/sqrt(C(n, j)).
pub fn symmetric_basis_state(label: SymLabel) -> Result<SymmetricStateVector> {
    check_capacity(label.n)?;
    SymmetricStateVector::dicke(label).to_exhaustive()
}

/// One term of the split of |S(j, n-j)⟩ over qubits 1..m and m+1..n.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTerm {
    /// Number of |0⟩ qubits in the first subset.
    pub k: usize,
    pub coefficient: f64,
    pub left: SymLabel,
    pub right: SymLabel,
}

/// Writes |S(j, n-j)⟩ as Σ_k c_k |S(k, m-k)⟩ ⊗ |S(j-k, (n-m)-(j-k))⟩ with
/// c_k = sqrt(C(m,k) C(n-m,j-k) / C(n,j)). Vanishing terms are omitted.
pub fn decompose(label: SymLabel, m: usize) -> Result<Vec<DecompositionTerm>> {
    let (j, n) = (label.j, label.n);
    if m == 0 || m >= n {
        return Err(Error::InvalidSubset { m, n });
    }
    let total = binom(n as u64, j as i64)?;
    let mut terms = Vec::new();
    for k in 0..=m.min(j) {
        let rest = binom((n - m) as u64, (j - k) as i64)?;
        if rest == 0 {
            continue;
        }
        let left = binom(m as u64, k as i64)?;
        // Integer product first; only the final ratio goes to floating point.
        let numerator = u128::from(left) * u128::from(rest);
        let coefficient = (numerator as f64 / total as f64).sqrt();
        terms.push(DecompositionTerm {
            k,
            coefficient,
            left: SymLabel { j: k, n: m },
            right: SymLabel { j: j - k, n: n - m },
        });
    }
    Ok(terms)
}

/// Re-assembles decomposition terms into an exhaustive n-qubit vector.
pub fn recombine(terms: &[DecompositionTerm]) -> Result<Vec<Complex64>> {
    let first = terms
        .first()
        .ok_or_else(|| Error::param("terms", "empty decomposition"))?;
    let n = first.left.n + first.right.n;
    check_capacity(n)?;
    let mut out = vec![Complex64::new(0.0, 0.0); 1 << n];
    for term in terms {
        let left = symmetric_basis_state(term.left)?;
        let right = symmetric_basis_state(term.right)?;
        for (o, v) in out.iter_mut().zip(left.tensor(&right)?) {
            *o += v * term.coefficient;
        }
    }
    Ok(out)
}
