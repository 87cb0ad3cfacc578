//! Exact joint dynamics of a two-mode cavity and a register of V-configuration
//! atoms.
//!
//! The basis is the product of atomic levels {g, e0, e1} per atom and cavity
//! Fock labels |n0, n1⟩, restricted to total excitation number
//! N = (# excited atoms) + n0 + n1 ≤ n_max. The interaction Hamiltonian
//! conserves N, so this truncation is exact: the space is closed under H.
//!
//! Flat index order: atom configurations in base-3 order (atom 0 most
//! significant, g < e0 < e1), then n0 ascending, then n1 ascending, with
//! configurations above the excitation bound skipped.
//!
//! Units: ħ = 1, so H has units of γ and times are in units of 1/γ when γ = 1.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::protocol::MeasurementOutcome;
use crate::symstate::SymLabel;

const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomLevel {
    Ground,
    Excited0,
    Excited1,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; 3] = [AtomLevel::Ground, AtomLevel::Excited0, AtomLevel::Excited1];

    fn code(self) -> u32 {
        match self {
            AtomLevel::Ground => 0,
            AtomLevel::Excited0 => 1,
            AtomLevel::Excited1 => 2,
        }
    }

    fn from_code(code: u32) -> Self {
        Self::ALL[code as usize]
    }

    pub fn is_excited(self) -> bool {
        self != AtomLevel::Ground
    }

    /// The excited level coupled to cavity `mode`.
    pub fn excited(mode: Mode) -> Self {
        match mode {
            Mode::Zero => AtomLevel::Excited0,
            Mode::One => AtomLevel::Excited1,
        }
    }
}

/// Cavity polarization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockLabel {
    pub n0: usize,
    pub n1: usize,
}

impl FockLabel {
    pub fn new(n0: usize, n1: usize) -> Self {
        Self { n0, n1 }
    }

    pub fn photons(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn vacuum() -> Self {
        Self { n0: 0, n1: 0 }
    }
}

/// Equal coupling γ for both transitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    gamma: f64,
}

impl CouplingParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", "must be positive and finite"));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self { gamma: 1.0 }
    }
}

/// Truncated product basis with its index map.
#[derive(Debug, Clone)]
pub struct FockSpace {
    atom_count: usize,
    n_max: usize,
    basis: Vec<(u32, FockLabel)>,
    index: HashMap<(u32, FockLabel), usize>,
}

impl FockSpace {
    pub fn new(atom_count: usize, n_max: usize) -> Result<Arc<Self>> {
        if atom_count > 12 {
            return Err(Error::Capacity { n: atom_count, max: 12 });
        }
        let configs = 3u32.pow(atom_count as u32);
        let mut basis = Vec::new();
        for code in 0..configs {
            let excited = excited_count(code, atom_count);
            if excited > n_max {
                continue;
            }
            let budget = n_max - excited;
            for n0 in 0..=budget {
                for n1 in 0..=budget - n0 {
                    basis.push((code, FockLabel { n0, n1 }));
                }
            }
        }
        let index = basis.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        Ok(Arc::new(Self {
            atom_count,
            n_max,
            basis,
            index,
        }))
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Flat index of a basis state, if it lies inside the truncated space.
    pub fn index_of(&self, atoms: &[AtomLevel], fock: FockLabel) -> Option<usize> {
        if atoms.len() != self.atom_count {
            return None;
        }
        self.index.get(&(encode(atoms), fock)).copied()
    }

    /// Basis state at flat index `i`.
    pub fn state_at(&self, i: usize) -> (Vec<AtomLevel>, FockLabel) {
        let (code, fock) = self.basis[i];
        (decode(code, self.atom_count), fock)
    }

    pub fn level_at(&self, i: usize, atom: usize) -> AtomLevel {
        level_of(self.basis[i].0, atom, self.atom_count)
    }

    pub fn fock_at(&self, i: usize) -> FockLabel {
        self.basis[i].1
    }

    /// Total excitation number of basis state `i`.
    pub fn excitation_at(&self, i: usize) -> usize {
        let (code, fock) = self.basis[i];
        excited_count(code, self.atom_count) + fock.photons()
    }

    fn lookup(&self, code: u32, fock: FockLabel) -> Option<usize> {
        self.index.get(&(code, fock)).copied()
    }

    fn check_atom(&self, atom: usize) -> Result<()> {
        if atom >= self.atom_count {
            return Err(Error::AtomIndex {
                index: atom,
                count: self.atom_count,
            });
        }
        Ok(())
    }
}

fn encode(atoms: &[AtomLevel]) -> u32 {
    atoms.iter().fold(0, |acc, l| acc * 3 + l.code())
}

fn decode(code: u32, atom_count: usize) -> Vec<AtomLevel> {
    (0..atom_count).map(|a| level_of(code, a, atom_count)).collect()
}

fn place(atom: usize, atom_count: usize) -> u32 {
    3u32.pow((atom_count - 1 - atom) as u32)
}

fn level_of(code: u32, atom: usize, atom_count: usize) -> AtomLevel {
    AtomLevel::from_code((code / place(atom, atom_count)) % 3)
}

fn with_level(code: u32, atom: usize, atom_count: usize, level: AtomLevel) -> u32 {
    let p = place(atom, atom_count);
    let old = (code / p) % 3;
    code - old * p + level.code() * p
}

fn excited_count(code: u32, atom_count: usize) -> usize {
    (0..atom_count)
        .filter(|&a| level_of(code, a, atom_count).is_excited())
        .count()
}

/// Pure state of cavity plus atoms. Results of non-unitary maps such as
/// [`JointPureState::annihilate`] are left unnormalized.
#[derive(Debug, Clone)]
pub struct JointPureState {
    space: Arc<FockSpace>,
    amplitudes: DVector<Complex64>,
}

impl JointPureState {
    /// Normalized state from a full amplitude vector.
    pub fn from_amplitudes(space: Arc<FockSpace>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::Dimension {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        let state = Self {
            space,
            amplitudes: DVector::from_vec(amplitudes),
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::param("amplitudes", format!("norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Superposition of basis states, normalized.
    pub fn from_terms(space: Arc<FockSpace>, terms: &[(Vec<AtomLevel>, FockLabel, Complex64)]) -> Result<Self> {
        let mut amplitudes = DVector::zeros(space.dim());
        for (atoms, fock, amp) in terms {
            let i = space.index_of(atoms, *fock).ok_or(Error::OutsideSpace)?;
            amplitudes[i] += amp;
        }
        let state = Self { space, amplitudes };
        state.normalized()
    }

    pub fn basis(space: Arc<FockSpace>, atoms: &[AtomLevel], fock: FockLabel) -> Result<Self> {
        let i = space.index_of(atoms, fock).ok_or(Error::OutsideSpace)?;
        let mut amplitudes = DVector::zeros(space.dim());
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { space, amplitudes })
    }

    /// All atoms in g and the cavity in `fock`.
    pub fn ground_atoms(space: Arc<FockSpace>, fock: FockLabel) -> Result<Self> {
        let atoms = vec![AtomLevel::Ground; space.atom_count()];
        Self::basis(space, &atoms, fock)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, atoms: &[AtomLevel], fock: FockLabel) -> Complex64 {
        self.space
            .index_of(atoms, fock)
            .map_or(Complex64::new(0.0, 0.0), |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroProbability);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            amplitudes: &self.amplitudes * factor,
        }
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.space, &other.space) && self.space.basis != other.space.basis {
            return Err(Error::Dimension {
                expected: self.space.dim(),
                found: other.space.dim(),
            });
        }
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.same_space(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest componentwise amplitude difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_space(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    /// Probability of each total excitation number N = 0..=n_max.
    pub fn excitation_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.space.n_max() + 1];
        for (i, a) in self.amplitudes.iter().enumerate() {
            dist[self.space.excitation_at(i)] += a.norm_sqr();
        }
        dist
    }

    /// Cavity annihilation operator a₀ or a₁ (unnormalized result).
    pub fn annihilate(&self, mode: Mode) -> Self {
        let space = &self.space;
        let mut out = DVector::zeros(space.dim());
        for (i, &(code, fock)) in space.basis.iter().enumerate() {
            let raised = match mode {
                Mode::Zero => FockLabel::new(fock.n0 + 1, fock.n1),
                Mode::One => FockLabel::new(fock.n0, fock.n1 + 1),
            };
            let count = match mode {
                Mode::Zero => raised.n0,
                Mode::One => raised.n1,
            };
            if let Some(j) = space.lookup(code, raised) {
                out[i] = self.amplitudes[j] * (count as f64).sqrt();
            }
        }
        Self {
            space: space.clone(),
            amplitudes: out,
        }
    }

    /// Applies (|e0⟩⟨g| a₀ + |e1⟩⟨g| a₁) to `atom`: the photon-absorbing half
    /// of the interaction, without the factor γ. Unnormalized.
    pub fn absorb(&self, atom: usize) -> Result<Self> {
        let space = &self.space;
        space.check_atom(atom)?;
        let n = space.atom_count();
        let mut out = DVector::zeros(space.dim());
        for (i, &(code, fock)) in space.basis.iter().enumerate() {
            if level_of(code, atom, n) != AtomLevel::Ground {
                continue;
            }
            let amp = self.amplitudes[i];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            if fock.n0 > 0 {
                let target = with_level(code, atom, n, AtomLevel::Excited0);
                let t = space
                    .lookup(target, FockLabel::new(fock.n0 - 1, fock.n1))
                    .expect("absorption conserves excitation number");
                out[t] += amp * (fock.n0 as f64).sqrt();
            }
            if fock.n1 > 0 {
                let target = with_level(code, atom, n, AtomLevel::Excited1);
                let t = space
                    .lookup(target, FockLabel::new(fock.n0, fock.n1 - 1))
                    .expect("absorption conserves excitation number");
                out[t] += amp * (fock.n1 as f64).sqrt();
            }
        }
        Ok(Self {
            space: space.clone(),
            amplitudes: out,
        })
    }

    /// Amplitudes of the 2^atoms qubit register for the component where the
    /// cavity is empty and every atom is excited (e0 ↦ |0⟩, e1 ↦ |1⟩). Uses
    /// the computational-basis ordering of `symstate`.
    pub fn qubit_register(&self) -> Vec<Complex64> {
        let n = self.space.atom_count();
        let mut out = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (i, &(code, fock)) in self.space.basis.iter().enumerate() {
            if fock != FockLabel::vacuum() {
                continue;
            }
            let levels = decode(code, n);
            if levels.iter().any(|l| !l.is_excited()) {
                continue;
            }
            let idx = levels
                .iter()
                .fold(0usize, |acc, l| (acc << 1) | usize::from(*l == AtomLevel::Excited1));
            out[idx] = self.amplitudes[i];
        }
        out
    }

    /// Total probability that the cavity holds at least one photon.
    pub fn cavity_occupation(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.space.fock_at(*i).photons() > 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Physical state of cavity plus the first `carriers` atoms representing
/// |S(j, n-j)⟩ with `carriers` qubits on atoms:
/// Π_{k=1}^{carriers} (|0⟩^{A_k} a₀ + |1⟩^{A_k} a₁)/sqrt(n-(k-1)) |j, n-j⟩.
/// Remaining atoms stay in g.
pub fn tilde_state(space: Arc<FockSpace>, label: SymLabel, carriers: usize) -> Result<JointPureState> {
    let n = label.qubits();
    if carriers > n {
        return Err(Error::param("carriers", format!("{carriers} exceeds {n} qubits")));
    }
    if carriers > space.atom_count() {
        return Err(Error::AtomIndex {
            index: carriers,
            count: space.atom_count(),
        });
    }
    let mut state = JointPureState::ground_atoms(space, FockLabel::new(label.zeros(), label.ones()))?;
    for k in 0..carriers {
        let scale = 1.0 / ((n - k) as f64).sqrt();
        state = state.absorb(k)?.scaled(Complex64::new(scale, 0.0));
    }
    Ok(state)
}

/// H = γ(a₀|e0⟩⟨g| + a₁|e1⟩⟨g| + h.c.) acting on `atom` and the cavity, as
/// a dense real symmetric matrix over the flat index of `space`.
pub fn interaction_hamiltonian(space: &FockSpace, atom: usize, params: CouplingParams) -> Result<DMatrix<f64>> {
    space.check_atom(atom)?;
    let n = space.atom_count();
    let gamma = params.gamma();
    let mut h = DMatrix::zeros(space.dim(), space.dim());
    for (i, &(code, fock)) in space.basis.iter().enumerate() {
        if level_of(code, atom, n) != AtomLevel::Ground {
            continue;
        }
        for (mode, count) in [(Mode::Zero, fock.n0), (Mode::One, fock.n1)] {
            if count == 0 {
                continue;
            }
            let lowered = match mode {
                Mode::Zero => FockLabel::new(fock.n0 - 1, fock.n1),
                Mode::One => FockLabel::new(fock.n0, fock.n1 - 1),
            };
            let target = with_level(code, atom, n, AtomLevel::excited(mode));
            let t = space
                .lookup(target, lowered)
                .expect("interaction conserves excitation number");
            let element = gamma * (count as f64).sqrt();
            h[(t, i)] = element;
            h[(i, t)] = element;
        }
    }
    Ok(h)
}

/// Cached eigendecomposition of a real symmetric Hamiltonian, giving
/// e^{-iHt} for any t.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &DMatrix<f64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::Dimension {
                expected: h.nrows(),
                found: h.ncols(),
            });
        }
        let eigen = SymmetricEigen::new(h.clone());
        Ok(Self {
            eigenvalues: eigen.eigenvalues,
            eigenvectors: eigen.eigenvectors.map(|x| Complex64::new(x, 0.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn apply_vec(&self, v: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let mut coeffs = self.eigenvectors.ad_mul(v);
        for (c, lambda) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -lambda * t);
        }
        &self.eigenvectors * coeffs
    }

    /// e^{-iHt} as a dense matrix.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DVector::from_iterator(
            self.dim(),
            self.eigenvalues
                .iter()
                .map(|lambda| Complex64::from_polar(1.0, -lambda * t)),
        );
        let scaled = DMatrix::from_fn(self.dim(), self.dim(), |r, c| self.eigenvectors[(r, c)] * phases[c]);
        scaled * self.eigenvectors.adjoint()
    }

    pub fn apply(&self, state: &JointPureState, t: f64) -> Result<JointPureState> {
        if state.space.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: state.space.dim(),
            });
        }
        Ok(JointPureState {
            space: state.space.clone(),
            amplitudes: self.apply_vec(&state.amplitudes, t),
        })
    }
}

/// e^{-iHt}|ψ⟩ by exact diagonalization of `h`.
pub fn evolve(state: &JointPureState, h: &DMatrix<f64>, t: f64) -> Result<JointPureState> {
    if h.nrows() != state.space.dim() {
        return Err(Error::Dimension {
            expected: state.space.dim(),
            found: h.nrows(),
        });
    }
    Propagator::new(h)?.apply(state, t)
}

/// Evolves under the interaction of a single `atom` with the cavity for time
/// `t`. Equivalent to [`evolve`] with [`interaction_hamiltonian`], but only
/// diagonalizes the atom-plus-cavity block, which keeps multi-atom registers
/// cheap.
pub fn evolve_atom(state: &JointPureState, atom: usize, params: CouplingParams, t: f64) -> Result<JointPureState> {
    let space = &state.space;
    space.check_atom(atom)?;
    let n = space.atom_count();
    // One local block per remaining excitation budget.
    let mut blocks: HashMap<usize, (Arc<FockSpace>, Propagator)> = HashMap::new();
    let mut out = DVector::zeros(space.dim());
    for &(code, fock) in &space.basis {
        if fock != FockLabel::vacuum() || level_of(code, atom, n) != AtomLevel::Ground {
            continue;
        }
        let budget = space.n_max() - excited_count(code, n);
        let (local, prop) = match blocks.entry(budget) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let local = FockSpace::new(1, budget)?;
                let h = interaction_hamiltonian(&local, 0, params)?;
                let prop = Propagator::new(&h)?;
                e.insert((local, prop))
            }
        };
        let global: Vec<usize> = local
            .basis
            .iter()
            .map(|&(lcode, lfock)| {
                let level = AtomLevel::from_code(lcode);
                space
                    .lookup(with_level(code, atom, n, level), lfock)
                    .expect("local block lies inside the space")
            })
            .collect();
        let gathered = DVector::from_iterator(global.len(), global.iter().map(|&g| state.amplitudes[g]));
        let evolved = prop.apply_vec(&gathered, t);
        for (&g, v) in global.iter().zip(evolved.iter()) {
            out[g] = *v;
        }
    }
    Ok(JointPureState {
        space: space.clone(),
        amplitudes: out,
    })
}

/// How [`measure_atom_energy`] picks its branch.
pub enum Selector<'a, R: Rng + ?Sized> {
    Sample(&'a mut R),
    Force(MeasurementOutcome),
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: MeasurementOutcome,
    /// Probability of the realized outcome.
    pub probability: f64,
    pub post_state: JointPureState,
}

/// Projects `atom` onto g (ground) or onto span{e0, e1} (excited). The two
/// excited levels are degenerate and are not distinguished.
pub fn outcome_probability(state: &JointPureState, atom: usize, outcome: MeasurementOutcome) -> Result<f64> {
    state.space.check_atom(atom)?;
    Ok(state
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| matches_outcome(state.space.level_at(*i, atom), outcome))
        .map(|(_, a)| a.norm_sqr())
        .sum::<f64>()
        / state.norm().powi(2))
}

fn matches_outcome(level: AtomLevel, outcome: MeasurementOutcome) -> bool {
    match outcome {
        MeasurementOutcome::Ground => level == AtomLevel::Ground,
        MeasurementOutcome::Excited => level.is_excited(),
    }
}

/// Projector for `outcome` on `atom`, without renormalization.
pub fn project(state: &JointPureState, atom: usize, outcome: MeasurementOutcome) -> Result<JointPureState> {
    state.space.check_atom(atom)?;
    let mut out = state.amplitudes.clone();
    for (i, a) in out.iter_mut().enumerate() {
        if !matches_outcome(state.space.level_at(i, atom), outcome) {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    Ok(JointPureState {
        space: state.space.clone(),
        amplitudes: out,
    })
}

pub fn measure_atom_energy<R: Rng + ?Sized>(
    state: &JointPureState,
    atom: usize,
    selector: Selector<'_, R>,
) -> Result<Measurement> {
    let p_ground = outcome_probability(state, atom, MeasurementOutcome::Ground)?;
    let outcome = match selector {
        Selector::Force(o) => o,
        Selector::Sample(rng) => {
            if rng.random::<f64>() < p_ground {
                MeasurementOutcome::Ground
            } else {
                MeasurementOutcome::Excited
            }
        }
    };
    let probability = match outcome {
        MeasurementOutcome::Ground => p_ground,
        MeasurementOutcome::Excited => 1.0 - p_ground,
    };
    let projected = project(state, atom, outcome)?;
    if projected.norm() == 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok(Measurement {
        outcome,
        probability,
        post_state: projected.normalized()?,
    })
}

/// Reduced density matrix of `atom` in the (g, e0, e1) basis.
pub fn reduced_atom_state(state: &JointPureState, atom: usize) -> Result<Matrix3<Complex64>> {
    let space = &state.space;
    space.check_atom(atom)?;
    let n = space.atom_count();
    let mut rho = Matrix3::<Complex64>::zeros();
    // Pair each basis state with its partners that differ only in `atom`.
    for (i, &(code, fock)) in space.basis.iter().enumerate() {
        let a = level_of(code, atom, n);
        for b in AtomLevel::ALL {
            if let Some(j) = space.lookup(with_level(code, atom, n, b), fock) {
                rho[(a.code() as usize, b.code() as usize)] += state.amplitudes[i] * state.amplitudes[j].conj();
            }
        }
    }
    let trace = rho.trace();
    Ok(rho / trace)
}
