//! End-to-end acceptance checks. Runs every criterion, prints one line per
//! criterion and exits non-zero if any of them fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qubit_transfer::cloning::{binomial_distribution, clone_fidelity};
use qubit_transfer::fockspace::{
    evolve, evolve_atom, interaction_hamiltonian, measure_atom_energy, tilde_state, AtomLevel, CouplingParams,
    FockLabel, FockSpace, JointPureState, Mode, Selector,
};
use qubit_transfer::protocol::{
    excite_prob, optimal_tau, run, run_batch, trapping_safe_tau, update_weights, MeasurementOutcome, RunConfig,
    SearchBounds, TauPolicy, WeightedEnsemble, DEFAULT_RESOLUTION,
};
use qubit_transfer::rng::stream_rng;
use qubit_transfer::symstate::{symmetric_basis_state, SymLabel};
use qubit_transfer::trapping::{mean_atoms_rel, mean_success_prob, monte_carlo_escape, TrapSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Composite Simpson on [a, b] with `panels` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for k in 1..panels {
        s += f(a + h * k as f64) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn rabi_closed_form() -> Outcome {
    let params = CouplingParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for n in 1..=4usize {
        let space = FockSpace::new(1, n).map_err(|e| e.to_string())?;
        let h = interaction_hamiltonian(&space, 0, params).map_err(|e| e.to_string())?;
        for j in 0..=n {
            let psi0 = JointPureState::basis(space.clone(), &[AtomLevel::Ground], FockLabel::new(j, n - j)).unwrap();
            let mut terms = Vec::new();
            if j > 0 {
                terms.push((
                    vec![AtomLevel::Excited0],
                    FockLabel::new(j - 1, n - j),
                    c((j as f64 / n as f64).sqrt(), 0.0),
                ));
            }
            if n > j {
                let a = ((n - j) as f64 / n as f64).sqrt();
                terms.push((vec![AtomLevel::Excited1], FockLabel::new(j, n - j - 1), c(a, 0.0)));
            }
            // (√j|e0; j-1, n-j⟩ + √(n-j)|e1; j, n-j-1⟩)/√n, already unit norm.
            let psi1 = JointPureState::from_terms(space.clone(), &terms).unwrap();
            for _ in 0..20 {
                let t = rng.random_range(0.0..10.0);
                let phase = (n as f64).sqrt() * t;
                let expected = psi0
                    .scaled(c(phase.cos(), 0.0))
                    .add(&psi1.scaled(c(0.0, -phase.sin())))
                    .unwrap();
                let got = evolve(&psi0, &h, t).map_err(|e| e.to_string())?;
                worst = worst.max(got.max_abs_diff(&expected).unwrap());
            }
        }
    }
    ensure(worst < 1e-9, || format!("max amplitude error {worst:e}"))?;
    Ok(format!("max amplitude error {worst:.1e}"))
}

fn deterministic_endpoint() -> Outcome {
    let params = CouplingParams::default();
    let mut worst: f64 = 1.0;
    for n in 1..=4usize {
        let space = FockSpace::new(n, n).map_err(|e| e.to_string())?;
        for j in 0..=n {
            let label = SymLabel::new(j, n).unwrap();
            let mut state = tilde_state(space.clone(), label, 0).map_err(|e| e.to_string())?;
            for k in 0..n {
                let t = PI / (2.0 * ((n - k) as f64).sqrt());
                state = evolve_atom(&state, k, params, t).map_err(|e| e.to_string())?;
            }
            let occupation = state.cavity_occupation();
            ensure(occupation < 1e-9, || {
                format!("n {n} j {j}: cavity occupation {occupation:e}")
            })?;
            let target = symmetric_basis_state(label).unwrap();
            let overlap: Complex64 = target
                .amplitudes()
                .iter()
                .zip(state.qubit_register())
                .map(|(a, b)| a.conj() * b)
                .sum();
            worst = worst.min(overlap.norm_sqr());
        }
    }
    ensure(worst >= 1.0 - 1e-9, || format!("worst fidelity {worst}"))?;
    Ok(format!("worst register fidelity 1 - {:.1e}", 1.0 - worst))
}

fn annihilation_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=5usize {
        for m in 0..n {
            let space = FockSpace::new(m, n).map_err(|e| e.to_string())?;
            for j in 0..=n {
                let state = tilde_state(space.clone(), SymLabel::new(j, n).unwrap(), m).unwrap();
                let nf = n as f64;
                let checks = [
                    (
                        Mode::Zero,
                        j > 0,
                        ((n - m) as f64 * j as f64 / nf).sqrt(),
                        j.wrapping_sub(1),
                    ),
                    (Mode::One, j < n, ((n - m) as f64 * (n - j) as f64 / nf).sqrt(), j),
                ];
                for (mode, possible, coefficient, lowered_j) in checks {
                    let got = state.annihilate(mode);
                    let err = if possible && n > 1 {
                        let target = tilde_state(space.clone(), SymLabel::new(lowered_j, n - 1).unwrap(), m).unwrap();
                        got.max_abs_diff(&target.scaled(c(coefficient, 0.0))).unwrap()
                    } else if possible {
                        // n = 1: the lowered state is the empty cavity.
                        let target = JointPureState::ground_atoms(space.clone(), FockLabel::vacuum()).unwrap();
                        got.max_abs_diff(&target.scaled(c(coefficient, 0.0))).unwrap()
                    } else {
                        got.norm()
                    };
                    worst = worst.max(err);
                    cases += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("{cases} cases, max error {worst:.1e}"))
}

/// Per-branch likelihood of an outcome record, from the full joint dynamics
/// of a cavity holding n photons in a random superposition over j.
fn branch_likelihood(n: usize, taus: &[f64], outcomes: &[MeasurementOutcome], rng: &mut ChaCha8Rng) -> f64 {
    let atoms = taus.len();
    let space: Arc<FockSpace> = FockSpace::new(atoms, n).unwrap();
    let mut terms = Vec::new();
    for j in 0..=n {
        terms.push((
            vec![AtomLevel::Ground; atoms],
            FockLabel::new(j, n - j),
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
        ));
    }
    let mut state = JointPureState::from_terms(space, &terms).unwrap().normalized().unwrap();
    let mut likelihood = 1.0;
    for (k, (&tau, &outcome)) in taus.iter().zip(outcomes).enumerate() {
        state = evolve_atom(&state, k, CouplingParams::default(), tau).unwrap();
        match measure_atom_energy::<ChaCha8Rng>(&state, k, Selector::Force(outcome)) {
            Ok(m) => {
                likelihood *= m.probability;
                state = m.post_state;
            }
            Err(_) => return 0.0,
        }
    }
    likelihood
}

fn posterior_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for sequence in 0..10 {
        let len = 4;
        let taus: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..3.0)).collect();
        let prior: Vec<f64> = (0..=3)
            .map(|n| if n == 0 { 0.0 } else { rng.random_range(0.1..1.0) })
            .collect();
        let mut ens = WeightedEnsemble::from_weights(prior.clone()).unwrap();
        // Draw the outcome record from the protocol's own predictive law.
        let mut outcomes = Vec::new();
        for &tau in &taus {
            if ens.is_vacuum_certain() {
                break;
            }
            let outcome = if rng.random::<f64>() < excite_prob(&ens, 1.0, tau) {
                MeasurementOutcome::Excited
            } else {
                MeasurementOutcome::Ground
            };
            ens = update_weights(&ens, 1.0, tau, outcome).map_err(|e| e.to_string())?;
            outcomes.push(outcome);
        }
        let taus = &taus[..outcomes.len()];
        let total: f64 = prior.iter().sum();
        let joint: Vec<f64> = (0..=3)
            .map(|n| {
                if n == 0 {
                    0.0
                } else {
                    prior[n] / total * branch_likelihood(n, taus, &outcomes, &mut rng)
                }
            })
            .collect();
        let evidence: f64 = joint.iter().sum();
        for (n, &j) in joint.iter().enumerate() {
            let err = (j / evidence - ens.weight(n)).abs();
            worst = worst.max(err);
            ensure(err < 1e-9, || format!("sequence {sequence}, branch {n}: error {err:e}"))?;
        }
    }
    Ok(format!("10 sequences, max posterior error {worst:.1e}"))
}

fn optimal_tau_binomial_six() -> Outcome {
    let ens = WeightedEnsemble::from_weights(binomial_distribution(6).unwrap()).unwrap();
    let tau = optimal_tau(&ens, 1.0, SearchBounds::default_for(1.0), DEFAULT_RESOLUTION).map_err(|e| e.to_string())?;
    ensure((tau - 0.825).abs() <= 0.005, || format!("tau = {tau}"))?;
    Ok(format!("tau = {tau:.5}"))
}

fn trapping_escape() -> Outcome {
    let a = mean_atoms_rel(1, 0.06);
    ensure((7.8..=8.4).contains(&a), || format!("a_mean = {a}"))?;
    let spec = TrapSpec::with_relative_sigma(4, 1, 1.0, 0.06).unwrap();
    let est = monte_carlo_escape(&spec, 100_000, &mut stream_rng(6, 0)).map_err(|e| e.to_string())?;
    let z = (est.mean - a) / est.std_error;
    ensure(z.abs() <= 3.0, || {
        format!("monte carlo {} +- {} vs {a}", est.mean, est.std_error)
    })?;
    let limit = mean_atoms_rel(3, 1.0);
    ensure((limit - 2.0).abs() <= 1e-6, || format!("limit {limit}"))?;
    Ok(format!(
        "a_mean = {a:.4}, monte carlo {:.4} ({z:+.2} SE), limit {limit:.9}",
        est.mean
    ))
}

fn fidelity_formula() -> Outcome {
    let f = clone_fidelity(1, 2).unwrap();
    ensure(f == 5.0 / 6.0, || format!("F(1->2) = {f}"))?;
    for n in 1..=50 {
        for m in n..=50 {
            let f = clone_fidelity(n, m).unwrap();
            ensure(f <= 1.0 && f > 0.5, || format!("F({n}->{m}) = {f}"))?;
            if m > n {
                ensure(f < clone_fidelity(n, m - 1).unwrap(), || {
                    format!("not decreasing in m at ({n},{m})")
                })?;
            }
            if m > n && n > 1 {
                ensure(f > clone_fidelity(n - 1, m).unwrap(), || {
                    format!("not increasing in n at ({n},{m})")
                })?;
            }
        }
        ensure(clone_fidelity(n, n).unwrap() == 1.0, || format!("F({n}->{n}) != 1"))?;
    }
    Ok("F(1->2) = 5/6, grid n, m <= 50 monotone".into())
}

fn quadrature_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [1usize, 4, 9] {
        for k in 0..=40 {
            let gs = 0.01 * (200f64).powf(k as f64 / 40.0);
            for gamma in [1.0, 2.5] {
                let sigma = gs / gamma;
                let w = (n as f64).sqrt() * gamma;
                let tau0 = 2.0 * PI / w;
                let pdf = |t: f64| (-(t - tau0).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt());
                let numeric = simpson(
                    |t| pdf(t) * (w * t).sin().powi(2),
                    tau0 - 14.0 * sigma,
                    tau0 + 14.0 * sigma,
                    40_000,
                );
                let err = (numeric - mean_success_prob(n, sigma, gamma)).abs();
                worst = worst.max(err);
                ensure(err < 1e-9, || format!("n {n}, gamma*sigma {gs}: error {err:e}"))?;
            }
        }
    }
    Ok(format!("max error {worst:.1e}"))
}

fn weights_evolution() -> Outcome {
    let initial = WeightedEnsemble::from_weights(binomial_distribution(6).unwrap()).unwrap();
    let config = RunConfig::new(initial, 1.0, TauPolicy::Fixed(0.825), 20, 100_000, 1).map_err(|e| e.to_string())?;
    let trace = run(&config, &mut stream_rng(7, 0));
    let last = trace.final_ensemble();
    let survivor = last.dominant_branch();
    let mass = last.weight(survivor);
    ensure(mass > 0.999, || format!("dominant branch {survivor} holds only {mass}"))?;
    let mut prev = 0;
    for e in &trace.events {
        let expected = prev + usize::from(e.outcome == MeasurementOutcome::Excited);
        ensure(e.transferred_after == expected, || {
            format!("staircase broken at atom {}", e.atom_index)
        })?;
        prev = e.transferred_after;
    }
    ensure(prev == survivor, || {
        format!("transferred {prev}, surviving branch {survivor}")
    })?;
    let f = trace.events.last().map(|e| e.f_atom_after).unwrap_or(f64::NAN);
    let target = clone_fidelity(1, survivor).unwrap();
    let gap = (f - target).abs();
    ensure(gap < 1e-9, || {
        format!(
            "F_atom {f} vs F(1->{survivor}) {target}: gap {gap:e} (weight left off the survivor {:e})",
            1.0 - mass
        )
    })?;
    Ok(format!(
        "{} atoms, survivor n = {survivor}, F_atom gap {gap:.1e}",
        trace.events.len()
    ))
}

fn quality_cutoff() -> Outcome {
    let weights = binomial_distribution(10).unwrap();
    let initial = WeightedEnsemble::from_weights(weights).unwrap();
    let tau = optimal_tau(&initial, 1.0, SearchBounds::default_for(1.0), DEFAULT_RESOLUTION).unwrap();
    let safe = trapping_safe_tau(10, 1.0).unwrap();
    ensure(tau < safe, || format!("tau {tau} is not below {safe}"))?;
    let stats = |cutoff: usize, base: u64| -> (f64, f64) {
        let config = RunConfig::new(initial.clone(), 1.0, TauPolicy::Fixed(tau), cutoff, 100_000, 1).unwrap();
        let q: Vec<f64> = run_batch(&config, 10, base, 1000)
            .iter()
            .map(|t| t.quality().unwrap_or(0.0))
            .collect();
        let mean = q.iter().sum::<f64>() / q.len() as f64;
        let var = q.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (q.len() - 1) as f64;
        (mean, (var / q.len() as f64).sqrt())
    };
    let (q1, se1) = stats(1, 0);
    let (q30, se30) = stats(30, 1000);
    ensure(q30 >= 0.99, || format!("mean quality at cutoff 30 is {q30}"))?;
    let z = (q30 - q1) / (se1 * se1 + se30 * se30).sqrt();
    ensure(z > 3.0, || format!("difference is only {z} sigma"))?;
    Ok(format!(
        "tau = {tau:.4}, quality {q1:.4} at cutoff 1, {q30:.5} at cutoff 30 ({z:.1} sigma)"
    ))
}

fn total_probability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let top = rng.random_range(1..=12usize);
        let m = rng.random_range(0..top);
        let weights: Vec<f64> = (0..=top)
            .map(|n| if n < m { 0.0 } else { rng.random::<f64>() })
            .collect();
        let Ok(ens) = WeightedEnsemble::with_transferred(weights, m) else {
            continue;
        };
        let gamma = rng.random_range(0.3..2.0);
        let tau = rng.random_range(0.01..4.0);
        let pe = excite_prob(&ens, gamma, tau);
        let mut averaged = vec![0.0; ens.weights().len()];
        for (outcome, p) in [
            (MeasurementOutcome::Excited, pe),
            (MeasurementOutcome::Ground, 1.0 - pe),
        ] {
            if p <= 0.0 {
                continue;
            }
            let post = update_weights(&ens, gamma, tau, outcome).map_err(|e| e.to_string())?;
            for (n, a) in averaged.iter_mut().enumerate() {
                *a += p * post.weight(n);
            }
        }
        for (n, a) in averaged.iter().enumerate() {
            worst = worst.max((a - ens.weight(n)).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("1000 ensembles, max deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 rabi oscillation matches closed form", rabi_closed_form),
        ("2 deterministic scheme endpoint", deterministic_endpoint),
        ("3 annihilation on tilde states", annihilation_closed_forms),
        ("4 posterior weights match joint dynamics", posterior_oracle),
        ("5 optimal tau for binomial(6)", optimal_tau_binomial_six),
        ("6 trapping escape", trapping_escape),
        ("7 cloning fidelity formula", fidelity_formula),
        ("8 gaussian quadrature identity", quadrature_identity),
        ("9 weights evolution run", weights_evolution),
        ("10 quality against cutoff", quality_cutoff),
        ("11 law of total probability", total_probability),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
