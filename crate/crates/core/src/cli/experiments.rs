use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig};
use super::{has_errors, validate, Level};
use crate::cloning::atom_fidelity;
use crate::error::{Error, Result};
use crate::protocol::{run, run_batch, ProtocolTrace, RunConfig, TauPolicy};
use crate::rng::{stream_rng, GENERATOR};
use crate::trapping::{mean_atoms_rel, monte_carlo_escape, TrapSpec};

/// A computed result table plus free-form notes for the metadata block.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

/// Validates, computes and writes the CSV. Returns the path written.
pub fn run_experiment(config: &ExperimentConfig) -> Result<PathBuf> {
    let table = compute(config)?;
    let path = config.output_path();
    write_csv(&path, config, &table)?;
    Ok(path)
}

/// Runs the configured experiment in memory.
pub fn compute(config: &ExperimentConfig) -> Result<Table> {
    let diagnostics = validate(config);
    if has_errors(&diagnostics) {
        let first = diagnostics.iter().find(|d| d.level == Level::Error).unwrap();
        return Err(Error::InvalidParameter {
            name: first.field,
            reason: first.message.clone(),
        });
    }
    let seed = config.seed.expect("validated");
    match config.experiment {
        Experiment::WeightsEvolution => weights_evolution(config, seed),
        Experiment::TrappingCurves => trapping_curves(config, seed),
        Experiment::QualityCutoff => quality_cutoff(config, seed),
        Experiment::Custom => custom(config, seed),
    }
}

fn run_config(config: &ExperimentConfig, n_max: usize, cutoff: usize) -> Result<(RunConfig, TauPolicy)> {
    let initial = config.initial_ensemble(n_max)?;
    let policy = config.tau_policy(&initial)?;
    let rc = RunConfig::new(
        initial,
        config.gamma,
        policy.clone(),
        cutoff,
        config.atom_budget,
        config.n_originals,
    )?;
    Ok((rc, policy))
}

fn describe(policy: &TauPolicy) -> String {
    match policy {
        TauPolicy::Fixed(t) => format!("fixed {t}"),
        TauPolicy::Jittered { center, sigma } => format!("gaussian center {center} sigma {sigma}"),
        TauPolicy::OptimalEachStep { .. } => "re-optimized each step".into(),
        TauPolicy::HalfRabi { n } => format!("half Rabi period for {n} photons"),
    }
}

fn weights_evolution(config: &ExperimentConfig, seed: u64) -> Result<Table> {
    let n_max = config.n_max[0];
    let (rc, policy) = run_config(config, n_max, config.cutoff)?;
    let trace = run(&rc, &mut stream_rng(seed, 0));
    let top = rc.initial().max_photons();
    let lowest = config.n_originals;

    let mut rows = Vec::new();
    let mut push_step = |step: usize, weights: &[f64], transferred: usize| -> Result<()> {
        let f = atom_fidelity(weights, config.n_originals)?;
        for n in lowest..=top {
            let p = weights.get(n).copied().unwrap_or(0.0);
            rows.push(vec![
                step.to_string(),
                n.to_string(),
                p.to_string(),
                f.to_string(),
                transferred.to_string(),
            ]);
        }
        Ok(())
    };
    push_step(0, rc.initial().weights(), 0)?;
    for (k, e) in trace.events.iter().enumerate() {
        push_step(k + 1, &e.weights_after, e.transferred_after)?;
    }
    let outcomes: String = trace
        .events
        .iter()
        .map(|e| {
            if e.outcome == crate::protocol::MeasurementOutcome::Excited {
                'e'
            } else {
                'g'
            }
        })
        .collect();
    Ok(Table {
        header: vec!["step", "n", "p_n", "F_atom", "transferred"],
        rows,
        notes: vec![
            format!("tau: {}", describe(&policy)),
            format!("outcomes: {outcomes}"),
            format!("terminal: {}", trace.terminal.as_str()),
        ],
    })
}

fn trapping_curves(config: &ExperimentConfig, seed: u64) -> Result<Table> {
    let points: Vec<(usize, f64)> = config
        .m_rabi
        .iter()
        .flat_map(|&m| config.sigma_rel.iter().map(move |&s| (m, s)))
        .collect();
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(i, &(m, s))| {
            let spec = TrapSpec::with_relative_sigma(config.trap_n, m, config.gamma, s)?;
            let est = monte_carlo_escape(&spec, config.trials, &mut stream_rng(seed, i as u64))?;
            Ok(vec![
                m.to_string(),
                s.to_string(),
                mean_atoms_rel(m, s).to_string(),
                est.mean.to_string(),
                est.std_error.to_string(),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        header: vec!["m_rabi", "sigma_rel", "a_mean_closed", "a_mean_mc", "mc_stderr"],
        rows,
        notes: vec![format!(
            "monte carlo: {} trials per point, n = {}",
            config.trials, config.trap_n
        )],
    })
}

/// Terminal quality of one run. A run that transferred nothing delivers no
/// clones and scores 0.
pub fn run_quality(trace: &ProtocolTrace) -> f64 {
    trace.quality().unwrap_or(0.0)
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn quality_cutoff(config: &ExperimentConfig, seed: u64) -> Result<Table> {
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    let per_nmax = config.cutoffs.len() * config.runs;
    for (ni, &n_max) in config.n_max.iter().enumerate() {
        for (ci, &cutoff) in config.cutoffs.iter().enumerate() {
            let (rc, policy) = run_config(config, n_max, cutoff)?;
            if ci == 0 {
                notes.push(format!("tau[n_max {n_max}]: {}", describe(&policy)));
            }
            // Stream layout: (n_max index, cutoff index, run index) flattened.
            let base = (ni * per_nmax + ci * config.runs) as u64;
            let qualities: Vec<f64> = run_batch(&rc, seed, base, config.runs)
                .iter()
                .map(run_quality)
                .collect();
            let (mean, se) = mean_and_stderr(&qualities);
            rows.push(vec![
                cutoff.to_string(),
                mean.to_string(),
                se.to_string(),
                n_max.to_string(),
            ]);
        }
    }
    notes.push("runs that transfer no qubit count as quality 0".into());
    Ok(Table {
        header: vec!["cutoff", "mean_quality", "stderr", "n_max"],
        rows,
        notes,
    })
}

fn custom(config: &ExperimentConfig, seed: u64) -> Result<Table> {
    let (rc, policy) = run_config(config, config.n_max[0], config.cutoff)?;
    let rows = run_batch(&rc, seed, 0, config.runs)
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let report = t.report();
            vec![
                i.to_string(),
                t.events.len().to_string(),
                t.transferred().to_string(),
                t.terminal.as_str().to_string(),
                report.f_atom.to_string(),
                report.quality.map_or_else(String::new, |q| q.to_string()),
            ]
        })
        .collect();
    Ok(Table {
        header: vec!["run", "atoms", "transferred", "terminal", "F_atom", "quality"],
        rows,
        notes: vec![format!("tau: {}", describe(&policy))],
    })
}

/// Writes the metadata block (tool version, generator, config echo, notes)
/// followed by the CSV table.
pub fn write_csv(path: &Path, config: &ExperimentConfig, table: &Table) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io(format!("cannot write {}: {e}", path.display()));
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# tool: {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")).map_err(io_err)?;
    writeln!(out, "# rng: {GENERATOR}").map_err(io_err)?;
    for (k, v) in config.to_pairs() {
        writeln!(out, "# config: {k} = {v}").map_err(io_err)?;
    }
    for note in &table.notes {
        writeln!(out, "# note: {note}").map_err(io_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(format!("cannot write {}: {e}", path.display()));
    w.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}
