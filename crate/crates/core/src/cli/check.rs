//! Re-reads a CSV produced by this crate and recomputes its closed-form
//! columns from the echoed configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::config::{Experiment, ExperimentConfig};
use crate::cloning::{atom_fidelity, quality};
use crate::error::{Error, Result};
use crate::trapping::mean_atoms_rel;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub experiment: Experiment,
    pub rows: usize,
    /// Number of values recomputed and confirmed.
    pub checked: usize,
}

fn field(row: &csv::StringRecord, header: &csv::StringRecord, name: &str) -> Result<String> {
    let i = header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Check(format!("missing column `{name}`")))?;
    Ok(row.get(i).unwrap_or_default().to_string())
}

fn num(row: &csv::StringRecord, header: &csv::StringRecord, name: &str) -> Result<f64> {
    let s = field(row, header, name)?;
    s.parse()
        .map_err(|_| Error::Check(format!("column `{name}`: cannot parse `{s}`")))
}

fn close(a: f64, b: f64, what: impl FnOnce() -> String) -> Result<()> {
    if (a - b).abs() <= TOL * b.abs().max(1.0) {
        Ok(())
    } else {
        Err(Error::Check(format!("{}: file has {a}, recomputed {b}", what())))
    }
}

pub fn check_csv(path: &Path) -> Result<CheckReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut config = ExperimentConfig::new(Experiment::Custom);
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(setting) = line.strip_prefix("# config: ") {
            config.apply_text(setting)?;
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Check(e.to_string()))?.clone();
    let rows: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Check(e.to_string()))?;

    let checked = match config.experiment {
        Experiment::WeightsEvolution => check_weights(&config, &header, &rows)?,
        Experiment::TrappingCurves => check_trapping(&config, &header, &rows)?,
        Experiment::QualityCutoff => check_quality(&config, &header, &rows)?,
        Experiment::Custom => check_custom(&config, &header, &rows)?,
    };
    Ok(CheckReport {
        experiment: config.experiment,
        rows: rows.len(),
        checked,
    })
}

fn check_weights(config: &ExperimentConfig, header: &csv::StringRecord, rows: &[csv::StringRecord]) -> Result<usize> {
    let mut steps: BTreeMap<usize, (Vec<f64>, f64, usize)> = BTreeMap::new();
    for row in rows {
        let step = num(row, header, "step")? as usize;
        let n = num(row, header, "n")? as usize;
        let entry = steps.entry(step).or_insert_with(|| (Vec::new(), 0.0, 0));
        if entry.0.len() <= n {
            entry.0.resize(n + 1, 0.0);
        }
        entry.0[n] = num(row, header, "p_n")?;
        entry.1 = num(row, header, "F_atom")?;
        entry.2 = num(row, header, "transferred")? as usize;
    }
    let initial = config.initial_ensemble(config.n_max[0])?;
    let mut checked = 0;
    let mut prev_transferred = 0;
    for (step, (weights, f_atom, transferred)) in &steps {
        close(weights.iter().sum(), 1.0, || format!("step {step}: weight sum"))?;
        let f = atom_fidelity(weights, config.n_originals)?;
        close(*f_atom, f, || format!("step {step}: F_atom"))?;
        if *step == 0 {
            for (n, w) in weights.iter().enumerate() {
                close(*w, initial.weight(n), || format!("step 0: p_{n}"))?;
            }
            checked += weights.len();
        } else if *transferred < prev_transferred || *transferred > prev_transferred + 1 {
            return Err(Error::Check(format!("step {step}: transferred jumps to {transferred}")));
        }
        prev_transferred = *transferred;
        checked += 2;
    }
    Ok(checked)
}

fn check_trapping(config: &ExperimentConfig, header: &csv::StringRecord, rows: &[csv::StringRecord]) -> Result<usize> {
    let expected = config.m_rabi.len() * config.sigma_rel.len();
    if rows.len() != expected {
        return Err(Error::Check(format!("{} rows, expected {expected}", rows.len())));
    }
    for row in rows {
        let m = num(row, header, "m_rabi")? as usize;
        let s = num(row, header, "sigma_rel")?;
        close(num(row, header, "a_mean_closed")?, mean_atoms_rel(m, s), || {
            format!("a_mean_closed at m = {m}, sigma_rel = {s}")
        })?;
    }
    Ok(rows.len())
}

fn check_quality(config: &ExperimentConfig, header: &csv::StringRecord, rows: &[csv::StringRecord]) -> Result<usize> {
    let expected = config.n_max.len() * config.cutoffs.len();
    if rows.len() != expected {
        return Err(Error::Check(format!("{} rows, expected {expected}", rows.len())));
    }
    for row in rows {
        let q = num(row, header, "mean_quality")?;
        let se = num(row, header, "stderr")?;
        if !(0.0..=1.0 + TOL).contains(&q) || se.is_sign_negative() {
            return Err(Error::Check(format!("quality {q} +- {se} out of range")));
        }
    }
    Ok(rows.len())
}

fn check_custom(config: &ExperimentConfig, header: &csv::StringRecord, rows: &[csv::StringRecord]) -> Result<usize> {
    let mut checked = 0;
    for row in rows {
        let m = num(row, header, "transferred")? as usize;
        if m == 0 {
            continue;
        }
        let f = num(row, header, "F_atom")?;
        close(num(row, header, "quality")?, quality(f, config.n_originals, m)?, || {
            format!("quality of run {}", field(row, header, "run").unwrap_or_default())
        })?;
        checked += 1;
    }
    Ok(checked)
}
