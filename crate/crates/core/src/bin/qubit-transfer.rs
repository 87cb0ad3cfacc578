use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use qubit_transfer::cli::{check_csv, has_errors, run_experiment, validate, Experiment, ExperimentConfig};

/// Simulations of qubit transfer from a two-mode cavity onto atoms.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Branch weights, atom fidelity and transfer count of one run.
    Fig2(Settings),
    /// Mean atoms to escape a trapping state against relative τ jitter.
    Fig3(Settings),
    /// Mean clone quality against the ground-streak cutoff.
    Fig4(Settings),
    /// Batch of runs with a summary row per run.
    Custom(Settings),
    /// Check a configuration without running it.
    Validate {
        /// Experiment the configuration is meant for.
        #[arg(long, default_value = "custom")]
        experiment: String,
        #[command(flatten)]
        settings: Settings,
    },
    /// Recompute the closed-form columns of a CSV written by this tool.
    Check { file: PathBuf },
}

#[derive(Args, Default)]
struct Settings {
    /// `key = value` file applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// binomial | uniform[:n_min] | explicit:w1,w2,…
    #[arg(long)]
    distribution: Option<String>,
    /// Largest photon number (comma list for fig4).
    #[arg(long)]
    nmax: Option<String>,
    /// Fixed τ in units of 1/γ, or optimal | adaptive | half-rabi:N.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Relative τ jitter; start:stop:step or a list for fig3.
    #[arg(long = "sigma-rel")]
    sigma_rel: Option<String>,
    /// Trapping orders m_rabi for fig3 (comma list).
    #[arg(long)]
    m: Option<String>,
    /// Photon number for the fig3 Monte Carlo.
    #[arg(long = "trap-n")]
    trap_n: Option<String>,
    /// Consecutive ground outcomes that stop a run.
    #[arg(long)]
    cutoff: Option<String>,
    /// Cutoffs for fig4, `a..b` or a list.
    #[arg(long)]
    cutoffs: Option<String>,
    #[arg(long = "atom-budget")]
    atom_budget: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "n-originals")]
    n_originals: Option<String>,
    #[arg(long)]
    resolution: Option<String>,
    /// Output CSV path (default: $QUBIT_TRANSFER_OUT_DIR/<experiment>.csv).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Settings {
    fn build(&self, experiment: Experiment) -> anyhow::Result<ExperimentConfig> {
        let mut config = ExperimentConfig::new(experiment);
        if let Some(path) = &self.config {
            config.apply_file(path)?;
            config.experiment = experiment;
        }
        let flags = [
            ("distribution", &self.distribution),
            ("n_max", &self.nmax),
            ("tau", &self.tau),
            ("gamma", &self.gamma),
            ("sigma_rel", &self.sigma_rel),
            ("m_rabi", &self.m),
            ("trap_n", &self.trap_n),
            ("cutoff", &self.cutoff),
            ("cutoffs", &self.cutoffs),
            ("atom_budget", &self.atom_budget),
            ("runs", &self.runs),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("n_originals", &self.n_originals),
            ("resolution", &self.resolution),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
        Ok(config)
    }
}

fn execute(settings: &Settings, experiment: Experiment) -> anyhow::Result<()> {
    let config = settings.build(experiment)?;
    for d in validate(&config) {
        eprintln!("{d}");
    }
    let path = run_experiment(&config).with_context(|| format!("{} failed", experiment.name()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fig2(s) => execute(s, Experiment::WeightsEvolution),
        Command::Fig3(s) => execute(s, Experiment::TrappingCurves),
        Command::Fig4(s) => execute(s, Experiment::QualityCutoff),
        Command::Custom(s) => execute(s, Experiment::Custom),
        Command::Validate { experiment, settings } => (|| {
            let config = settings.build(Experiment::parse(experiment)?)?;
            let diagnostics = validate(&config);
            for d in &diagnostics {
                println!("{d}");
            }
            if has_errors(&diagnostics) {
                anyhow::bail!("configuration is invalid");
            }
            if diagnostics.is_empty() {
                println!("ok");
            }
            Ok(())
        })(),
        Command::Check { file } => check_csv(file).map_err(Into::into).map(|r| {
            println!(
                "ok: {} rows of {}, {} values confirmed",
                r.rows,
                r.experiment.name(),
                r.checked
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
