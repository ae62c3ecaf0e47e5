use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use precs_core::cli::{
    cmd_decompose, cmd_evolve, cmd_gamma_curve, cmd_lindblad_field, parse_g_list, Engine,
};
use precs_core::config::RunConfig;
use precs_core::error::Error;

/// Phase-space representation and classical-limit master equations for a
/// qubit coupled to a bosonic mode.
#[derive(Parser)]
#[command(name = "precs", version, about)]
struct Cli {
    /// Cap the worker thread pool.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose the initial state over the phase-space grid and reconstruct
    /// the reduced qubit state.
    Decompose {
        #[arg(long)]
        config: PathBuf,
    },
    /// Assemble the point-local F/L operators at the exactly propagated
    /// state ψ(t).
    LindbladField {
        #[arg(long)]
        config: PathBuf,
        /// Evaluation time (units 1/ω).
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Integrate the dynamics with one of the engines.
    Evolve {
        #[arg(long)]
        config: PathBuf,
        /// exact | gksl | decoupled
        #[arg(long, default_value = "gksl")]
        engine: String,
    },
    /// Emit one-period normalized dephasing-rate curves over a coupling
    /// ladder plus the sub-threshold fraction table.
    GammaCurve {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated couplings; defaults to {1,2,4,8}·ω.
        #[arg(long, default_value = "")]
        g_list: String,
    },
}

fn run(cli: Cli) -> Result<Vec<String>, Error> {
    match cli.command {
        Command::Decompose { config } => {
            let config = load(&config, cli.threads)?;
            let report = cmd_decompose(&config)?;
            println!(
                "decompose: {} points, chi2 norm deviation {:.3e}, reconstruction error {:.3e}",
                report.points, report.chi2_norm_dev, report.reconstruction_err
            );
            Ok(report.warnings)
        }
        Command::LindbladField { config, t } => {
            let config = load(&config, cli.threads)?;
            let report = cmd_lindblad_field(&config, t)?;
            println!(
                "lindblad-field: {} points assembled at t = {t}, |tr rhs| = {:.3e}",
                report.points_assembled, report.gksl_trace_abs
            );
            Ok(report.warnings)
        }
        Command::Evolve { config, engine } => {
            let engine: Engine = engine.parse()?;
            let config = load(&config, cli.threads)?;
            let report = cmd_evolve(&config, engine)?;
            println!(
                "evolve ({engine}): max trace deviation {:.3e}, min eigenvalue {:.3e}",
                report.max_trace_dev, report.min_eigenvalue
            );
            Ok(report.warnings)
        }
        Command::GammaCurve { config, g_list } => {
            let ladder = parse_g_list(&g_list)?;
            let config = load(&config, cli.threads)?;
            let report = cmd_gamma_curve(&config, &ladder)?;
            println!(
                "gamma-curve: {} couplings, monotone fraction growth: {}",
                report.rows.len(),
                report.monotone
            );
            Ok(report.warnings)
        }
    }
}

fn load(path: &Path, cli_threads: Option<usize>) -> Result<RunConfig, Error> {
    let config = RunConfig::load(path)?;
    if let Some(n) = cli_threads.or(config.threads) {
        // Ignore the error if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
