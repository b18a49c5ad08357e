//! Command-line front end: gate verification, figure reproduction, general
//! sweeps, and preparation solving. Exit codes: 0 success, 1 verification or
//! solver failure, 2 usage error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::FileConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration; exit code 2.
    Usage(String),
    /// The run itself failed (verification, solver, I/O); exit code 1.
    Failure(String),
}

impl From<spinsim::Error> for CliError {
    fn from(e: spinsim::Error) -> Self {
        match e {
            spinsim::Error::InvalidConfig(_) | spinsim::Error::Parse(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SchemeArg {
    Unmarked,
    Marked,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GatesArg {
    Ideal,
    Pulse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InitArg {
    Pure,
    Effpure,
    Thermal,
}

#[derive(Parser)]
#[command(
    name = "spinsim",
    version,
    about = "Two-spin NMR interferometry simulator: fringes, which-path marking, coherences"
)]
struct Cli {
    /// Key-value config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the pulse realizations of U(phi) and the controlled-NOT.
    VerifyGates {
        #[arg(long, hide = true)]
        inject_angle_error: bool,
    },
    /// Reproduce a reference figure (2: unmarked fringes, 3: marked
    /// populations, 4: marked coherences); writes CSV, JSON and a gnuplot
    /// script.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=4))]
        figure: u8,
        /// Beam-splitter angle in degrees (default 90).
        #[arg(long)]
        theta_deg: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        phi_steps: Option<u32>,
        #[arg(long, value_enum)]
        gates: Option<GatesArg>,
        /// Relative std-dev of the per-shot RF flip-angle scale.
        #[arg(long)]
        rf_spread: Option<f64>,
        /// Additive complex Gaussian noise per FID point.
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        shots: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Run a sweep and write the dataset plus its JSON sidecar.
    Run {
        #[arg(long, value_enum)]
        scheme: Option<SchemeArg>,
        #[arg(long)]
        theta_deg: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        phi_steps: Option<u32>,
        #[arg(long, value_enum)]
        gates: Option<GatesArg>,
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        #[arg(long)]
        rf_spread: Option<f64>,
        #[arg(long)]
        noise_sigma: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        shots: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Solve the line-selective preparation angles and report A and B.
    Prep {
        #[arg(long)]
        eps_b: Option<f64>,
        #[arg(long)]
        eps_a: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(e) => return report(e),
        },
        None => FileConfig::default(),
    };
    let outcome = match cli.command {
        Command::VerifyGates { inject_angle_error } => {
            commands::verify_gates(inject_angle_error)
        }
        Command::Figure {
            figure,
            theta_deg,
            phi_steps,
            gates,
            rf_spread,
            noise_sigma,
            shots,
            seed,
            out_dir,
        } => commands::figure(
            &file,
            figure,
            theta_deg,
            phi_steps,
            gates,
            rf_spread,
            noise_sigma,
            shots,
            seed,
            out_dir,
        ),
        Command::Run {
            scheme,
            theta_deg,
            phi_steps,
            gates,
            init,
            rf_spread,
            noise_sigma,
            shots,
            seed,
            out,
        } => commands::run(
            &file, scheme, theta_deg, phi_steps, gates, init, rf_spread, noise_sigma, shots,
            seed, out,
        ),
        Command::Prep { eps_b, eps_a } => commands::prep(&file, eps_b, eps_a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    match e {
        CliError::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        CliError::Failure(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
