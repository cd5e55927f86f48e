use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use propertime_cli::commands::{self, Outcome};
use propertime_cli::config::{AxisRange, Format, KernelAxis, RunConfig};
use propertime_cli::error::CliError;
use propertime_cli::verify;

/// Proper-time localization of a free spinless relativistic particle.
#[derive(Parser)]
#[command(name = "propertime", version)]
struct Cli {
    /// Run configuration (TOML); the shipped default when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format, overriding `output.format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads, overriding `threads`; 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of a self-adjoint extension of Q³.
    Spectrum {
        /// Extension parameter in (−π, π].
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        n_min: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n_max: Option<i64>,
    },
    /// Time POVM density at each configured proper time.
    TimeDensity,
    /// Position POVM density at each configured proper time.
    PositionDensity,
    /// Scan of the position or smeared time kernel against its reference.
    Overlap {
        #[arg(long, value_enum)]
        axis: Option<KernelAxis>,
        /// Separation range `min:max`, units 1/m.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Admissibility report for the configured state.
    Admissibility,
    /// Position density across proper times with drift and tail summary.
    Evolve,
    /// Boost covariance of the position operator.
    Covariance,
    /// The invariant suite.
    Verify,
    /// Prints the effective configuration as TOML.
    ShowConfig,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::shipped_default(),
    };
    if let Some(dir) = cli.out {
        cfg.output.dir = dir;
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    match &cli.command {
        Command::Spectrum { phi, n_min, n_max } => {
            cfg.spectrum.phi = phi.unwrap_or(cfg.spectrum.phi);
            cfg.spectrum.n_min = n_min.unwrap_or(cfg.spectrum.n_min);
            cfg.spectrum.n_max = n_max.unwrap_or(cfg.spectrum.n_max);
        }
        Command::Overlap { axis, range, step } => {
            let o = &mut cfg.overlap;
            o.axis = axis.unwrap_or(o.axis);
            o.step = step.unwrap_or(o.step);
            if let Some(text) = range {
                let r = AxisRange::parse_range(text, o.step)?;
                o.min = r.min;
                o.max = r.max;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    match cli.command {
        Command::Spectrum { .. } => commands::spectrum(&cfg),
        Command::TimeDensity => commands::time_density(&cfg),
        Command::PositionDensity => commands::position_density(&cfg),
        Command::Overlap { .. } => commands::overlap(&cfg),
        Command::Admissibility => commands::admissibility(&cfg),
        Command::Evolve => commands::evolve(&cfg),
        Command::Covariance => commands::covariance(&cfg),
        Command::Verify => verify::run(&cfg),
        Command::ShowConfig => {
            let text = toml::to_string(&cfg).map_err(|e| CliError::config(format!("config: {e}")))?;
            Ok(Outcome { lines: vec![text], ..Outcome::default() })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            if outcome.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                let err = CliError::Check(format!(
                    "{} check(s) failed: {}",
                    outcome.failures.len(),
                    outcome.failures.join("; ")
                ));
                eprintln!("{}", err.report());
                ExitCode::from(err.exit_code() as u8)
            }
        }
        Err(err) => {
            eprintln!("{}", err.report());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
