use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shotnoise_cli::config::ExperimentConfig;
use shotnoise_cli::figures::reproduce;
use shotnoise_cli::runner::{run_config, RunError};
use shotnoise_cli::validate::validate;
use shotnoise_cli::ConfigError;

/// Environment variable bounding the worker pool.
const WORKERS_ENV: &str = "SHOTNOISE_WORKERS";

#[derive(Parser)]
#[command(
    name = "shotnoise",
    version,
    about = "Quantum adiabatic protocols under Poisson white noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write one CSV per observable.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compare trajectory averages with the master equation.
    Validate {
        config: PathBuf,
        #[arg(long, default_value_t = 4000)]
        traj: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Regenerate the data of a figure.
    Reproduce {
        figure: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
    Ok(ExperimentConfig::from_toml(&text)?)
}

fn write_failure(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(format!("{}: {e}", path.display()))
}

fn execute(cli: Cli) -> Result<bool, RunError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let tables = run_config(&cfg)?;
            std::fs::create_dir_all(&out).map_err(|e| write_failure(&out, e))?;
            for (obs, table) in tables {
                let path = out.join(format!("{}.csv", obs.name()));
                table.write(&path).map_err(|e| write_failure(&path, e))?;
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Validate {
            config,
            traj,
            seed,
            out,
        } => {
            let cfg = load(&config)?;
            let report = validate(&cfg, traj, seed)?;
            std::fs::create_dir_all(&out).map_err(|e| write_failure(&out, e))?;
            let path = out.join("validation.csv");
            report
                .table
                .write(&path)
                .map_err(|e| write_failure(&path, e))?;
            let c = &report.comparison;
            println!(
                "{}: {:.2}% of times within 3 standard errors (max deviation {:.3}), report {}",
                if c.passed { "PASS" } else { "FAIL" },
                100.0 * c.fraction_within,
                c.max_deviation,
                path.display()
            );
            Ok(c.passed)
        }
        Command::Reproduce { figure, out } => {
            for path in reproduce(&figure, &out)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
    }
}

fn configure_workers() -> Result<(), RunError> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        ConfigError::new(
            WORKERS_ENV,
            format!("expected a positive integer, got {value:?}"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| RunError::Numerical(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|_| execute(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ RunError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e @ RunError::Numerical(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
