//! `sshchain` — run staggered-hopping chain experiments from declarative
//! TOML configs.
//!
//! Exit codes: 0 success, 1 configuration/usage error, 2 numeric error.

mod config;
mod output;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use config::RunConfig;

/// Environment variable giving the default output directory when neither
/// `--out` nor the config's `[output] dir` is set.
const OUT_DIR_ENV: &str = "SSHCHAIN_OUT";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl From<sshchain::Error> for CliError {
    fn from(err: sshchain::Error) -> Self {
        if err.is_numeric() {
            CliError::Numeric(err.to_string())
        } else {
            CliError::Config(err.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "sshchain", version, about = "Staggered-hopping chain simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file
    Run {
        /// Path to the run configuration
        config: PathBuf,
        /// Output directory (overrides the config and SSHCHAIN_OUT)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the noise generator (sfi_pipeline only)
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    let Command::Run { config, out, seed } = cli.command;
    match execute(&config, out.as_deref(), seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(message)) => {
            eprintln!("config error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(message)) => {
            eprintln!("numeric error: {message}");
            ExitCode::from(2)
        }
    }
}

fn execute(config_path: &Path, out_override: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", config_path.display()))
    })?;
    let config = RunConfig::parse(&text)?;

    let out_dir: PathBuf = match (out_override, &config.output) {
        (Some(dir), _) => dir.to_path_buf(),
        (None, Some(output)) if output.dir.is_some() => {
            PathBuf::from(output.dir.clone().expect("checked"))
        }
        _ => std::env::var(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|_| PathBuf::from(".")),
    };
    let stem: String = config
        .output
        .as_ref()
        .and_then(|o| o.stem.clone())
        .or_else(|| {
            config_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "run".into());

    let outcome = runner::run(&config, &out_dir, &stem, seed)?;
    println!(
        "wrote {} and {} to {}",
        outcome.files.join(", "),
        outcome.summary_file,
        out_dir.display()
    );
    Ok(())
}
