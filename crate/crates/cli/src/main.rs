use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scwf_cli::{cmd_decode, cmd_oracle, cmd_sweep, cmd_train, CliResult};

#[derive(Parser)]
#[command(name = "scwf", version, about = "Train circuits that prepare spherical Clebsch wave functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration and write its run directory.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one training per (value, seed) of a parameter sweep.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run sub-runs concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Error of the closed-form sin x wave function for each grid size.
    Oracle {
        #[arg(long = "N", value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Write field.csv and velocity.csv for a saved checkpoint.
    Decode {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train { config, out } => cmd_train(&config, &out).map(drop),
        Command::Sweep { spec, out, parallel } => cmd_sweep(&spec, &out, parallel).map(drop),
        Command::Oracle { sizes } => cmd_oracle(&sizes).map(|csv| print!("{csv}")),
        Command::Decode { theta, config, out } => cmd_decode(&theta, &config, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
