//! Subcommands of the `scwf` binary, usable as a library from tests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use scwf_core::io::{self, RunSummary};
use scwf_core::{ansatz, field, Grid, ScwfError, TrainConfig};
use thiserror::Error;

pub mod sweep;

pub use sweep::{cmd_sweep, SweepParam, SweepSpec};

/// Exit codes: 1 for runtime failures, 2 for bad input.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<ScwfError> for CliError {
    fn from(e: ScwfError) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Load and validate a training configuration.
pub fn load_config(path: &Path) -> CliResult<TrainConfig> {
    let config = io::read_config(path)?;
    config.validate().map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(config)
}

/// Train and write the run directory.
pub fn run_training(config: &TrainConfig, out: &Path) -> CliResult<RunSummary> {
    let report = scwf_core::train(config)?;
    io::write_run_dir(out, config, &report)?;
    Ok(RunSummary::from_report(&report))
}

pub fn cmd_train(config_path: &Path, out: &Path) -> CliResult<PathBuf> {
    let config = load_config(config_path)?;
    let summary = run_training(&config, out)?;
    println!(
        "final_error={:.6} wall_time={:.3}s gates={} parameters={} -> {}",
        summary.final_error,
        summary.wall_time,
        summary.gate_count,
        summary.parameter_count,
        out.display()
    );
    Ok(out.to_path_buf())
}

/// Relative error of the closed-form `sin x` wave function for each grid size,
/// as `N,rel_error` CSV.
pub fn cmd_oracle(sizes: &[usize]) -> CliResult<String> {
    let mut out = String::from("N,rel_error\n");
    for &n in sizes {
        let grid = Grid::new(1, n)?;
        let psi = field::analytic_sin_wave(&grid)?;
        let u = field::velocity_from_wave(&psi, 1.0);
        let target = field::VelocityField::new(grid, vec![grid.sample(|x| x[0].sin())])?;
        let err = field::relative_error(&u, &target)?;
        writeln!(out, "{n},{}", io::fmt_float(err)).expect("writing to a String");
    }
    Ok(out)
}

/// Re-emit the field and velocity of a saved checkpoint.
pub fn cmd_decode(theta_path: &Path, config_path: &Path, out: &Path) -> CliResult<()> {
    let config = load_config(config_path)?;
    let ck = io::read_theta(theta_path)?;
    if ck.n != config.qubits || ck.groups != config.groups {
        return Err(CliError::Input(format!(
            "checkpoint is for n={} groups={}, config has n={} groups={}",
            ck.n, ck.groups, config.qubits, config.groups
        )));
    }
    let spec = ck.spec()?;
    let grid = config.grid()?;
    let psi = ansatz::decode(&ansatz::forward(&spec, &ck.theta)?, &grid)?;
    let u = field::velocity_from_wave(&psi, config.hbar);
    io::write_fields(out, &psi, &u)?;
    Ok(())
}
