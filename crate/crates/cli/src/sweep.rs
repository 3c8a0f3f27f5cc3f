//! Parameter sweeps: one training run per (value, seed).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use scwf_core::io::fmt_float;
use scwf_core::TrainConfig;

use crate::{run_training, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "hbar")]
    Hbar,
    #[serde(rename = "groups")]
    Groups,
    #[serde(rename = "N")]
    Points,
    #[serde(rename = "noise_lambda")]
    NoiseLambda,
}

impl SweepParam {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::Hbar => vec![0.2, 0.5, 1.0, 2.0, 5.0],
            SweepParam::Groups => vec![1.0, 2.0, 3.0, 4.0],
            SweepParam::Points => vec![16.0, 32.0, 64.0, 128.0],
            SweepParam::NoiseLambda => vec![0.02, 0.05, 0.1, 0.2],
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &TrainConfig, value: f64) -> CliResult<TrainConfig> {
        let as_count = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(CliError::Input(format!("{self} must be a positive integer, got {value}")))
            }
        };
        let mut c = base.clone();
        match self {
            SweepParam::Hbar => c.hbar = value,
            SweepParam::NoiseLambda => c.noise_lambda = value,
            SweepParam::Groups => c.groups = as_count()?,
            SweepParam::Points => {
                c = c.with_points(as_count()?);
                c.groups = 3;
            }
        }
        Ok(c)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Hbar => "hbar",
            SweepParam::Groups => "groups",
            SweepParam::Points => "N",
            SweepParam::NoiseLambda => "noise_lambda",
        })
    }
}

/// Contents of a sweep spec file. Only `param` is required; `base` defaults
/// to benchmark case 1 and `seeds` to the base seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub base: Option<TrainConfig>,
}

/// One planned sub-run.
#[derive(Debug, Clone)]
pub struct SubRun {
    pub value: f64,
    pub seed: u64,
    pub config: TrainConfig,
    pub dir_name: String,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub seed: u64,
    /// `None` when the sub-run failed.
    pub final_error: Option<f64>,
    pub wall_time: f64,
}

impl SweepSpec {
    pub fn plan(&self) -> CliResult<Vec<SubRun>> {
        let base = self.base.clone().unwrap_or_else(TrainConfig::case1);
        let values = self.values.clone().unwrap_or_else(|| self.param.default_values());
        let seeds = self.seeds.clone().unwrap_or_else(|| vec![base.seed]);
        if values.is_empty() || seeds.is_empty() {
            return Err(CliError::Input("sweep needs at least one value and one seed".into()));
        }
        let mut runs = Vec::with_capacity(values.len() * seeds.len());
        for &value in &values {
            let config = self.param.apply(&base, value)?;
            for &seed in &seeds {
                runs.push(SubRun {
                    value,
                    seed,
                    config: TrainConfig { seed, ..config.clone() },
                    dir_name: format!("{}={value}/seed-{seed}", self.param),
                });
            }
        }
        Ok(runs)
    }
}

fn run_one(run: &SubRun, out: &Path) -> SweepRow {
    let dir = out.join(&run.dir_name);
    let started = Instant::now();
    let result = run.config.validate().map_err(CliError::from).and_then(|_| run_training(&run.config, &dir));
    let wall_time = started.elapsed().as_secs_f64();
    let final_error = match result {
        Ok(summary) => Some(summary.final_error),
        Err(e) => {
            eprintln!("sub-run {} failed: {e}", run.dir_name);
            let _ = fs::create_dir_all(&dir).and_then(|_| fs::write(dir.join("error.txt"), format!("{e}\n")));
            None
        }
    };
    SweepRow { value: run.value, seed: run.seed, final_error, wall_time }
}

pub fn cmd_sweep(spec_path: &Path, out: &Path, parallel: bool) -> CliResult<PathBuf> {
    let spec: SweepSpec = scwf_core::io::read_json(spec_path)?;
    let runs = spec.plan()?;
    fs::create_dir_all(out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    let rows: Vec<SweepRow> = if parallel {
        runs.par_iter().map(|r| run_one(r, out)).collect()
    } else {
        runs.iter().map(|r| run_one(r, out)).collect()
    };
    let path = out.join("sweep.csv");
    fs::write(&path, sweep_csv(spec.param, &rows))
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let failed = rows.iter().filter(|r| r.final_error.is_none()).count();
    println!("{} sub-runs, {failed} failed -> {}", rows.len(), path.display());
    Ok(path)
}

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let mut text = String::from("param,value,seed,final_error,wall_time\n");
    for r in rows {
        let err = r.final_error.map_or_else(|| "NaN".to_string(), fmt_float);
        text.push_str(&format!("{param},{},{},{err},{}\n", r.value, r.seed, fmt_float(r.wall_time)));
    }
    text
}
