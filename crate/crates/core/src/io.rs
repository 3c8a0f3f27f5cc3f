//! On-disk formats: field CSVs, the parameter checkpoint and run directories.
//!
//! Floats are written in scientific notation with 17 significant digits, so
//! every value survives a write/read round trip bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::ThetaCheckpoint;
use crate::error::{Result, ScwfError};
use crate::field::{VelocityField, WaveField};
use crate::grid::Grid;
use crate::trainer::{TraceRow, TrainConfig, TrainReport};

pub const CONFIG_FILE: &str = "config.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const THETA_FILE: &str = "theta.json";
pub const FIELD_FILE: &str = "field.csv";
pub const VELOCITY_FILE: &str = "velocity.csv";
pub const REPORT_FILE: &str = "report.json";

pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScwfError + '_ {
    move |source| ScwfError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> ScwfError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => ScwfError::Io { path: path.to_path_buf(), source },
        other => ScwfError::Format { path: path.to_path_buf(), message: format!("{other:?}") },
    }
}

fn coord_headers(grid: &Grid) -> Vec<&'static str> {
    ["x", "y"][..grid.dim()].to_vec()
}

pub fn wave_header(grid: &Grid) -> Vec<&'static str> {
    let mut h = coord_headers(grid);
    h.extend(["a1", "b1", "a2", "b2"]);
    h
}

pub fn velocity_header(grid: &Grid) -> Vec<&'static str> {
    let mut h = coord_headers(grid);
    h.extend(["u", "v"][..grid.dim()].iter());
    h
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_float)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn coords(grid: &Grid, j: usize) -> Vec<f64> {
    (0..grid.dim()).map(|a| grid.coord(j, a)).collect()
}

pub fn write_wave_csv(path: &Path, psi: &WaveField) -> Result<()> {
    let grid = *psi.grid();
    let rows = (0..grid.len()).map(|j| {
        let mut r = coords(&grid, j);
        r.extend([psi.a1[j], psi.b1[j], psi.a2[j], psi.b2[j]]);
        r
    });
    write_rows(path, &wave_header(&grid), rows)
}

pub fn write_velocity_csv(path: &Path, u: &VelocityField) -> Result<()> {
    let grid = *u.grid();
    let rows = (0..grid.len()).map(|j| {
        let mut r = coords(&grid, j);
        r.extend(u.components().iter().map(|c| c[j]));
        r
    });
    write_rows(path, &velocity_header(&grid), rows)
}

/// Parsed numeric CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| ScwfError::Format {
                    path: path.to_path_buf(),
                    message: format!("row {}: `{s}` is not a number", line + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn expect_header(path: &Path, table: &Table, expected: &[&str], rows: usize) -> Result<()> {
    if table.header != expected {
        return Err(ScwfError::Format {
            path: path.to_path_buf(),
            message: format!("expected header {expected:?}, found {:?}", table.header),
        });
    }
    if table.rows.len() != rows {
        return Err(ScwfError::Format {
            path: path.to_path_buf(),
            message: format!("expected {rows} rows, found {}", table.rows.len()),
        });
    }
    Ok(())
}

pub fn read_wave_csv(path: &Path, grid: &Grid) -> Result<WaveField> {
    let t = read_table(path)?;
    expect_header(path, &t, &wave_header(grid), grid.len())?;
    let col = |name| t.column(name).expect("header checked");
    WaveField::new(*grid, col("a1"), col("b1"), col("a2"), col("b2"))
}

pub fn read_velocity_csv(path: &Path, grid: &Grid) -> Result<VelocityField> {
    let t = read_table(path)?;
    let header = velocity_header(grid);
    expect_header(path, &t, &header, grid.len())?;
    let comps = header[grid.dim()..].iter().map(|name| t.column(name).expect("header checked")).collect();
    VelocityField::new(*grid, comps)
}

pub fn write_trace_csv(path: &Path, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["iter", "loss", "rel_error", "lr", "eps"]).map_err(|e| csv_err(path, e))?;
    for r in trace {
        w.write_record([
            r.iter.to_string(),
            fmt_float(r.loss),
            fmt_float(r.rel_error),
            fmt_float(r.lr),
            fmt_float(r.eps),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|source| ScwfError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ScwfError::Json { path: path.to_path_buf(), source })
}

pub fn read_config(path: &Path) -> Result<TrainConfig> {
    read_json(path)
}

/// Load a checkpoint and check it against the circuit layout.
pub fn read_theta(path: &Path) -> Result<ThetaCheckpoint> {
    let ck: ThetaCheckpoint = read_json(path)?;
    ck.spec().map_err(|e| ScwfError::Format { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(ck)
}

/// Scalars in `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_error: f64,
    pub wall_time: f64,
    pub gate_count: usize,
    pub parameter_count: usize,
    pub final_fidelity_loss: f64,
}

impl RunSummary {
    pub fn from_report(report: &TrainReport) -> Self {
        RunSummary {
            final_error: report.final_error,
            wall_time: report.wall_time,
            gate_count: report.circuit.gate_count(),
            parameter_count: report.circuit.parameter_count(),
            final_fidelity_loss: report.final_fidelity_loss,
        }
    }
}

/// Write the decoded field and its velocity.
pub fn write_fields(dir: &Path, psi: &WaveField, u: &VelocityField) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_wave_csv(&dir.join(FIELD_FILE), psi)?;
    write_velocity_csv(&dir.join(VELOCITY_FILE), u)
}

/// Write the full run directory layout.
pub fn write_run_dir(dir: &Path, config: &TrainConfig, report: &TrainReport) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join(CONFIG_FILE), config)?;
    write_trace_csv(&dir.join(TRACE_FILE), &report.trace)?;
    write_json(&dir.join(THETA_FILE), &ThetaCheckpoint::new(&report.circuit, &report.final_theta))?;
    write_fields(dir, &report.final_wave, &report.final_velocity)?;
    write_json(&dir.join(REPORT_FILE), &RunSummary::from_report(report))?;
    Ok(dir.to_path_buf())
}
