use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use vrpca_core::solvers::{ConvergenceTrace, ReferenceKind};
use vrpca_core::{Basis, OracleResult};

use crate::error::CliError;

pub const TRACE_HEADER: [&str; 5] = ["epoch", "effective_passes", "log10_subopt", "alignment_sq", "wall_ms"];
pub const SUMMARY_HEADER: [&str; 6] = [
    "solver",
    "param_string",
    "final_log10_subopt",
    "passes_to_m3",
    "passes_to_m6",
    "passes_to_m9",
];

/// Shortest round-trip decimal form; independent of locale.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_trace(path: &Path, trace: &ConvergenceTrace, deterministic: bool) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        let wall = if deterministic { 0.0 } else { r.wall_millis };
        w.write_record([
            r.epoch.to_string(),
            fmt_f64(r.effective_passes),
            fmt_f64(r.log10_subopt),
            r.alignment_sq.map(fmt_f64).unwrap_or_default(),
            fmt_f64(wall),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One basis column per row, in original (uncompacted) coordinates.
pub fn write_basis(path: &Path, columns: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for col in columns {
        w.write_record(col.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Scatters `basis` columns from compacted rows back to `dim` coordinates.
pub fn expand_basis(basis: &Basis, kept: &[usize], dim: usize) -> Vec<Vec<f64>> {
    (0..basis.rank())
        .map(|j| expand_vector(basis.column(j), kept, dim))
        .collect()
}

pub fn expand_vector(v: &[f64], kept: &[usize], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (&row, &value) in kept.iter().zip(v) {
        out[row] = value;
    }
    out
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn unix_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// `out/trace.csv` → `out/trace.manifest.json`
pub fn manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest.json")
}

/// Prefix plus suffix, e.g. `runs/fig1` + `-summary.csv`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Debug, Serialize)]
pub struct DatasetInfo {
    pub path: String,
    pub sha256: String,
    pub dim: usize,
    pub count: usize,
    pub nnz: usize,
    pub sparse: bool,
    /// Coordinates zero in every column, dropped before solving.
    pub dropped_rows: usize,
}

#[derive(Debug, Serialize)]
pub struct OracleSummary {
    pub eigenvalues: Vec<f64>,
    pub eigengap: Option<f64>,
    pub opt_objective: f64,
    pub max_residual: f64,
}

impl From<&OracleResult> for OracleSummary {
    fn from(o: &OracleResult) -> Self {
        OracleSummary {
            eigenvalues: o.eigenvalues.clone(),
            eigengap: o.eigengap(),
            opt_objective: o.opt_objective,
            max_residual: o.max_residual,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Manifest<T: Serialize> {
    pub command: Vec<String>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub reference_kind: Option<ReferenceKind>,
    pub warnings: Vec<String>,
    #[serde(flatten)]
    pub details: T,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}
