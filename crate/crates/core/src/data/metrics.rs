//! Evaluation metrics: log-suboptimality of the captured variance and squared
//! alignment with the oracle eigenvectors.

use crate::data::oracle::OracleResult;
use crate::error::{Error, Result};
use crate::linalg::{dot, Basis, DataMatrix};

/// Floor applied to `1 − ratio` before taking `log10`.
pub const SUBOPT_FLOOR: f64 = 1e-16;

/// `‖XᵀB‖²_F = Σ_i Σ_j (x_iᵀ b_j)²`
pub fn objective(x: &DataMatrix, b: &Basis) -> Result<f64> {
    if b.dim() != x.dim() {
        return Err(Error::shape(x.dim(), b.dim()));
    }
    Ok(x
        .columns()
        .map(|col| {
            (0..b.rank())
                .map(|j| col.dot(b.column(j)).powi(2))
                .sum::<f64>()
        })
        .sum())
}

/// `log10(max(1 − value/reference, floor))`
pub fn log_suboptimality(value: f64, reference: f64) -> f64 {
    (1.0 - value / reference).max(SUBOPT_FLOOR).log10()
}

fn check_oracle(dim: usize, rank: usize, oracle: &OracleResult) -> Result<()> {
    if oracle.dim() != dim {
        return Err(Error::domain(format!(
            "oracle dimension {} does not match {dim}",
            oracle.dim()
        )));
    }
    if oracle.rank() < rank {
        return Err(Error::domain(format!(
            "oracle holds {} eigenvectors, basis has rank {rank}",
            oracle.rank()
        )));
    }
    Ok(())
}

/// `log10(1 − ‖XᵀB‖²_F / max_{VᵀV=I} ‖XᵀV‖²_F)`, floored at 1e-16.
pub fn suboptimality(x: &DataMatrix, b: &Basis, oracle: &OracleResult) -> Result<f64> {
    check_oracle(x.dim(), b.rank(), oracle)?;
    if oracle.count != x.count() {
        return Err(Error::domain(format!(
            "oracle computed for n = {}, data has n = {}",
            oracle.count,
            x.count()
        )));
    }
    Ok(log_suboptimality(
        objective(x, b)?,
        oracle.opt_objective_at(b.rank()),
    ))
}

/// `⟨w, v_1⟩²` for a vector, `(1/k) ‖V_kᵀB‖²_F` for a block.
pub fn alignment(b: &Basis, oracle: &OracleResult) -> Result<f64> {
    check_oracle(b.dim(), b.rank(), oracle)?;
    let k = b.rank();
    let mut total = 0.0;
    for p in 0..k {
        for q in 0..k {
            total += dot(oracle.eigenvectors.column(p), b.column(q)).powi(2);
        }
    }
    Ok((total / k as f64).clamp(0.0, 1.0))
}

/// `⟨w, v_j⟩²` against a single oracle eigenvector (0-based `j`).
pub fn component_alignment(w: &[f64], oracle: &OracleResult, j: usize) -> Result<f64> {
    if j >= oracle.rank() || w.len() != oracle.dim() {
        return Err(Error::domain(format!(
            "component {j} unavailable for a rank-{} oracle of dimension {}",
            oracle.rank(),
            oracle.dim()
        )));
    }
    Ok(dot(oracle.eigenvectors.column(j), w).powi(2).min(1.0))
}
