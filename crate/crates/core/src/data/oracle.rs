//! Brute-force ground truth: materialize `A = (1/n) X Xᵀ` and hand it to a
//! dense symmetric eigensolver. Nothing here shares code with the iterative
//! solvers it is used to check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Basis, Block, DataMatrix};

/// Largest dimension the oracle will materialize.
pub const MAX_ORACLE_DIM: usize = 4000;
/// Eigenpair residual bound, scaled by `max(1, s_1)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    /// Top-`k` eigenvalues of `A`, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// The complete spectrum of `A`, non-increasing.
    pub spectrum: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Basis,
    /// `max over orthonormal V (d×k) of ‖XᵀV‖²_F = n Σ_{j≤k} s_j`
    pub opt_objective: f64,
    pub count: usize,
    pub max_residual: f64,
}

impl OracleResult {
    pub fn dim(&self) -> usize {
        self.eigenvectors.dim()
    }

    pub fn rank(&self) -> usize {
        self.eigenvectors.rank()
    }

    /// Optimal objective when only the leading `k` directions are sought.
    pub fn opt_objective_at(&self, k: usize) -> f64 {
        self.count as f64 * self.eigenvalues[..k].iter().sum::<f64>()
    }

    /// `s_1 − s_2` of the covariance, when `d ≥ 2`.
    pub fn eigengap(&self) -> Option<f64> {
        (self.spectrum.len() >= 2).then(|| self.spectrum[0] - self.spectrum[1])
    }

    /// Leading `k` eigenvectors as a basis.
    pub fn top(&self, k: usize) -> Result<Basis> {
        if k > self.rank() {
            return Err(Error::domain(format!(
                "oracle holds {} eigenvectors, {k} requested",
                self.rank()
            )));
        }
        let d = self.dim();
        Basis::new(Block::new(d, k, self.eigenvectors.as_slice()[..d * k].to_vec())?)
    }
}

/// The materialized covariance `(1/n) X Xᵀ`.
pub fn materialize_covariance(x: &DataMatrix) -> Result<DMatrix<f64>> {
    let d = x.dim();
    if d > MAX_ORACLE_DIM {
        return Err(Error::domain(format!(
            "oracle refuses to materialize a {d}x{d} covariance (limit {MAX_ORACLE_DIM})"
        )));
    }
    let mut a = DMatrix::<f64>::zeros(d, d);
    if x.is_sparse() {
        for col in x.columns() {
            let entries: Vec<(usize, f64)> = col.entries().collect();
            for &(r, vr) in &entries {
                for &(c, vc) in &entries {
                    a[(r, c)] += vr * vc;
                }
            }
        }
    } else {
        let dense = DMatrix::from_column_slice(d, x.count(), &x.to_dense_vec());
        a = &dense * dense.transpose();
    }
    a /= x.count() as f64;
    Ok(a)
}

/// Top-`k` eigenpairs of the covariance by dense symmetric eigendecomposition.
pub fn oracle_compute(x: &DataMatrix, k: usize) -> Result<OracleResult> {
    let d = x.dim();
    if k == 0 || k > d {
        return Err(Error::domain(format!("oracle rank must be in [1, {d}], got {k}")));
    }
    let a = materialize_covariance(x)?;
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));

    let spectrum: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vecs = Vec::with_capacity(d * k);
    let mut max_residual: f64 = 0.0;
    for &j in &order[..k] {
        let v: DVector<f64> = eig.eigenvectors.column(j).into_owned();
        let residual = (&a * &v - &v * eig.eigenvalues[j]).norm();
        max_residual = max_residual.max(residual);
        vecs.extend(v.iter());
    }
    let scale = spectrum[0].abs().max(1.0);
    if max_residual > RESIDUAL_TOL * scale {
        return Err(Error::InvalidData(format!(
            "oracle eigenpair residual {max_residual:e} exceeds tolerance"
        )));
    }
    let eigenvectors = Basis::new(Block::new(d, k, vecs)?)?;
    let eigenvalues = spectrum[..k].to_vec();
    let opt_objective = x.count() as f64 * eigenvalues.iter().sum::<f64>();
    Ok(OracleResult {
        eigenvalues,
        spectrum,
        eigenvectors,
        opt_objective,
        count: x.count(),
        max_residual,
    })
}
