//! Iterative solvers for the leading eigenvectors of `A = (1/n) X Xᵀ`.

pub mod config;
pub mod deflation;
pub mod hybrid;
pub mod oja;
mod operator;
pub mod params;
pub mod power;
pub mod sampler;
pub mod trace;
pub mod vrpca;

use crate::data::oracle::OracleResult;
use crate::error::{Error, Result};
use crate::linalg::{Basis, DataMatrix};

pub use config::{EpochKernel, SolverConfig, SolverKind};
pub use deflation::{deflation_solve, DeflationResult};
pub use hybrid::hybrid_solve;
pub use oja::oja_solve;
pub use params::{
    heuristic_params, theory_conditions, theory_epochs, theory_params, ConditionReport,
    TheoryConstants, TheoryParams,
};
pub use power::power_solve;
pub use trace::{ConvergenceTrace, ReferenceKind, TraceRecord};
pub use vrpca::{vrpca_epoch, vrpca_solve};

/// Called after each epoch (or pass, or round) with its index and the
/// current iterate.
pub type Observer<'a> = dyn FnMut(usize, &Basis) + 'a;

#[derive(Debug, Clone)]
pub struct Solution {
    pub basis: Basis,
    pub trace: ConvergenceTrace,
}

/// Orthonormalized Gaussian `d × k` start shared by all solvers for `seed`.
pub fn random_init(dim: usize, rank: usize, seed: u64) -> Result<Basis> {
    Basis::random(dim, rank, &mut sampler::solver_rng(seed, sampler::INIT_STREAM))
}

/// Dispatches to the solver named by `kind`.
pub fn solve(
    kind: SolverKind,
    x: &DataMatrix,
    cfg: &SolverConfig,
    init: &Basis,
    oracle: Option<&OracleResult>,
    observer: &mut Observer<'_>,
) -> Result<Solution> {
    match kind {
        SolverKind::Vrpca => vrpca_solve(x, cfg, init, oracle, observer),
        SolverKind::Oja => oja_solve(x, cfg, init, oracle, observer),
        SolverKind::Power => power_solve(x, cfg, init, oracle, observer),
        SolverKind::Hybrid => hybrid_solve(x, cfg, init, oracle, observer),
    }
}

pub(crate) fn check_init(x: &DataMatrix, init: &Basis, rank: usize) -> Result<()> {
    if init.dim() != x.dim() || init.rank() != rank {
        return Err(Error::shape(
            format!("{}x{rank} initial basis", x.dim()),
            format!("{}x{}", init.dim(), init.rank()),
        ));
    }
    Ok(())
}
