//! Sequential extraction of the top `k` eigenpairs by deflation.
//!
//! Level `j` runs a `k = 1` solver against `A − Σ_{l<j} s_l v_l v_lᵀ`, then
//! takes `s_j = v_jᵀ A v_j`. Convergence needs a positive gap between every
//! pair of leading eigenvalues; when the iterate is still moving at the end
//! of a level, a warning is attached instead of failing.

use serde::Serialize;

use crate::data::oracle::OracleResult;
use crate::error::{Error, Result};
use crate::linalg::{covariance_apply_vec, dot, Basis, DataMatrix, DeflationPair};
use crate::solvers::config::{SolverConfig, SolverKind};
use crate::solvers::operator::Operator;
use crate::solvers::sampler::{solver_rng, INIT_STREAM};
use crate::solvers::trace::{ConvergenceTrace, Target};
use crate::solvers::{hybrid, oja, power, vrpca, Observer, Solution};

/// Squared-cosine movement over the last round above which a level is
/// flagged as possibly unconverged.
pub const STALL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct DeflationResult {
    /// Eigenpairs in non-increasing eigenvalue order.
    pub pairs: Vec<DeflationPair>,
    /// One trace per level, in extraction order.
    pub traces: Vec<ConvergenceTrace>,
    pub warnings: Vec<String>,
}

/// Random initial vector for deflation level `level`. Level 0 matches
/// [`random_init`](crate::solvers::random_init) for rank 1.
pub fn level_init(dim: usize, seed: u64, level: usize) -> Result<Basis> {
    Basis::random(dim, 1, &mut solver_rng(seed, INIT_STREAM + level as u64))
}

pub(crate) fn run_phase(
    kind: SolverKind,
    op: &Operator<'_>,
    cfg: &SolverConfig,
    init: &Basis,
    oracle: Option<&OracleResult>,
    target: Target,
    observer: &mut Observer<'_>,
) -> Result<Solution> {
    match kind {
        SolverKind::Vrpca => vrpca::phase(op, cfg, init, oracle, target, observer),
        SolverKind::Oja => oja::phase(op, cfg, init, oracle, target, observer),
        SolverKind::Power => power::phase(op, cfg, init, oracle, target, observer),
        SolverKind::Hybrid => hybrid::phase(op, cfg, init, oracle, target, observer),
    }
}

pub fn deflation_solve(
    x: &DataMatrix,
    cfg: &SolverConfig,
    k: usize,
    inner: SolverKind,
    oracle: Option<&OracleResult>,
) -> Result<DeflationResult> {
    if k == 0 || k > x.dim() {
        return Err(Error::domain(format!(
            "deflation rank must be in [1, {}], got {k}",
            x.dim()
        )));
    }
    let mut level_cfg = cfg.clone();
    level_cfg.rank_k = 1;
    level_cfg.validate(inner)?;

    let mut pairs: Vec<DeflationPair> = Vec::with_capacity(k);
    let mut traces = Vec::with_capacity(k);
    let mut warnings = Vec::new();
    for level in 0..k {
        level_cfg.seed = cfg.seed.wrapping_add(level as u64);
        let init = level_init(x.dim(), cfg.seed, level)?;
        let op = Operator::new(x, &pairs, cfg.determinism);
        let mut history: (Option<Basis>, Option<Basis>) = (None, Some(init.clone()));
        let mut watch = |_: usize, b: &Basis| {
            history.0 = history.1.replace(b.clone());
        };
        let target = if level == 0 {
            Target::Leading
        } else {
            Target::Component(level)
        };
        let mut sol = run_phase(inner, &op, &level_cfg, &init, oracle, target, &mut watch)?;
        if let (Some(prev), Some(last)) = &history {
            let movement = 1.0 - dot(prev.as_slice(), last.as_slice()).powi(2);
            if movement > STALL_TOL {
                let msg = format!(
                    "deflation level {}: iterate still moving (1 - cos^2 = {movement:.3e}); \
                     eigengap may be too small or too few iterations",
                    level + 1
                );
                sol.trace.warnings.push(msg.clone());
                warnings.push(msg);
            }
        }
        let v = sol.basis.as_slice().to_vec();
        let eigenvalue = dot(&v, &covariance_apply_vec(x, &v)?);
        pairs.push(DeflationPair {
            eigenvalue,
            vector: v,
        });
        traces.push(sol.trace);
    }
    pairs.sort_by(|a, b| b.eigenvalue.total_cmp(&a.eigenvalue));
    Ok(DeflationResult {
        pairs,
        traces,
        warnings,
    })
}
