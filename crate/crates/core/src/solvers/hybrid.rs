//! Warm start: `n` Oja iterations (one pass, `t` starting at 1), then VR-PCA
//! from the result.

use crate::data::oracle::OracleResult;
use crate::error::Result;
use crate::linalg::{Basis, DataMatrix};
use crate::solvers::config::{SolverConfig, SolverKind};
use crate::solvers::operator::Operator;
use crate::solvers::sampler::{solver_rng, OJA_STREAM};
use crate::solvers::trace::{Recorder, Target};
use crate::solvers::{check_init, oja, vrpca, Observer, Solution};

pub fn hybrid_solve(
    x: &DataMatrix,
    cfg: &SolverConfig,
    init: &Basis,
    oracle: Option<&OracleResult>,
    observer: &mut Observer<'_>,
) -> Result<Solution> {
    cfg.validate(SolverKind::Hybrid)?;
    check_init(x, init, cfg.rank_k)?;
    let op = Operator::new(x, &[], cfg.determinism);
    phase(&op, cfg, init, oracle, Target::Leading, observer)
}

pub(crate) fn phase(
    op: &Operator<'_>,
    cfg: &SolverConfig,
    init: &Basis,
    oracle: Option<&OracleResult>,
    target: Target,
    observer: &mut Observer<'_>,
) -> Result<Solution> {
    let mut rng = solver_rng(cfg.seed, OJA_STREAM);
    let mut rec = Recorder::new(op.x, oracle, target);
    rec.record(0, 0.0, init)?;
    let warm = oja::iterations(op, init.block().clone(), cfg.oja_step_c, 1, op.x.count(), &mut rng)?;
    let warm = Basis::from_block_unchecked(warm);
    observer(1, &warm);
    rec.record(1, 1.0, &warm)?;
    let mut trace = rec.finish(SolverKind::Hybrid, cfg, init.rank());

    let mut shifted = |s: usize, b: &Basis| observer(s + 1, b);
    let rest = vrpca::phase(op, cfg, &warm, oracle, target, &mut shifted)?;
    trace.append_shifted(rest.trace);
    Ok(Solution {
        basis: rest.basis,
        trace,
    })
}
