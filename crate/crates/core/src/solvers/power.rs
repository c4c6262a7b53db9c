//! Block power iteration: `B ← orth(A B)`, one effective pass per round.

use crate::data::oracle::OracleResult;
use crate::error::Result;
use crate::linalg::{gram_schmidt, Basis, DataMatrix};
use crate::solvers::config::{SolverConfig, SolverKind};
use crate::solvers::operator::Operator;
use crate::solvers::trace::{Recorder, Target};
use crate::solvers::{check_init, Observer, Solution};

pub fn power_solve(
    x: &DataMatrix,
    cfg: &SolverConfig,
    init: &Basis,
    oracle: Option<&OracleResult>,
    observer: &mut Observer<'_>,
) -> Result<Solution> {
    cfg.validate(SolverKind::Power)?;
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
    let mut rec = Recorder::new(op.x, oracle, target);
    rec.record(0, 0.0, init)?;
    let mut b = init.clone();
    for round in 1..=cfg.power_iters {
        b = gram_schmidt(op.apply(b.block())?)?;
        observer(round, &b);
        rec.record(round, round as f64, &b)?;
    }
    Ok(Solution {
        trace: rec.finish(SolverKind::Power, cfg, init.rank()),
        basis: b,
    })
}
