//! Oja's rule with a decaying step `η_t = c / t`.

use rand::Rng;

use crate::data::oracle::OracleResult;
use crate::error::Result;
use crate::linalg::{axpy, gram_schmidt, Basis, Block};
use crate::solvers::config::{SolverConfig, SolverKind};
use crate::solvers::operator::Operator;
use crate::solvers::sampler::{solver_rng, IndexSampler, OJA_STREAM};
use crate::solvers::trace::{Recorder, Target};
use crate::solvers::{check_init, Observer, Solution};

/// Runs `count` iterations with global counter `t = t_start, t_start + 1, …`.
pub(crate) fn iterations<R: Rng + ?Sized>(
    op: &Operator<'_>,
    mut w: Block,
    c: f64,
    t_start: u64,
    count: usize,
    rng: &mut R,
) -> Result<Block> {
    let sampler = IndexSampler::new(op.x.count());
    for step in 0..count as u64 {
        let eta = c / (t_start + step) as f64;
        let col = op.x.column(sampler.sample(rng));
        for j in 0..w.cols() {
            let p = col.dot(w.column(j));
            let correction = op.minus_deflation(w.column(j))?;
            let wj = w.column_mut(j);
            col.axpy_into(eta * p, wj);
            if let Some(c) = correction {
                axpy(eta, &c, wj);
            }
        }
        w = gram_schmidt(w)?.into_block();
    }
    Ok(w)
}

/// `epochs_t` passes of `n` Oja iterations each; one trace record per pass.
pub fn oja_solve(
    x: &crate::linalg::DataMatrix,
    cfg: &SolverConfig,
    init: &Basis,
    oracle: Option<&OracleResult>,
    observer: &mut Observer<'_>,
) -> Result<Solution> {
    cfg.validate(SolverKind::Oja)?;
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
    let n = op.x.count();
    let mut rng = solver_rng(cfg.seed, OJA_STREAM);
    let mut rec = Recorder::new(op.x, oracle, target);
    rec.record(0, 0.0, init)?;
    let mut w = init.block().clone();
    for pass in 1..=cfg.epochs_t {
        let t_start = ((pass - 1) * n) as u64 + 1;
        w = iterations(op, w, cfg.oja_step_c, t_start, n, &mut rng)?;
        let basis = Basis::from_block_unchecked(w);
        observer(pass, &basis);
        rec.record(pass, pass as f64, &basis)?;
        w = basis.into_block();
    }
    Ok(Solution {
        trace: rec.finish(SolverKind::Oja, cfg, init.rank()),
        basis: Basis::from_block_unchecked(w),
    })
}
