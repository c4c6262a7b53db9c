//! VR-PCA: fixed-step stochastic power iteration with a per-epoch
//! variance-reduction anchor.
//!
//! Each epoch computes `ũ = A w̃` once, then runs `m` iterations of
//!
//! ```text
//! w' = w + η (x_i (x_iᵀ w − x_iᵀ w̃) + ũ),   w = w' / ‖w'‖
//! ```
//!
//! with `i` uniform on the columns. For `k > 1` the same update is applied
//! to each column of `W` and the normalization becomes Gram-Schmidt.

use rand::Rng;

use crate::data::oracle::OracleResult;
use crate::error::{Error, Result};
use crate::fast_epoch;
use crate::linalg::{axpy, gram_schmidt, norm_sq, Basis, Block, DataMatrix, RANK_TOL};
use crate::solvers::config::{EpochKernel, SolverConfig, SolverKind};
use crate::solvers::operator::Operator;
use crate::solvers::sampler::{solver_rng, IndexSampler, VRPCA_STREAM};
use crate::solvers::trace::{Recorder, Target};
use crate::solvers::{check_init, Observer, Solution};

fn uses_amortized(kernel: EpochKernel, x: &DataMatrix) -> bool {
    match kernel {
        EpochKernel::Auto => x.is_sparse(),
        EpochKernel::Naive => false,
        EpochKernel::Amortized => true,
    }
}

/// One epoch from `anchor`; consumes exactly `m` index draws from `rng`.
pub fn vrpca_epoch<R: Rng + ?Sized>(
    x: &DataMatrix,
    anchor: &Basis,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<Basis> {
    check_init(x, anchor, anchor.rank())?;
    epoch_impl(&Operator::new(x, &[], cfg.determinism), anchor, cfg, rng)
}

pub(crate) fn epoch_impl<R: Rng + ?Sized>(
    op: &Operator<'_>,
    anchor: &Basis,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<Basis> {
    let x = op.x;
    let sampler = IndexSampler::new(x.count());
    let u_tilde = op.apply(anchor.block())?;
    let eta = cfg.step_eta;

    if anchor.rank() == 1 && !op.is_deflated() && uses_amortized(cfg.epoch_kernel, x) {
        let w = fast_epoch::run_epoch(
            x,
            anchor.as_slice(),
            u_tilde.into_vec(),
            eta,
            cfg.epoch_len_m,
            &sampler,
            rng,
        )?;
        return Basis::new(Block::new(x.dim(), 1, w)?);
    }

    let mut w = anchor.block().clone();
    for _ in 0..cfg.epoch_len_m {
        let i = sampler.sample(rng);
        naive_update(op, i, &mut w, anchor.block(), &u_tilde, eta)?;
        w = if w.cols() == 1 {
            normalize(w)?
        } else {
            gram_schmidt(w)?.into_block()
        };
    }
    Ok(Basis::from_block_unchecked(w))
}

/// `W ← W + η((x_i x_iᵀ − S)(W − W̃) + Ũ)`, column by column, unnormalized.
fn naive_update(
    op: &Operator<'_>,
    i: usize,
    w: &mut Block,
    anchor: &Block,
    u_tilde: &Block,
    eta: f64,
) -> Result<()> {
    let col = op.x.column(i);
    for j in 0..w.cols() {
        let (wj, aj) = (w.column(j), anchor.column(j));
        let p = col.dot(wj) - col.dot(aj);
        let correction = if op.is_deflated() {
            let diff: Vec<f64> = wj.iter().zip(aj).map(|(a, b)| a - b).collect();
            op.minus_deflation(&diff)?
        } else {
            None
        };
        let wj = w.column_mut(j);
        axpy(eta, u_tilde.column(j), wj);
        col.axpy_into(eta * p, wj);
        if let Some(c) = correction {
            axpy(eta, &c, wj);
        }
    }
    Ok(())
}

fn normalize(mut w: Block) -> Result<Block> {
    let nrm = norm_sq(w.as_slice()).sqrt();
    if nrm.is_nan() || nrm < RANK_TOL {
        return Err(Error::RankDeficient {
            column: 0,
            residual: nrm,
        });
    }
    w.scale(1.0 / nrm);
    Ok(w)
}

/// A single dense `O(d)` iteration on a plain vector: the reference the
/// amortized kernel is checked against.
pub fn naive_step(
    x: &DataMatrix,
    w: &mut [f64],
    anchor: &[f64],
    u_tilde: &[f64],
    eta: f64,
    i: usize,
) -> Result<()> {
    let col = x.column(i);
    let p = col.dot(w) - col.dot(anchor);
    axpy(eta, u_tilde, w);
    col.axpy_into(eta * p, w);
    let nrm = norm_sq(w).sqrt();
    if nrm.is_nan() || nrm < RANK_TOL {
        return Err(Error::RankDeficient {
            column: 0,
            residual: nrm,
        });
    }
    w.iter_mut().for_each(|v| *v /= nrm);
    Ok(())
}

/// Runs `epochs_t` epochs from `init`, calling `observer` after each.
/// Every epoch is charged `1 + m/n` effective passes.
pub fn vrpca_solve(
    x: &DataMatrix,
    cfg: &SolverConfig,
    init: &Basis,
    oracle: Option<&OracleResult>,
    observer: &mut Observer<'_>,
) -> Result<Solution> {
    cfg.validate(SolverKind::Vrpca)?;
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
    let mut rng = solver_rng(cfg.seed, VRPCA_STREAM);
    let mut rec = Recorder::new(op.x, oracle, target);
    let per_epoch = cfg.passes_per_epoch(op.x.count());
    rec.record(0, 0.0, init)?;
    let mut anchor = init.clone();
    for s in 1..=cfg.epochs_t {
        anchor = epoch_impl(op, &anchor, cfg, &mut rng)?;
        observer(s, &anchor);
        rec.record(s, s as f64 * per_epoch, &anchor)?;
    }
    Ok(Solution {
        trace: rec.finish(SolverKind::Vrpca, cfg, init.rank()),
        basis: anchor,
    })
}
