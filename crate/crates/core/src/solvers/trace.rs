//! Per-epoch convergence records.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::data::metrics::{self, log_suboptimality, SUBOPT_FLOOR};
use crate::data::oracle::OracleResult;
use crate::error::Result;
use crate::linalg::{Basis, DataMatrix};
use crate::solvers::config::{SolverConfig, SolverKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub effective_passes: f64,
    /// `log10` suboptimality, `-16` at the floor.
    pub log10_subopt: f64,
    /// Squared alignment with the oracle; absent without an oracle.
    pub alignment_sq: Option<f64>,
    /// `‖XᵀB‖²_F` at this record.
    pub objective: f64,
    /// Solver time since the start of the run, excluding metric evaluation.
    pub wall_millis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    /// Denominator is the oracle optimum.
    Oracle,
    /// Denominator is the best objective seen during the run.
    BestObserved,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTrace {
    pub solver: SolverKind,
    pub records: Vec<TraceRecord>,
    pub config: SolverConfig,
    pub metric_reference: f64,
    pub reference_kind: ReferenceKind,
    pub warnings: Vec<String>,
}

impl ConvergenceTrace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn final_log10_subopt(&self) -> f64 {
        self.last().map_or(0.0, |r| r.log10_subopt)
    }

    /// First effective-pass count at which `log10_subopt <= threshold`.
    pub fn passes_to(&self, threshold: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.log10_subopt <= threshold)
            .map(|r| r.effective_passes)
    }

    /// Appends `other`'s records after this trace's last one, shifting epoch
    /// indices and pass counts so both stay monotone.
    pub(crate) fn append_shifted(&mut self, other: ConvergenceTrace) {
        let (epoch0, pass0, ms0) = self
            .last()
            .map_or((0, 0.0, 0.0), |r| (r.epoch, r.effective_passes, r.wall_millis));
        self.records.extend(other.records.into_iter().skip(1).map(|mut r| {
            r.epoch += epoch0;
            r.effective_passes += pass0;
            r.wall_millis += ms0;
            r
        }));
        self.warnings.extend(other.warnings);
        if self.reference_kind == ReferenceKind::BestObserved {
            self.rescore_best_observed();
        }
    }

    /// Recomputes suboptimality against the best objective in the trace.
    pub(crate) fn rescore_best_observed(&mut self) {
        let best = self.records.iter().map(|r| r.objective).fold(0.0, f64::max);
        for r in &mut self.records {
            r.log10_subopt = if best > 0.0 {
                log_suboptimality(r.objective, best)
            } else {
                0.0
            };
        }
        self.metric_reference = best;
        self.reference_kind = ReferenceKind::BestObserved;
    }
}

/// What the trace's metrics are measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Target {
    /// The top-k subspace.
    Leading,
    /// A single oracle eigenvector (0-based index), as in deflation levels.
    Component(usize),
}

/// Collects trace records while a solver runs.
pub(crate) struct Recorder<'a> {
    x: &'a DataMatrix,
    oracle: Option<&'a OracleResult>,
    target: Target,
    started: Instant,
    excluded: Duration,
    records: Vec<TraceRecord>,
}

impl<'a> Recorder<'a> {
    pub fn new(x: &'a DataMatrix, oracle: Option<&'a OracleResult>, target: Target) -> Self {
        Recorder {
            x,
            oracle,
            target,
            started: Instant::now(),
            excluded: Duration::ZERO,
            records: Vec::new(),
        }
    }

    pub fn record(&mut self, epoch: usize, passes: f64, basis: &Basis) -> Result<()> {
        let now = Instant::now();
        let wall_millis = (now - self.started - self.excluded).as_secs_f64() * 1e3;
        let objective = metrics::objective(self.x, basis)?;
        let (log10_subopt, alignment_sq) = match (self.oracle, self.target) {
            (Some(o), Target::Leading) => (
                metrics::suboptimality(self.x, basis, o)?,
                Some(metrics::alignment(basis, o)?),
            ),
            (Some(o), Target::Component(j)) if j < o.rank() => {
                let a = metrics::component_alignment(basis.column(0), o, j)?;
                ((1.0 - a).max(SUBOPT_FLOOR).log10(), Some(a))
            }
            // filled in by `finish`
            _ => (0.0, None),
        };
        self.records.push(TraceRecord {
            epoch,
            effective_passes: passes,
            log10_subopt,
            alignment_sq,
            objective,
            wall_millis,
        });
        self.excluded += now.elapsed();
        Ok(())
    }

    pub fn finish(self, solver: SolverKind, config: &SolverConfig, rank: usize) -> ConvergenceTrace {
        let (metric_reference, reference_kind) = match (self.oracle, self.target) {
            (Some(o), Target::Leading) => (o.opt_objective_at(rank), ReferenceKind::Oracle),
            (Some(o), Target::Component(j)) if j < o.rank() => {
                (o.eigenvalues[j], ReferenceKind::Oracle)
            }
            _ => (0.0, ReferenceKind::BestObserved),
        };
        let mut trace = ConvergenceTrace {
            solver,
            records: self.records,
            config: config.clone(),
            metric_reference,
            reference_kind,
            warnings: Vec::new(),
        };
        if reference_kind == ReferenceKind::BestObserved {
            trace.rescore_best_observed();
        }
        trace
    }
}
