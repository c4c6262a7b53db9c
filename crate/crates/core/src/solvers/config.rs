use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;
use crate::solvers::params::heuristic_params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Vrpca,
    Oja,
    Power,
    Hybrid,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Vrpca => "vrpca",
            SolverKind::Oja => "oja",
            SolverKind::Power => "power",
            SolverKind::Hybrid => "hybrid",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vrpca" => Ok(SolverKind::Vrpca),
            "oja" => Ok(SolverKind::Oja),
            "power" => Ok(SolverKind::Power),
            "hybrid" => Ok(SolverKind::Hybrid),
            other => Err(Error::domain(format!("unknown solver {other:?}"))),
        }
    }
}

/// Which implementation runs the inner loop of a `k = 1` VR-PCA epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpochKernel {
    /// Amortized kernel for sparse storage, dense updates otherwise.
    #[default]
    Auto,
    Naive,
    Amortized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Fixed VR-PCA step size.
    pub step_eta: f64,
    /// Iterations per VR-PCA epoch.
    pub epoch_len_m: usize,
    /// VR-PCA epochs, or Oja passes over the data.
    pub epochs_t: usize,
    pub seed: u64,
    pub rank_k: usize,
    /// Oja step is `oja_step_c / t`.
    pub oja_step_c: f64,
    pub power_iters: usize,
    /// Forces serial reductions. Results are bit-reproducible either way.
    pub determinism: bool,
    #[serde(default)]
    pub epoch_kernel: EpochKernel,
}

impl SolverConfig {
    /// VR-PCA with `m = n`, `η = 1/(r̄√n)`; Oja with `c = 1/r̄`.
    pub fn heuristic(x: &DataMatrix, epochs: usize, seed: u64) -> Result<Self> {
        let (eta, m) = heuristic_params(x)?;
        Ok(SolverConfig {
            step_eta: eta,
            epoch_len_m: m,
            epochs_t: epochs,
            seed,
            rank_k: 1,
            oja_step_c: 1.0 / x.mean_sq_norm(),
            power_iters: epochs,
            determinism: true,
            epoch_kernel: EpochKernel::Auto,
        })
    }

    pub fn with_rank(mut self, k: usize) -> Self {
        self.rank_k = k;
        self
    }

    /// Effective data passes charged for one epoch: `1 + m/n`.
    pub fn passes_per_epoch(&self, n: usize) -> f64 {
        1.0 + self.epoch_len_m as f64 / n as f64
    }

    /// Checks the fields `kind` relies on. Zero step sizes are accepted and
    /// leave the iterate unchanged.
    pub fn validate(&self, kind: SolverKind) -> Result<()> {
        if self.rank_k == 0 {
            return Err(Error::domain("rank k must be at least 1"));
        }
        match kind {
            SolverKind::Vrpca | SolverKind::Hybrid => {
                if !(self.step_eta >= 0.0 && self.step_eta.is_finite()) {
                    return Err(Error::domain(format!("invalid step size {}", self.step_eta)));
                }
                if self.epoch_len_m == 0 {
                    return Err(Error::domain("epoch length m must be at least 1"));
                }
                if kind == SolverKind::Vrpca && self.epochs_t == 0 {
                    return Err(Error::domain("epochs T must be at least 1"));
                }
            }
            SolverKind::Oja => {
                if self.epochs_t == 0 {
                    return Err(Error::domain("Oja needs at least one pass"));
                }
            }
            SolverKind::Power => {
                if self.power_iters == 0 {
                    return Err(Error::domain("power iterations must be at least 1"));
                }
            }
        }
        if matches!(kind, SolverKind::Oja | SolverKind::Hybrid)
            && !(self.oja_step_c >= 0.0 && self.oja_step_c.is_finite())
        {
            return Err(Error::domain(format!("invalid Oja step constant {}", self.oja_step_c)));
        }
        Ok(())
    }
}
