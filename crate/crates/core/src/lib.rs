//! Leading principal components of a finite data matrix by variance-reduced
//! stochastic iteration (VR-PCA), with Oja's rule, block power iteration and
//! an Oja-then-VR-PCA hybrid as baselines.
//!
//! The crate is split into
//!
//! * [`linalg`]: data storage, `A·B` without forming `A`, Gram-Schmidt, deflation;
//! * [`solvers`]: the iterative methods, traces and parameter planners;
//! * [`fast_epoch`]: the `O(nnz)` per-iteration VR-PCA epoch for sparse data;
//! * [`data`]: synthetic spectra, dataset files, the dense oracle and metrics.

pub mod data;
pub mod error;
pub mod fast_epoch;
pub mod linalg;
pub mod solvers;

pub use data::{oracle_compute, synth_generate, OracleResult, SpectrumSpec};
pub use error::{Error, Result};
pub use linalg::{covariance_apply, deflated_apply, gram_schmidt, Basis, Block, DataMatrix, DeflationPair};
pub use solvers::{
    deflation_solve, hybrid_solve, oja_solve, power_solve, random_init, solve, vrpca_solve,
    ConvergenceTrace, SolverConfig, SolverKind, Solution,
};
