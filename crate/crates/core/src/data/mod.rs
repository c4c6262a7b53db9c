//! Synthetic data, dataset files, the dense oracle and evaluation metrics.

pub mod io;
pub mod metrics;
pub mod oracle;
pub mod synth;

pub use io::{read_dataset, write_dataset, DataFormat};
pub use metrics::{alignment, objective, suboptimality, SUBOPT_FLOOR};
pub use oracle::{oracle_compute, OracleResult};
pub use synth::{sparse_random, synth_generate, SpectrumSpec};
