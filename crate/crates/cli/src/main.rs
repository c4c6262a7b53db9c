use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod output;

use error::CliError;

/// Generate datasets, run PCA solvers and compare their convergence.
#[derive(Debug, Parser)]
#[command(name = "vrpca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset with a controlled spectrum.
    Generate(GenerateArgs),
    /// Run one solver and write its convergence trace.
    Solve(SolveArgs),
    /// Run every solver under a shared pass budget and summarize.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    DenseBinary,
    SparseText,
    DenseText,
}

impl From<FormatArg> for vrpca_core::data::DataFormat {
    fn from(f: FormatArg) -> Self {
        use vrpca_core::data::DataFormat;
        match f {
            FormatArg::DenseBinary => DataFormat::DenseBinary,
            FormatArg::SparseText => DataFormat::SparseText,
            FormatArg::DenseText => DataFormat::DenseText,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Vrpca,
    Oja,
    Power,
    Hybrid,
}

impl From<SolverArg> for vrpca_core::SolverKind {
    fn from(s: SolverArg) -> Self {
        use vrpca_core::SolverKind;
        match s {
            SolverArg::Vrpca => SolverKind::Vrpca,
            SolverArg::Oja => SolverKind::Oja,
            SolverArg::Power => SolverKind::Power,
            SolverArg::Hybrid => SolverKind::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamsArg {
    Heuristic,
    Theory,
    Manual,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    pub d: usize,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Gap between the two leading singular values, in (0, 0.5).
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed for the spectrum tail (defaults to one derived from --seed).
    #[arg(long)]
    pub tail_seed: Option<u64>,
    /// Seed for the orthogonal factors (defaults to one derived from --seed).
    #[arg(long)]
    pub matrix_seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Skip the dense oracle; suboptimality then uses the best objective seen.
    #[arg(long)]
    pub no_oracle: bool,
    /// Serial reductions and zeroed wall-clock column, for bit-identical traces.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "vrpca")]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "heuristic")]
    pub params: ParamsArg,
    /// VR-PCA step size (manual params).
    #[arg(long)]
    pub eta: Option<f64>,
    /// VR-PCA epoch length (manual params).
    #[arg(long)]
    pub m: Option<usize>,
    /// Epochs (VR-PCA, hybrid), passes (Oja) or rounds (power).
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Oja step constant c in eta_t = c / t, in units of 1/r̄.
    #[arg(long, default_value_t = 10.0)]
    pub oja_c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Failure probability for theory params.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Target accuracy for theory params.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Covariance eigengap for theory params (oracle value when omitted).
    #[arg(long)]
    pub lambda_gap: Option<f64>,
    /// Recover the k eigenvectors one at a time by deflation.
    #[arg(long)]
    pub deflate: bool,
    #[arg(long)]
    pub trace_out: PathBuf,
    /// Also write the final basis, one column per CSV row.
    #[arg(long)]
    pub basis_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 20)]
    pub budget_passes: usize,
    /// Oja step constants, in units of 1/r̄.
    #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
    pub oja_grid: Vec<f64>,
    /// Oja step constant for the hybrid warm start, in units of 1/r̄.
    #[arg(long, default_value_t = 10.0)]
    pub hybrid_c: f64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_prefix: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(e.code());
    }
    let argv: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(&args, &argv),
        Command::Solve(args) => commands::solve(&args, &argv),
        Command::Compare(args) => commands::compare(&args, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

/// Honors `VRPCA_THREADS` for the worker pool size.
fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("VRPCA_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .map_err(|_| CliError::Usage(format!("VRPCA_THREADS must be a number, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
