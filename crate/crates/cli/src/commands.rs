use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use vrpca_core::data::oracle::MAX_ORACLE_DIM;
use vrpca_core::data::{read_dataset, write_dataset, DataFormat};
use vrpca_core::solvers::{
    deflation_solve, heuristic_params, random_init, solve as run_solver, theory_params,
    ConvergenceTrace, TheoryConstants, TheoryParams,
};
use vrpca_core::{oracle_compute, synth_generate, DataMatrix, OracleResult, SolverConfig, SolverKind, SpectrumSpec};

use crate::error::CliError;
use crate::output::{
    display, expand_basis, expand_vector, fmt_f64, manifest_path, sha256_file, unix_seconds, with_suffix,
    write_basis, write_json, write_trace, DatasetInfo, Manifest, OracleSummary, SUMMARY_HEADER,
};
use crate::{CompareArgs, DataArgs, GenerateArgs, ParamsArg, SolveArgs};

#[derive(Serialize)]
struct GenerateDetails {
    spec: SpectrumSpec,
    format: DataFormat,
    sha256: String,
    /// `D_jj² / n` for the prescribed head.
    expected_eigenvalues: Vec<f64>,
    /// `s_1 − s_2` of the covariance, as opposed to the singular-value gap λ.
    covariance_eigengap: f64,
}

pub fn generate(args: &GenerateArgs, argv: &[String]) -> Result<(), CliError> {
    let started = unix_seconds();
    let mut spec = SpectrumSpec::desk(args.lambda, args.seed);
    spec.dim = args.d;
    spec.count = args.n;
    if let Some(s) = args.tail_seed {
        spec.tail_seed = s;
    }
    if let Some(s) = args.matrix_seed {
        spec.matrix_seed = s;
    }
    spec.validate()?;
    let format = resolve_format(&args.out, args.format.map(Into::into))?;
    let x = synth_generate(&spec)?;
    write_dataset(&x, &args.out, Some(format))?;

    let n = spec.count as f64;
    let expected_eigenvalues: Vec<f64> = spec.head().iter().map(|s| s * s / n).collect();
    let details = GenerateDetails {
        spec,
        format,
        sha256: sha256_file(&args.out)?,
        covariance_eigengap: expected_eigenvalues[0] - expected_eigenvalues[1],
        expected_eigenvalues,
    };
    let manifest = Manifest {
        command: argv.to_vec(),
        started_unix: started,
        finished_unix: unix_seconds(),
        outputs: vec![display(&args.out)],
        reference_kind: None,
        warnings: Vec::new(),
        details,
    };
    write_json(&manifest_path(&args.out), &manifest)
}

fn resolve_format(path: &Path, given: Option<DataFormat>) -> Result<DataFormat, CliError> {
    given.or_else(|| DataFormat::from_path(path)).ok_or_else(|| {
        CliError::Usage(format!(
            "cannot infer a format from {}; pass --format",
            path.display()
        ))
    })
}

/// A dataset ready for solving: compacted rows and an optional oracle.
struct Loaded {
    x: DataMatrix,
    kept: Vec<usize>,
    info: DatasetInfo,
    oracle: Option<OracleResult>,
    warnings: Vec<String>,
}

fn load(args: &DataArgs, oracle_rank: usize) -> Result<Loaded, CliError> {
    let format = resolve_format(&args.input, args.format.map(Into::into))?;
    let raw = read_dataset(&args.input, Some(format))?;
    let (x, kept) = if raw.is_sparse() {
        raw.compact_rows()
    } else {
        let d = raw.dim();
        (raw.clone(), (0..d).collect())
    };
    let info = DatasetInfo {
        path: display(&args.input),
        sha256: sha256_file(&args.input)?,
        dim: raw.dim(),
        count: raw.count(),
        nnz: raw.nnz(),
        sparse: raw.is_sparse(),
        dropped_rows: raw.dim() - x.dim(),
    };
    if oracle_rank > x.dim() {
        return Err(CliError::Usage(format!(
            "k = {oracle_rank} exceeds the {} nonzero coordinates",
            x.dim()
        )));
    }
    let mut warnings = Vec::new();
    let oracle = if args.no_oracle {
        None
    } else if x.dim() > MAX_ORACLE_DIM {
        warnings.push(format!(
            "dimension {} exceeds the oracle limit {MAX_ORACLE_DIM}; using best-observed suboptimality",
            x.dim()
        ));
        None
    } else {
        Some(oracle_compute(&x, oracle_rank)?)
    };
    Ok(Loaded {
        x,
        kept,
        info,
        oracle,
        warnings,
    })
}

#[derive(Serialize)]
struct SolveDetails<'a> {
    solver: SolverKind,
    params: &'a str,
    deflate: bool,
    config: SolverConfig,
    dataset: DatasetInfo,
    oracle: Option<OracleSummary>,
    theory: Option<TheoryParams>,
    /// Rows of the trace belonging to each deflation level.
    level_rows: Option<Vec<usize>>,
    eigenvalues: Option<Vec<f64>>,
}

pub fn solve(args: &SolveArgs, argv: &[String]) -> Result<(), CliError> {
    let started = unix_seconds();
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if args.epochs == Some(0) {
        return Err(CliError::Usage("--epochs must be at least 1".into()));
    }
    let kind: SolverKind = args.solver.into();
    let loaded = load(&args.data, args.k)?;
    let x = &loaded.x;
    let (cfg, theory) = solve_config(args, kind, x, loaded.oracle.as_ref())?;
    let mut warnings = loaded.warnings.clone();

    let (trace, columns, level_rows, eigenvalues) = if args.deflate {
        let result = deflation_solve(x, &cfg, args.k, kind, loaded.oracle.as_ref())?;
        warnings.extend(result.warnings.iter().cloned());
        let level_rows = result.traces.iter().map(|t| t.records.len()).collect();
        let mut traces = result.traces.into_iter();
        let mut trace = traces.next().expect("at least one level");
        for t in traces {
            concat(&mut trace, t);
        }
        let columns = result
            .pairs
            .iter()
            .map(|p| expand_vector(&p.vector, &loaded.kept, loaded.info.dim))
            .collect();
        let eigenvalues = result.pairs.iter().map(|p| p.eigenvalue).collect();
        (trace, columns, Some(level_rows), Some(eigenvalues))
    } else {
        let init = random_init(x.dim(), args.k, args.seed)?;
        let sol = run_solver(kind, x, &cfg, &init, loaded.oracle.as_ref(), &mut |_, _| {})?;
        warnings.extend(sol.trace.warnings.iter().cloned());
        let columns = expand_basis(&sol.basis, &loaded.kept, loaded.info.dim);
        (sol.trace, columns, None, None)
    };

    write_trace(&args.trace_out, &trace, args.data.deterministic)?;
    let mut outputs = vec![display(&args.trace_out)];
    if let Some(path) = &args.basis_out {
        write_basis(path, &columns)?;
        outputs.push(display(path));
    }
    let details = SolveDetails {
        solver: kind,
        params: params_name(args.params),
        deflate: args.deflate,
        config: cfg,
        dataset: loaded.info,
        oracle: loaded.oracle.as_ref().map(Into::into),
        theory,
        level_rows,
        eigenvalues,
    };
    let manifest = Manifest {
        command: argv.to_vec(),
        started_unix: started,
        finished_unix: unix_seconds(),
        outputs,
        reference_kind: Some(trace.reference_kind),
        warnings,
        details,
    };
    write_json(&manifest_path(&args.trace_out), &manifest)
}

fn params_name(p: ParamsArg) -> &'static str {
    match p {
        ParamsArg::Heuristic => "heuristic",
        ParamsArg::Theory => "theory",
        ParamsArg::Manual => "manual",
    }
}

/// Deflation levels run back to back; later levels continue the epoch and
/// pass counts of earlier ones.
fn concat(trace: &mut ConvergenceTrace, next: ConvergenceTrace) {
    let (epoch0, pass0, ms0) = trace
        .last()
        .map_or((0, 0.0, 0.0), |r| (r.epoch, r.effective_passes, r.wall_millis));
    trace.records.extend(next.records.into_iter().map(|mut r| {
        r.epoch += epoch0 + 1;
        r.effective_passes += pass0;
        r.wall_millis += ms0;
        r
    }));
}

fn solve_config(
    args: &SolveArgs,
    kind: SolverKind,
    x: &DataMatrix,
    oracle: Option<&OracleResult>,
) -> Result<(SolverConfig, Option<TheoryParams>), CliError> {
    let epochs = args.epochs.unwrap_or(10);
    let mut cfg = SolverConfig::heuristic(x, epochs, args.seed)?.with_rank(args.k);
    cfg.oja_step_c = args.oja_c / x.mean_sq_norm();
    cfg.determinism = args.data.deterministic;
    let mut theory = None;
    match args.params {
        ParamsArg::Heuristic => {
            if args.eta.is_some() || args.m.is_some() {
                return Err(CliError::Usage("--eta and --m require --params manual".into()));
            }
        }
        ParamsArg::Manual => {
            let (Some(eta), Some(m)) = (args.eta, args.m) else {
                return Err(CliError::Usage("--params manual requires --eta and --m".into()));
            };
            cfg.step_eta = eta;
            cfg.epoch_len_m = m;
        }
        ParamsArg::Theory => {
            let (Some(delta), Some(epsilon)) = (args.delta, args.epsilon) else {
                return Err(CliError::Usage("--params theory requires --delta and --epsilon".into()));
            };
            let lambda = match (args.lambda_gap, oracle) {
                (Some(l), _) => l,
                (None, Some(o)) => o.eigengap().unwrap_or(0.0),
                (None, None) => {
                    return Err(CliError::Usage(
                        "--params theory needs --lambda-gap when the oracle is skipped".into(),
                    ))
                }
            };
            let p = theory_params(x.max_sq_norm(), lambda, delta, epsilon, TheoryConstants::default())?;
            if !p.satisfied {
                return Err(CliError::Usage(format!(
                    "theory parameters eta = {:e}, m = {} violate the step, length or variance \
                     condition for r = {}, lambda = {lambda}, delta = {delta}",
                    p.eta,
                    p.m,
                    x.max_sq_norm()
                )));
            }
            cfg.step_eta = p.eta;
            cfg.epoch_len_m = usize::try_from(p.m)
                .map_err(|_| CliError::Usage(format!("epoch length {} is too large", p.m)))?;
            if args.epochs.is_none() {
                cfg.epochs_t = p.epochs as usize;
            }
            theory = Some(p);
        }
    }
    cfg.power_iters = cfg.epochs_t;
    cfg.validate(kind)?;
    Ok((cfg, theory))
}

struct Entry {
    label: String,
    kind: SolverKind,
    params: String,
    cfg: SolverConfig,
}

#[derive(Serialize)]
struct CompareDetails {
    budget_passes: usize,
    configs: Vec<(String, SolverConfig)>,
    dataset: DatasetInfo,
    oracle: Option<OracleSummary>,
}

pub fn compare(args: &CompareArgs, argv: &[String]) -> Result<(), CliError> {
    let started = unix_seconds();
    if args.k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    if args.budget_passes < 2 {
        return Err(CliError::Usage("--budget-passes must be at least 2".into()));
    }
    if args.oja_grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        return Err(CliError::Usage("--oja-grid entries must be positive".into()));
    }
    let loaded = load(&args.data, args.k)?;
    let x = &loaded.x;
    let entries = compare_entries(args, x)?;
    let init = random_init(x.dim(), args.k, args.seed)?;
    let oracle = loaded.oracle.as_ref();

    let results: Vec<Result<ConvergenceTrace, CliError>> = entries
        .par_iter()
        .map(|e| {
            run_solver(e.kind, x, &e.cfg, &init, oracle, &mut |_, _| {})
                .map(|s| s.trace)
                .map_err(Into::into)
        })
        .collect();

    let mut outputs = Vec::new();
    let mut warnings = loaded.warnings.clone();
    let summary_path = with_suffix(&args.out_prefix, "-summary.csv");
    let mut summary = csv::Writer::from_path(&summary_path)?;
    summary.write_record(SUMMARY_HEADER)?;
    let mut reference_kind = None;
    for (entry, result) in entries.iter().zip(results) {
        let trace = result?;
        let path = with_suffix(&args.out_prefix, &format!("-{}.csv", entry.label));
        write_trace(&path, &trace, args.data.deterministic)?;
        outputs.push(display(&path));
        warnings.extend(trace.warnings.iter().map(|w| format!("{}: {w}", entry.label)));
        reference_kind = Some(trace.reference_kind);
        let reached = |t: f64| trace.passes_to(t).map(fmt_f64).unwrap_or_default();
        summary.write_record([
            entry.kind.name().to_string(),
            entry.params.clone(),
            fmt_f64(trace.final_log10_subopt()),
            reached(-3.0),
            reached(-6.0),
            reached(-9.0),
        ])?;
    }
    summary.flush()?;
    outputs.push(display(&summary_path));

    let details = CompareDetails {
        budget_passes: args.budget_passes,
        configs: entries.into_iter().map(|e| (e.label, e.cfg)).collect(),
        dataset: loaded.info,
        oracle: oracle.map(Into::into),
    };
    let manifest = Manifest {
        command: argv.to_vec(),
        started_unix: started,
        finished_unix: unix_seconds(),
        outputs,
        reference_kind,
        warnings,
        details,
    };
    write_json(&with_suffix(&args.out_prefix, "-manifest.json"), &manifest)
}

/// Every solver sized to the pass budget: VR-PCA epochs cost `1 + m/n`
/// passes, Oja and power one per pass or round, the hybrid one warm-start
/// pass plus VR-PCA epochs.
fn compare_entries(args: &CompareArgs, x: &DataMatrix) -> Result<Vec<Entry>, CliError> {
    let budget = args.budget_passes;
    let r_bar = x.mean_sq_norm();
    let (eta, m) = heuristic_params(x)?;
    let base = |index: u64| -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::heuristic(x, budget, args.seed.wrapping_add(index))?.with_rank(args.k);
        cfg.determinism = args.data.deterministic;
        Ok(cfg)
    };
    let per_epoch = 1.0 + m as f64 / x.count() as f64;
    let mut entries = Vec::new();

    let mut cfg = base(0)?;
    cfg.epochs_t = (budget as f64 / per_epoch).floor() as usize;
    entries.push(Entry {
        label: "vrpca".into(),
        kind: SolverKind::Vrpca,
        params: format!("eta={};m={m};epochs={}", fmt_f64(eta), cfg.epochs_t),
        cfg,
    });

    let mut cfg = base(1)?;
    cfg.power_iters = budget;
    entries.push(Entry {
        label: "power".into(),
        kind: SolverKind::Power,
        params: format!("rounds={budget}"),
        cfg,
    });

    for (j, &c) in args.oja_grid.iter().enumerate() {
        let mut cfg = base(2 + j as u64)?;
        cfg.oja_step_c = c / r_bar;
        cfg.epochs_t = budget;
        entries.push(Entry {
            label: format!("oja-c{c}"),
            kind: SolverKind::Oja,
            params: format!("c={c}/rbar;passes={budget}"),
            cfg,
        });
    }

    let mut cfg = base(2 + args.oja_grid.len() as u64)?;
    cfg.oja_step_c = args.hybrid_c / r_bar;
    cfg.epochs_t = ((budget - 1) as f64 / per_epoch).floor() as usize;
    entries.push(Entry {
        label: "hybrid".into(),
        kind: SolverKind::Hybrid,
        params: format!(
            "c={}/rbar;eta={};m={m};epochs={}",
            args.hybrid_c,
            fmt_f64(eta),
            cfg.epochs_t
        ),
        cfg,
    });
    for e in &entries {
        e.cfg.validate(e.kind)?;
    }
    Ok(entries)
}
