//! Library half of the `jd` binary: command implementations with typed exit
//! codes, reusable from integration tests.
//!
//! Exit codes: 0 success, 2 input error, 3 numeric failure at initialization,
//! 4 internal invariant violation.

pub mod campaign;
pub mod formats;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use jointdiag::metrics;
use jointdiag::solvers::{self, Algorithm, Init};
use jointdiag::Error as JdError;

use campaign::{BenchSpec, HarmonicSpec, SolverOpts};
use formats::{EnsembleFile, MatrixFile, SolveOutput, BENCH_HEADER, HARMONIC_HEADER};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input (exit 2).
    Input(String),
    /// Numeric failure while building the starting point (exit 3).
    InitFailure(String),
    /// A violated invariant inside a solve (exit 4).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::InitFailure(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::InitFailure(m) | CliError::Internal(m) => m,
        }
    }
}

fn classify_solver_error(e: JdError) -> CliError {
    match e {
        JdError::SingularMatrix { .. } | JdError::NoConvergence { .. } => {
            CliError::InitFailure(e.to_string())
        }
        other => CliError::Internal(other.to_string()),
    }
}

/// Parses `eigsum`, `identity`, or `file:PATH` (a JSON [`MatrixFile`]).
pub fn parse_init(spec: &str) -> Result<Init, CliError> {
    match spec {
        "eigsum" => Ok(Init::EigSum),
        "identity" => Ok(Init::Identity),
        other => {
            if let Some(path) = other.strip_prefix("file:") {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
                let file: MatrixFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("{path}: {e}")))?;
                let m = file.to_matrix().map_err(CliError::Input)?;
                Ok(Init::User(m))
            } else {
                Err(CliError::Input(format!(
                    "unknown init '{other}' (expected eigsum, identity, or file:PATH)"
                )))
            }
        }
    }
}

pub struct SolveCmd {
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub algorithm: Algorithm,
    pub opts: SolverOpts,
}

pub fn cmd_solve(cmd: &SolveCmd) -> Result<(), CliError> {
    let text = fs::read_to_string(&cmd.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", cmd.input.display())))?;
    let file: EnsembleFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", cmd.input.display())))?;
    let ensemble = file.to_ensemble().map_err(CliError::Input)?;

    let cfg = cmd.opts.to_config(cmd.algorithm, 0);
    let result = solvers::solve(&ensemble, &cfg).map_err(classify_solver_error)?;
    let out = SolveOutput::from_result(&result, ensemble.len());
    let json = serde_json::to_string_pretty(&out)
        .map_err(|e| CliError::Internal(e.to_string()))?;

    match &cmd.output {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    eprintln!(
        "solved n={} k={}: objective {:.6e} -> {:.6e} in {} iterations ({})",
        out.n, out.k, out.initial_objective, out.final_objective, out.iterations, out.termination
    );
    Ok(())
}

pub struct BenchCmd {
    pub spec: BenchSpec,
    pub output: Option<PathBuf>,
}

pub fn cmd_bench(cmd: &BenchCmd) -> Result<(), CliError> {
    if cmd.spec.runs == 0 {
        return Err(CliError::Input("need at least one run".into()));
    }
    let rows = campaign::run_bench(&cmd.spec);
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    match &cmd.output {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    for (method, snr, median) in campaign::bench_medians(&rows) {
        eprintln!("median log10(objective) [{method} @ {snr} dB] = {median:.4}");
    }
    Ok(())
}

pub struct HarmonicCmd {
    pub spec: HarmonicSpec,
    pub output: Option<PathBuf>,
}

pub fn cmd_harmonic(cmd: &HarmonicCmd) -> Result<(), CliError> {
    if cmd.spec.runs == 0 {
        return Err(CliError::Input("need at least one run".into()));
    }
    if cmd.spec.k_modes == 0 {
        return Err(CliError::Input("need at least one mode".into()));
    }
    let rows = campaign::run_harmonic(&cmd.spec);
    let mut csv = String::from(HARMONIC_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    match &cmd.output {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    // Median frequency error per (method, snr) as the human-readable summary.
    for &snr in &cmd.spec.snrs {
        for &alg in &cmd.spec.algorithms {
            let label = campaign::algorithm_label(alg);
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == label && r.snr_db == snr && r.freq_error.is_finite())
                .map(|r| r.freq_error)
                .collect();
            if !errs.is_empty() {
                eprintln!(
                    "median freq error [{label} @ {snr} dB] = {:.6e}",
                    metrics::median_lower(&errs)
                );
            }
        }
    }
    Ok(())
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(content.as_bytes())
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
