//! File formats: JSON ensembles and results, CSV campaign rows.
//!
//! Matrices serialize as nested arrays of `[re, im]` pairs. Floats go through
//! the shortest-round-trip decimal encoding, so parse(serialize(x)) returns
//! the identical bits.

use jointdiag::cmat::CMatrix;
use jointdiag::objective::MatrixEnsemble;
use jointdiag::solvers::{JdResult, StepDetail, Termination};
use jointdiag::stepsize::StepBranch;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// On-disk ensemble: `{ "n": …, "k": …, "matrices": [[[[re, im]; n]; n]; k] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EnsembleFile {
    pub n: usize,
    pub k: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl EnsembleFile {
    pub fn from_ensemble(e: &MatrixEnsemble) -> Self {
        EnsembleFile {
            n: e.n(),
            k: e.len(),
            matrices: e.matrices().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_ensemble(&self) -> Result<MatrixEnsemble, String> {
        if self.matrices.len() != self.k {
            return Err(format!(
                "matrix count {} does not match k = {}",
                self.matrices.len(),
                self.k
            ));
        }
        let mats = self
            .matrices
            .iter()
            .map(|rows| rows_to_matrix(rows, self.n))
            .collect::<Result<Vec<_>, String>>()?;
        MatrixEnsemble::new(mats).map_err(|e| e.to_string())
    }
}

/// On-disk single matrix: `{ "n": …, "matrix": [[[re, im]; n]; n] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixFile {
            n: m.n_rows(),
            matrix: matrix_to_rows(m),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, String> {
        rows_to_matrix(&self.matrix, self.n)
    }
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.n_rows())
        .map(|i| m.row(i).iter().map(|v| [v.re, v.im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>], n: usize) -> Result<CMatrix, String> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format!("expected a {n}x{n} matrix"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// JSON result of a single solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveOutput {
    pub n: usize,
    pub k: usize,
    pub termination: String,
    pub final_objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub u: Vec<Vec<[f64; 2]>>,
    pub diagonals: Vec<Vec<[f64; 2]>>,
    pub trace: Vec<TraceRowOut>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceRowOut {
    pub iter: usize,
    pub objective: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    pub clipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback: Option<bool>,
}

pub fn termination_label(t: Termination) -> &'static str {
    match t {
        Termination::MaxIters => "max_iters",
        Termination::RelTol => "rel_tol",
        Termination::Stalled => "stalled",
    }
}

impl SolveOutput {
    pub fn from_result(r: &JdResult, k: usize) -> Self {
        let trace = r
            .trace
            .iter()
            .map(|row| {
                let branch = row.branch.map(|b| {
                    match b {
                        StepBranch::Hessian => "hessian",
                        StepBranch::GaussNewton => "gauss_newton",
                    }
                    .to_string()
                });
                let (beta, inner_iters, fallback) = match row.detail {
                    StepDetail::ConjugateGradient { beta, beta_zeroed } => {
                        (Some(beta), None, Some(beta_zeroed))
                    }
                    StepDetail::QuasiNewton {
                        inner_iters,
                        gradient_fallback,
                    } => (None, Some(inner_iters), Some(gradient_fallback)),
                    _ => (None, None, None),
                };
                TraceRowOut {
                    iter: row.iter,
                    objective: row.objective,
                    lambda: row.lambda,
                    branch,
                    clipped: row.clipped,
                    beta,
                    inner_iters,
                    fallback,
                }
            })
            .collect();
        SolveOutput {
            n: r.u.n_rows(),
            k,
            termination: termination_label(r.termination).to_string(),
            final_objective: r.final_objective(),
            initial_objective: r.initial_objective(),
            iterations: r.iterations(),
            wall_time_s: r.wall_time,
            u: matrix_to_rows(&r.u),
            diagonals: r
                .diagonals
                .iter()
                .map(|d| d.iter().map(|v| [v.re, v.im]).collect())
                .collect(),
            trace,
        }
    }
}

pub const BENCH_HEADER: &str = "seed,n,k,snr_db,algorithm,update_mode,init,final_objective,log10_objective,eig_error,iterations,termination,wall_time_s";

/// One campaign result (one seed × one method).
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub snr_db: f64,
    pub algorithm: String,
    pub update_mode: String,
    pub init: String,
    pub final_objective: f64,
    pub eig_error: f64,
    pub iterations: usize,
    pub termination: String,
    pub wall_time_s: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.seed,
            self.n,
            self.k,
            self.snr_db,
            self.algorithm,
            self.update_mode,
            self.init,
            self.final_objective,
            self.final_objective.log10(),
            self.eig_error,
            self.iterations,
            self.termination,
            self.wall_time_s
        )
    }
}

pub const HARMONIC_HEADER: &str = "seed,snr_db,method,final_objective,freq_error,iters,wall_time";

#[derive(Clone, Debug)]
pub struct HarmonicRow {
    pub seed: u64,
    pub snr_db: f64,
    pub method: String,
    pub final_objective: f64,
    pub freq_error: f64,
    pub iters: usize,
    pub wall_time: f64,
}

impl HarmonicRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.seed,
            self.snr_db,
            self.method,
            self.final_objective,
            self.freq_error,
            self.iters,
            self.wall_time
        )
    }
}
