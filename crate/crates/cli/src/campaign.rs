//! Seeded campaign execution: independent jobs fan out to a worker pool and
//! come back in deterministic (seed-major) order. JD_THREADS caps the pool.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use jointdiag::ensemble::{self, GroundTruth};
use jointdiag::harmonic::{self, HarmonicModel};
use jointdiag::metrics;
use jointdiag::solvers::{self, Algorithm, Init, SolverConfig, UpdateMode};

use crate::formats::{termination_label, BenchRow, HarmonicRow};

pub fn worker_count() -> usize {
    if let Ok(v) = std::env::var("JD_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Runs `jobs` closures on the pool; the output vector is indexed by job, so
/// ordering is independent of scheduling.
pub fn run_ordered<T, F>(jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = worker_count().min(jobs.max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..jobs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs {
                    break;
                }
                let out = f(idx);
                results.lock().unwrap()[idx] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|v| v.expect("job completed"))
        .collect()
}

/// Solver settings shared by campaign commands.
#[derive(Clone, Debug)]
pub struct SolverOpts {
    pub update: UpdateMode,
    pub init: Init,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub qn_inner_max: usize,
    pub qn_inner_reduction: f64,
    pub lambda_margin: f64,
}

impl Default for SolverOpts {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverOpts {
            update: d.update,
            init: d.init,
            max_iters: d.max_iters,
            rel_tol: d.rel_tol,
            qn_inner_max: d.qn_inner_max,
            qn_inner_reduction: d.qn_inner_reduction,
            lambda_margin: d.lambda_margin,
        }
    }
}

impl SolverOpts {
    pub fn to_config(&self, algorithm: Algorithm, seed: u64) -> SolverConfig {
        SolverConfig {
            algorithm,
            update: self.update,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            qn_inner_max: self.qn_inner_max,
            qn_inner_reduction: self.qn_inner_reduction,
            init: self.init.clone(),
            seed,
            lambda_margin: self.lambda_margin,
            qn_inner_start: SolverConfig::default().qn_inner_start,
            force_beta_zero: false,
        }
    }
}

pub fn algorithm_label(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Gd => "gd",
        Algorithm::Cg => "cg",
        Algorithm::Qn => "qn",
    }
}

pub fn update_label(u: UpdateMode) -> &'static str {
    match u {
        UpdateMode::Multiplicative => "mult",
        UpdateMode::Additive => "add",
    }
}

pub fn init_label(init: &Init) -> &'static str {
    match init {
        Init::EigSum => "eigsum",
        Init::Identity => "identity",
        Init::User(_) => "file",
    }
}

pub struct BenchSpec {
    pub n: usize,
    pub k: usize,
    pub snrs: Vec<f64>,
    pub runs: u64,
    pub seed0: u64,
    pub algorithms: Vec<Algorithm>,
    pub opts: SolverOpts,
}

/// One seed of a benchmark campaign: the baseline row (objective of the raw
/// initializer, zero iterations) plus one row per algorithm. A failed solve
/// becomes a stalled row with NaN scores rather than aborting the campaign.
fn bench_seed(spec: &BenchSpec, snr_db: f64, seed: u64) -> Vec<BenchRow> {
    let gt: GroundTruth = ensemble::generate(spec.n, spec.k, snr_db, seed);
    let mut rows = Vec::with_capacity(spec.algorithms.len() + 1);
    let make_row = |algorithm: &str, update: &str| BenchRow {
        seed,
        n: spec.n,
        k: spec.k,
        snr_db,
        algorithm: algorithm.to_string(),
        update_mode: update.to_string(),
        init: init_label(&spec.opts.init).to_string(),
        final_objective: f64::NAN,
        eig_error: f64::NAN,
        iterations: 0,
        termination: "stalled".to_string(),
        wall_time_s: 0.0,
    };

    // Baseline: the initializer itself, solved with zero iterations.
    let mut init_row = make_row("init", "-");
    let init_cfg = SolverConfig {
        max_iters: 0,
        ..spec.opts.to_config(Algorithm::Gd, seed)
    };
    if let Ok(r) = solvers::solve(&gt.noisy, &init_cfg) {
        init_row.final_objective = r.final_objective();
        init_row.eig_error = metrics::eigenvalue_error(&r, &gt)
            .map(|e| e.total_error)
            .unwrap_or(f64::NAN);
        init_row.termination = termination_label(r.termination).to_string();
        init_row.wall_time_s = r.wall_time;
    }
    rows.push(init_row);

    for &alg in &spec.algorithms {
        let mut row = make_row(algorithm_label(alg), update_label(spec.opts.update));
        if let Ok(r) = solvers::solve(&gt.noisy, &spec.opts.to_config(alg, seed)) {
            row.final_objective = r.final_objective();
            row.eig_error = metrics::eigenvalue_error(&r, &gt)
                .map(|e| e.total_error)
                .unwrap_or(f64::NAN);
            row.iterations = r.iterations();
            row.termination = termination_label(r.termination).to_string();
            row.wall_time_s = r.wall_time;
        }
        rows.push(row);
    }
    rows
}

/// Full campaign in deterministic output order: SNR-major, seed within SNR,
/// then the declared method order inside each seed block.
pub fn run_bench(spec: &BenchSpec) -> Vec<BenchRow> {
    let jobs: Vec<(f64, u64)> = spec
        .snrs
        .iter()
        .flat_map(|&snr| (0..spec.runs).map(move |i| (snr, spec.seed0 + i)))
        .collect();
    run_ordered(jobs.len(), |idx| {
        let (snr, seed) = jobs[idx];
        bench_seed(spec, snr, seed)
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Median of log10(final objective) per method label over finite rows.
pub fn bench_medians(rows: &[BenchRow]) -> Vec<(String, f64, f64)> {
    let mut order: Vec<(String, f64)> = Vec::new();
    for row in rows {
        if !order
            .iter()
            .any(|(m, s)| *m == row.algorithm && *s == row.snr_db)
        {
            order.push((row.algorithm.clone(), row.snr_db));
        }
    }
    order
        .into_iter()
        .map(|(method, snr)| {
            let logs: Vec<f64> = rows
                .iter()
                .filter(|r| r.algorithm == method && r.snr_db == snr && r.final_objective.is_finite())
                .map(|r| r.final_objective.log10())
                .collect();
            let med = if logs.is_empty() {
                f64::NAN
            } else {
                metrics::median_lower(&logs)
            };
            (method, snr, med)
        })
        .collect()
}

pub struct HarmonicSpec {
    pub k_modes: usize,
    pub grid_edge: usize,
    pub snrs: Vec<f64>,
    pub runs: u64,
    pub seed0: u64,
    pub algorithms: Vec<Algorithm>,
    pub opts: SolverOpts,
}

fn harmonic_seed(spec: &HarmonicSpec, snr_db: f64, seed: u64) -> Vec<HarmonicRow> {
    let grid = (spec.grid_edge, spec.grid_edge, spec.grid_edge);
    let model = HarmonicModel::random(spec.k_modes, grid, snr_db, seed);
    let cube = harmonic::synthesize(&model);
    let make_row = |method: &str| HarmonicRow {
        seed,
        snr_db,
        method: method.to_string(),
        final_objective: f64::NAN,
        freq_error: f64::NAN,
        iters: 0,
        wall_time: 0.0,
    };
    let reduced = match harmonic::esprit_reduce(&cube, spec.k_modes) {
        Ok(e) => e,
        // Rank-deficient embeddings are recorded and skipped.
        Err(_) => {
            return spec
                .algorithms
                .iter()
                .map(|&a| {
                    let mut r = make_row(algorithm_label(a));
                    r.method.push_str("-rankdeficient");
                    r
                })
                .collect()
        }
    };
    spec.algorithms
        .iter()
        .map(|&alg| {
            let mut row = make_row(algorithm_label(alg));
            if let Ok(r) = solvers::solve(&reduced, &spec.opts.to_config(alg, seed)) {
                row.final_objective = r.final_objective();
                row.iters = r.iterations();
                row.wall_time = r.wall_time;
                if let Ok(est) = harmonic::recover_frequencies(&r) {
                    row.freq_error = harmonic::frequency_error(&est, &model.freqs)
                        .unwrap_or(f64::NAN);
                }
            }
            row
        })
        .collect()
}

pub fn run_harmonic(spec: &HarmonicSpec) -> Vec<HarmonicRow> {
    let jobs: Vec<(f64, u64)> = spec
        .snrs
        .iter()
        .flat_map(|&snr| (0..spec.runs).map(move |i| (snr, spec.seed0 + i)))
        .collect();
    run_ordered(jobs.len(), |idx| {
        let (snr, seed) = jobs[idx];
        harmonic_seed(spec, snr, seed)
    })
    .into_iter()
    .flatten()
    .collect()
}

