use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jointdiag::solvers::{Algorithm, UpdateMode};
use jointdiag_cli::campaign::{BenchSpec, HarmonicSpec, SolverOpts};
use jointdiag_cli::{cmd_bench, cmd_harmonic, cmd_solve, parse_init, BenchCmd, HarmonicCmd, SolveCmd};

/// Approximate joint diagonalization of complex matrix collections.
#[derive(Parser)]
#[command(name = "jd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize one ensemble read from a JSON file.
    Solve(SolveArgs),
    /// Seeded Monte Carlo benchmark campaign over synthetic ensembles.
    Bench(BenchArgs),
    /// 3-D harmonic retrieval: synthesize, reduce via ESPRIT, diagonalize.
    Harmonic(HarmonicArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Gd,
    Cg,
    Qn,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Algorithm {
        match a {
            AlgorithmArg::Gd => Algorithm::Gd,
            AlgorithmArg::Cg => Algorithm::Cg,
            AlgorithmArg::Qn => Algorithm::Qn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UpdateArg {
    Mult,
    Add,
}

impl From<UpdateArg> for UpdateMode {
    fn from(u: UpdateArg) -> UpdateMode {
        match u {
            UpdateArg::Mult => UpdateMode::Multiplicative,
            UpdateArg::Add => UpdateMode::Additive,
        }
    }
}

#[derive(Args)]
struct CommonSolverArgs {
    /// Basis update mode.
    #[arg(long = "update", value_enum, default_value = "mult")]
    update: UpdateArg,
    /// Starting basis: eigsum, identity, or file:PATH.
    #[arg(long = "init", default_value = "eigsum")]
    init: String,
    #[arg(long = "max-iters", default_value_t = 1000)]
    max_iters: usize,
    /// Stop once |Δf| per iteration falls below rel-tol times the initial
    /// objective (0 disables).
    #[arg(long = "rel-tol", default_value_t = 1e-12)]
    rel_tol: f64,
    /// Iteration cap of the quasi-Newton inner solve.
    #[arg(long = "qn-inner-max", default_value_t = 100)]
    qn_inner_max: usize,
    /// Residual-reduction target of the quasi-Newton inner solve.
    #[arg(long = "qn-inner-reduction", default_value_t = 0.1)]
    qn_inner_reduction: f64,
    /// Safety margin of the step cap 1/(margin·‖U⁻¹S‖).
    #[arg(long = "lambda-margin", default_value_t = 2.0)]
    lambda_margin: f64,
}

impl CommonSolverArgs {
    fn to_opts(&self) -> Result<SolverOpts, jointdiag_cli::CliError> {
        Ok(SolverOpts {
            update: self.update.into(),
            init: parse_init(&self.init)?,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            qn_inner_max: self.qn_inner_max,
            qn_inner_reduction: self.qn_inner_reduction,
            lambda_margin: self.lambda_margin,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Ensemble JSON file.
    #[arg(long = "input")]
    input: PathBuf,
    /// Result JSON path (stdout when omitted).
    #[arg(long = "output")]
    output: Option<PathBuf>,
    #[arg(long = "algorithm", value_enum, default_value = "cg")]
    algorithm: AlgorithmArg,
    #[command(flatten)]
    solver: CommonSolverArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Matrix dimension of the generated ensembles.
    #[arg(long = "n", default_value_t = 10)]
    n: usize,
    /// Number of matrices per ensemble.
    #[arg(long = "k", default_value_t = 5)]
    k: usize,
    /// SNR in dB (repeatable).
    #[arg(long = "snr", required = true)]
    snr: Vec<f64>,
    /// Number of seeded runs per SNR.
    #[arg(long = "runs", default_value_t = 100)]
    runs: u64,
    /// First seed; runs use seed, seed+1, …
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    /// Algorithms to run on every instance (repeatable).
    #[arg(long = "algorithm", value_enum, default_values_t = [AlgorithmArg::Cg, AlgorithmArg::Qn])]
    algorithm: Vec<AlgorithmArg>,
    /// CSV output path (stdout when omitted).
    #[arg(long = "output")]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: CommonSolverArgs,
}

#[derive(Args)]
struct HarmonicArgs {
    /// Number of exponential modes.
    #[arg(long = "k", default_value_t = 27)]
    k: usize,
    /// Cubic grid edge length.
    #[arg(long = "n", default_value_t = 17)]
    n: usize,
    /// SNR in dB (repeatable).
    #[arg(long = "snr", required = true)]
    snr: Vec<f64>,
    #[arg(long = "runs", default_value_t = 20)]
    runs: u64,
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    #[arg(long = "algorithm", value_enum, default_values_t = [AlgorithmArg::Cg, AlgorithmArg::Qn])]
    algorithm: Vec<AlgorithmArg>,
    /// CSV output path (stdout when omitted).
    #[arg(long = "output")]
    output: Option<PathBuf>,
    #[command(flatten)]
    solver: CommonSolverArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => args.solver.to_opts().and_then(|opts| {
            cmd_solve(&SolveCmd {
                input: args.input,
                output: args.output,
                algorithm: args.algorithm.into(),
                opts,
            })
        }),
        Command::Bench(args) => args.solver.to_opts().and_then(|opts| {
            cmd_bench(&BenchCmd {
                spec: BenchSpec {
                    n: args.n,
                    k: args.k,
                    snrs: args.snr,
                    runs: args.runs,
                    seed0: args.seed,
                    algorithms: args.algorithm.into_iter().map(Into::into).collect(),
                    opts,
                },
                output: args.output,
            })
        }),
        Command::Harmonic(args) => args.solver.to_opts().and_then(|opts| {
            cmd_harmonic(&HarmonicCmd {
                spec: HarmonicSpec {
                    k_modes: args.k,
                    grid_edge: args.n,
                    snrs: args.snr,
                    runs: args.runs,
                    seed0: args.seed,
                    algorithms: args.algorithm.into_iter().map(Into::into).collect(),
                    opts,
                },
                output: args.output,
            })
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
