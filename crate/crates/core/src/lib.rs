//! Approximate joint diagonalization of complex matrix collections.
//!
//! Given square matrices `A_1..A_K`, this crate searches for one invertible
//! matrix `U` that makes every transformed matrix `U⁻¹ A_k U` as diagonal as
//! possible. The figure of merit is half the summed squared Frobenius norm of
//! the off-diagonal entries of the transformed collection, minimized with
//! descent methods that use closed-form first- and second-order information:
//!
//! - gradient descent ([`solvers::Algorithm::Gd`]),
//! - conjugate gradient with a Hessian-based beta ([`solvers::Algorithm::Cg`]),
//! - a quasi-Newton method whose search direction comes from a matrix-free
//!   inner conjugate-gradient solve ([`solvers::Algorithm::Qn`]).
//!
//! All three default to a multiplicative change of basis: each iteration
//! conjugates the working collection by `I + λS` so derivatives are always
//! taken at the identity, where no matrix inverse is needed. Step sizes come
//! from the curvature along the search direction, capped so the iterates stay
//! clear of singular matrices.
//!
//! Supporting modules: [`cmat`] (dense complex kernels), [`ensemble`]
//! (seeded synthetic problem generation), [`metrics`] (permutation-matched
//! eigenvalue error), and [`harmonic`] (a 3-D harmonic retrieval pipeline
//! that reduces to a joint diagonalization problem via multilevel ESPRIT).

pub mod cmat;
pub mod ensemble;
pub mod harmonic;
pub mod metrics;
pub mod objective;
pub mod rng;
pub mod solvers;
pub mod stepsize;

pub use cmat::CMatrix;
pub use objective::{MatrixEnsemble, TransformedEnsemble};
pub use solvers::{solve, JdResult, SolverConfig};

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("singular matrix: pivot {pivot:.3e} at column {col} below threshold {threshold:.3e}")]
    SingularMatrix {
        col: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("eigenvalue iteration exceeded its budget of {budget} steps")]
    NoConvergence { budget: usize },
    #[error("curvature along the search direction is not positive: {curvature:.3e}")]
    NonPositiveCurvature { curvature: f64 },
    #[error("search direction is degenerate: curvature denominator {denom:.3e}")]
    DegenerateDirection { denom: f64 },
    #[error("signal subspace rank deficient: sigma[{index}] = {sigma:.3e} vs sigma[0] = {sigma_max:.3e}")]
    RankDeficient {
        index: usize,
        sigma: f64,
        sigma_max: f64,
    },
    #[error("degenerate mode {index}: diagonal entry is zero, no logarithm exists")]
    ModeDegenerate { index: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
