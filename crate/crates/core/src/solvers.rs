//! The descent algorithms.
//!
//! Three search-direction rules share one iteration scaffold:
//!
//! - `Gd` — steepest descent, `S = -∇f`.
//! - `Cg` — conjugate gradient. The previous direction is transported into
//!   the current basis and recombined with the new gradient using a beta
//!   computed from Hessian inner products (conjugacy is enforced against the
//!   actual second-order operator, not a gradient-only surrogate). A negative
//!   beta or non-positive curvature resets to a plain gradient step.
//! - `Qn` — quasi-Newton. The Newton system `H(S) = -∇f` is solved
//!   approximately by an inner conjugate-gradient loop that only ever applies
//!   the Hessian operator; if non-positive curvature shows up the inner solve
//!   is abandoned for the gradient direction.
//!
//! In the default multiplicative mode, each accepted step conjugates the
//! working collection by `I + λS` and accumulates `U ← U(I + λS)`, so every
//! derivative is evaluated at the identity where no inverse is needed. The
//! additive mode (`U ← U + λS`) is the classical scheme, kept for
//! comparison runs; it recomputes the transformed collection from scratch
//! every iteration.

use num_complex::Complex64;

use crate::cmat::{self, CMatrix};
use crate::objective::{self, MatrixEnsemble, TransformedEnsemble};
use crate::stepsize::{self, StepBranch, StepSizeDecision};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Gd,
    Cg,
    Qn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateMode {
    Multiplicative,
    Additive,
}

/// Starting basis for a solve.
#[derive(Clone, Debug)]
pub enum Init {
    /// Eigenvectors of `Σ_k A_k` — a strong initializer for near-diagonalizable
    /// collections.
    EigSum,
    Identity,
    User(CMatrix),
}

/// Initial iterate of the quasi-Newton inner solve.
///
/// `Zero` is the default: the initial residual is then exactly `-∇f`, so the
/// relative stop target bounds the Newton-equation error by a fraction of
/// `‖∇f‖` and the returned direction is a genuine inexact-Newton step.
/// `Gradient` (start at `∇f` itself) inflates the initial residual by a
/// factor of order `‖H‖`, which weakens the stop target enough to return
/// ascent directions on ill-conditioned instances; it is kept as an option
/// for experimentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerStart {
    /// Start the inner conjugate gradient at the gradient itself.
    Gradient,
    /// Classical choice: start at zero.
    Zero,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub update: UpdateMode,
    pub max_iters: usize,
    /// Stop when |f_m - f_{m+1}| ≤ rel_tol · f_0. Zero disables.
    pub rel_tol: f64,
    pub qn_inner_max: usize,
    /// Inner loop stops once the squared Newton residual drops below this
    /// fraction of its initial value.
    pub qn_inner_reduction: f64,
    pub init: Init,
    /// Echoed into the result for provenance; the solve itself is
    /// deterministic.
    pub seed: u64,
    /// Safety margin of the step cap (see [`stepsize`]).
    pub lambda_margin: f64,
    pub qn_inner_start: InnerStart,
    /// Force beta = 0 in CG, reducing it to gradient descent (diagnostics).
    pub force_beta_zero: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::Cg,
            update: UpdateMode::Multiplicative,
            max_iters: 1000,
            rel_tol: 1e-12,
            qn_inner_max: 100,
            qn_inner_reduction: 0.1,
            init: Init::EigSum,
            seed: 0,
            lambda_margin: stepsize::DEFAULT_LAMBDA_MARGIN,
            qn_inner_start: InnerStart::Zero,
            force_beta_zero: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    MaxIters,
    RelTol,
    Stalled,
}

/// Per-direction metadata recorded in the trace.
#[derive(Clone, Copy, Debug)]
pub enum StepDetail {
    Init,
    Gradient,
    ConjugateGradient { beta: f64, beta_zeroed: bool },
    QuasiNewton { inner_iters: usize, gradient_fallback: bool },
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    /// Step length taken to reach this row's objective (0 on the initial row).
    pub lambda: f64,
    pub branch: Option<StepBranch>,
    pub clipped: bool,
    pub detail: StepDetail,
}

/// Working state of a solve; exposed for instrumented runs and replay tests.
#[derive(Clone, Debug)]
pub struct JdState {
    /// Accumulated basis.
    pub u: CMatrix,
    /// Current transformed collection (the `A_k` conjugated so far).
    pub ensemble: Vec<CMatrix>,
    pub iter: usize,
    pub trace: Vec<TraceRow>,
    /// Previous search direction, already transported into the current basis
    /// (conjugate gradient only).
    pub prev_direction: Option<CMatrix>,
}

impl JdState {
    /// Appends one trace row; O(1) amortized.
    pub fn record(&mut self, row: TraceRow) {
        self.iter = row.iter;
        self.trace.push(row);
    }
}

#[derive(Clone, Debug)]
pub struct JdResult {
    pub u: CMatrix,
    /// `diagonals[k][i] = (U⁻¹ A_k U)[i, i]` at the final basis.
    pub diagonals: Vec<Vec<Complex64>>,
    pub trace: Vec<TraceRow>,
    pub termination: Termination,
    /// Seconds; 0 on targets without a monotonic clock.
    pub wall_time: f64,
    pub seed: u64,
}

impl JdResult {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map(|r| r.objective).unwrap_or(f64::NAN)
    }

    pub fn initial_objective(&self) -> f64 {
        self.trace.first().map(|r| r.objective).unwrap_or(f64::NAN)
    }

    pub fn iterations(&self) -> usize {
        self.trace.last().map(|r| r.iter).unwrap_or(0)
    }
}

/// Number of consecutive exactly-unchanged objectives before declaring a
/// stall.
const STALL_LIMIT: usize = 10;
/// Step lengths below this are treated as underflow.
const LAMBDA_UNDERFLOW: f64 = 1e-16;

/// Runs the configured solver on the collection.
pub fn solve(a: &MatrixEnsemble, cfg: &SolverConfig) -> Result<JdResult> {
    let timer = Timer::start();
    let u0 = initial_basis(a, &cfg.init)?;
    let mut result = match cfg.update {
        UpdateMode::Multiplicative => solve_multiplicative(a, u0, cfg),
        UpdateMode::Additive => solve_additive(a, u0, cfg),
    }?;
    result.wall_time = timer.elapsed();
    result.seed = cfg.seed;
    Ok(result)
}

fn initial_basis(a: &MatrixEnsemble, init: &Init) -> Result<CMatrix> {
    match init {
        Init::Identity => Ok(CMatrix::identity(a.n())),
        Init::EigSum => {
            let (_, vectors) = cmat::eig(&a.sum())?;
            Ok(vectors)
        }
        Init::User(u) => Ok(u.clone()),
    }
}

fn solve_multiplicative(a: &MatrixEnsemble, u0: CMatrix, cfg: &SolverConfig) -> Result<JdResult> {
    let n = a.n();
    let identity_start = is_identity(&u0);
    let ensemble = if identity_start {
        a.matrices().to_vec()
    } else {
        TransformedEnsemble::new(a, u0.clone())?.into_transformed()
    };

    let f0 = objective::objective_at_identity(&ensemble);
    let mut state = JdState {
        u: u0,
        ensemble,
        iter: 0,
        trace: Vec::new(),
        prev_direction: None,
    };
    state.record(TraceRow {
        iter: 0,
        objective: f0,
        lambda: 0.0,
        branch: None,
        clipped: false,
        detail: StepDetail::Init,
    });

    let mut termination = Termination::MaxIters;
    let mut prev_f = f0;
    let mut stall = 0usize;

    for m in 1..=cfg.max_iters {
        let e = TransformedEnsemble::at_identity(std::mem::take(&mut state.ensemble))?;
        let g = objective::gradient(&e);
        if g.frobenius_norm_sq() == 0.0 {
            state.ensemble = e.into_transformed();
            termination = Termination::RelTol;
            break;
        }

        let (s, detail) = direction(&e, &g, state.prev_direction.as_ref(), cfg)?;
        let step = stepsize::choose_step_with_gradient(&e, &g, &s, cfg.lambda_margin)?;

        let mut b = CMatrix::identity(n);
        b.add_scaled(Complex64::new(step.lambda, 0.0), &s);
        // Guarded by the step cap; failure here is a broken invariant.
        let b_inv = cmat::inverse(&b)?;
        let next: Vec<CMatrix> = e
            .transformed()
            .iter()
            .map(|d| b_inv.mul(d).mul(&b))
            .collect();
        state.u = state.u.mul(&b);
        state.prev_direction = Some(b_inv.mul(&s));

        let f_next = objective::objective_at_identity(&next);
        state.ensemble = next;
        state.record(TraceRow {
            iter: m,
            objective: f_next,
            lambda: step.lambda,
            branch: Some(step.branch),
            clipped: step.clipped,
            detail,
        });

        if let Some(t) = check_termination(prev_f, f_next, f0, step, cfg, &mut stall) {
            termination = t;
            break;
        }
        prev_f = f_next;
    }

    Ok(finish(state, termination))
}

fn solve_additive(a: &MatrixEnsemble, u0: CMatrix, cfg: &SolverConfig) -> Result<JdResult> {
    let mut e = TransformedEnsemble::new(a, u0)?;
    let f0 = objective::objective_value(&e);
    let mut trace = vec![TraceRow {
        iter: 0,
        objective: f0,
        lambda: 0.0,
        branch: None,
        clipped: false,
        detail: StepDetail::Init,
    }];

    let mut termination = Termination::MaxIters;
    let mut prev_f = f0;
    let mut stall = 0usize;
    let mut prev_direction: Option<CMatrix> = None;

    for m in 1..=cfg.max_iters {
        let g = objective::gradient(&e);
        if g.frobenius_norm_sq() == 0.0 {
            termination = Termination::RelTol;
            break;
        }
        // The additive variants use no direction transport: beta and the
        // inner solve work against the Hessian at the current basis.
        let (s, detail) = direction(&e, &g, prev_direction.as_ref(), cfg)?;
        let step = stepsize::choose_step_with_gradient(&e, &g, &s, cfg.lambda_margin)?;

        let mut u_next = e.basis_matrix();
        u_next.add_scaled(Complex64::new(step.lambda, 0.0), &s);
        prev_direction = Some(s);
        e = TransformedEnsemble::new(a, u_next)?;

        let f_next = objective::objective_value(&e);
        trace.push(TraceRow {
            iter: m,
            objective: f_next,
            lambda: step.lambda,
            branch: Some(step.branch),
            clipped: step.clipped,
            detail,
        });

        if let Some(t) = check_termination(prev_f, f_next, f0, step, cfg, &mut stall) {
            termination = t;
            break;
        }
        prev_f = f_next;
    }

    let u = e.basis_matrix();
    let ensemble = e.into_transformed();
    let state = JdState {
        u,
        ensemble,
        iter: trace.last().map(|r| r.iter).unwrap_or(0),
        trace,
        prev_direction: None,
    };
    Ok(finish(state, termination))
}

fn check_termination(
    prev_f: f64,
    f_next: f64,
    f0: f64,
    step: StepSizeDecision,
    cfg: &SolverConfig,
    stall: &mut usize,
) -> Option<Termination> {
    if prev_f == f_next {
        *stall += 1;
    } else {
        *stall = 0;
    }
    if *stall >= STALL_LIMIT || step.lambda < LAMBDA_UNDERFLOW {
        return Some(Termination::Stalled);
    }
    let delta = prev_f - f_next;
    if cfg.rel_tol > 0.0 && delta.abs() <= cfg.rel_tol * f0 {
        return Some(Termination::RelTol);
    }
    None
}

fn finish(state: JdState, termination: Termination) -> JdResult {
    let diagonals = state.ensemble.iter().map(|d| d.diag()).collect();
    JdResult {
        u: state.u,
        diagonals,
        trace: state.trace,
        termination,
        wall_time: 0.0,
        seed: 0,
    }
}

/// Builds the search direction for the current iteration. Whatever the rule
/// produces, a non-descent direction falls back to the plain gradient step so
/// the step-size rule always sees a strictly negative slope.
fn direction(
    e: &TransformedEnsemble,
    g: &CMatrix,
    prev: Option<&CMatrix>,
    cfg: &SolverConfig,
) -> Result<(CMatrix, StepDetail)> {
    let (s, detail) = match cfg.algorithm {
        Algorithm::Gd => (negate(g), StepDetail::Gradient),
        Algorithm::Cg => cg_direction(e, g, prev, cfg.force_beta_zero)?,
        Algorithm::Qn => qn_direction(e, g, cfg)?,
    };
    let slope = cmat::real_inner(g, &s)?;
    if slope < 0.0 {
        return Ok((s, detail));
    }
    // Reset to steepest descent.
    let fallback_detail = match detail {
        StepDetail::ConjugateGradient { beta, .. } => StepDetail::ConjugateGradient {
            beta,
            beta_zeroed: true,
        },
        StepDetail::QuasiNewton { inner_iters, .. } => StepDetail::QuasiNewton {
            inner_iters,
            gradient_fallback: true,
        },
        other => other,
    };
    Ok((negate(g), fallback_detail))
}

fn negate(m: &CMatrix) -> CMatrix {
    m.scaled(-Complex64::ONE)
}

fn cg_direction(
    e: &TransformedEnsemble,
    g: &CMatrix,
    prev: Option<&CMatrix>,
    force_beta_zero: bool,
) -> Result<(CMatrix, StepDetail)> {
    let Some(s_prev) = prev else {
        // First step is plain gradient descent.
        return Ok((
            negate(g),
            StepDetail::ConjugateGradient {
                beta: 0.0,
                beta_zeroed: false,
            },
        ));
    };
    if force_beta_zero {
        return Ok((
            negate(g),
            StepDetail::ConjugateGradient {
                beta: 0.0,
                beta_zeroed: true,
            },
        ));
    }
    let h_prev = objective::hessian_apply(e, s_prev)?;
    let denom = cmat::real_inner(s_prev, &h_prev)?;
    let numer = cmat::real_inner(g, &h_prev)?;
    let beta = numer / denom;
    if denom <= 0.0 || beta < 0.0 || !beta.is_finite() {
        return Ok((
            negate(g),
            StepDetail::ConjugateGradient {
                beta: 0.0,
                beta_zeroed: true,
            },
        ));
    }
    let mut s = negate(g);
    s.add_scaled(Complex64::new(beta, 0.0), s_prev);
    Ok((
        s,
        StepDetail::ConjugateGradient {
            beta,
            beta_zeroed: false,
        },
    ))
}

fn qn_direction(
    e: &TransformedEnsemble,
    g: &CMatrix,
    cfg: &SolverConfig,
) -> Result<(CMatrix, StepDetail)> {
    let nd = newton_direction(
        e,
        g,
        cfg.qn_inner_max,
        cfg.qn_inner_reduction,
        cfg.qn_inner_start,
    )?;
    let detail = StepDetail::QuasiNewton {
        inner_iters: nd.inner_iters,
        gradient_fallback: nd.gradient_fallback,
    };
    Ok((nd.direction, detail))
}

/// Approximate Newton direction and how it was obtained.
#[derive(Clone, Debug)]
pub struct NewtonDirection {
    pub direction: CMatrix,
    pub inner_iters: usize,
    /// True when non-positive curvature aborted the inner solve and the
    /// direction is just the negative gradient.
    pub gradient_fallback: bool,
}

/// Inner conjugate gradient on the Newton system `H(S) = -∇f`, touching the
/// Hessian only through [`objective::hessian_apply`]. Stops once the squared
/// residual `‖H(S) + ∇f‖²` falls below `target_reduction` times its initial
/// value or after `max_inner` iterations.
pub fn newton_direction(
    e: &TransformedEnsemble,
    g: &CMatrix,
    max_inner: usize,
    target_reduction: f64,
    start: InnerStart,
) -> Result<NewtonDirection> {
    let mut s = match start {
        InnerStart::Gradient => g.clone(),
        InnerStart::Zero => CMatrix::zeros(e.n(), e.n()),
    };
    // r = -∇f - H(s)
    let mut r = negate(g);
    if !matches!(start, InnerStart::Zero) {
        r.add_scaled(-Complex64::ONE, &objective::hessian_apply(e, &s)?);
    }
    let r0_sq = r.frobenius_norm_sq();
    if r0_sq == 0.0 {
        return Ok(NewtonDirection {
            direction: s,
            inner_iters: 0,
            gradient_fallback: false,
        });
    }
    let target = target_reduction * r0_sq;
    let mut p = r.clone();
    let mut rs_old = r0_sq;
    let mut inner_iters = 0usize;

    while inner_iters < max_inner {
        let hp = objective::hessian_apply(e, &p)?;
        let curvature = cmat::real_inner(&p, &hp)?;
        if curvature <= 0.0 {
            // Indefinite Hessian: the quadratic model has no minimum along p.
            return Ok(NewtonDirection {
                direction: negate(g),
                inner_iters,
                gradient_fallback: true,
            });
        }
        let alpha = rs_old / curvature;
        s.add_scaled(Complex64::new(alpha, 0.0), &p);
        r.add_scaled(Complex64::new(-alpha, 0.0), &hp);
        inner_iters += 1;
        let rs_new = r.frobenius_norm_sq();
        if rs_new <= target {
            break;
        }
        let beta = rs_new / rs_old;
        let mut p_next = r.clone();
        p_next.add_scaled(Complex64::new(beta, 0.0), &p);
        p = p_next;
        rs_old = rs_new;
    }

    Ok(NewtonDirection {
        direction: s,
        inner_iters,
        gradient_fallback: false,
    })
}

fn is_identity(u: &CMatrix) -> bool {
    if !u.is_square() {
        return false;
    }
    let n = u.n_rows();
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
            if u[(i, j)] != expect {
                return false;
            }
        }
    }
    true
}

struct Timer {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Timer {
    fn start() -> Self {
        Timer {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    #[cfg(not(target_arch = "wasm32"))]
    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    #[cfg(target_arch = "wasm32")]
    fn elapsed(&self) -> f64 {
        0.0
    }
}
