//! Curvature-based step-size selection with a singularity guard.
//!
//! Along a descent direction S the objective is modeled by its second-order
//! expansion; minimizing that quadratic gives the candidate step
//! `λ_H = -⟨∇f, S⟩ / ⟨S, H(S)⟩`. When the curvature denominator is not
//! positive the nonnegative Gauss-Newton surrogate replaces it. Either way
//! the step is capped at `λ_max = 1 / (margin·‖U⁻¹S‖_F)`: since the poles of
//! λ ↦ f(U + λS) sit at distance ≥ 1/ρ(U⁻¹S) ≥ 1/‖U⁻¹S‖_F from the origin,
//! every accepted step keeps `U + λS` invertible with margin to spare.
//! No line search and no backtracking: one gradient, one Hessian form
//! evaluation, done.

use crate::cmat::{self, CMatrix};
use crate::objective::{self, TransformedEnsemble};
use crate::{Error, Result};

/// Default safety margin in the step cap; 1 would already exclude the first
/// pole, 2 keeps the iterate well away from it.
pub const DEFAULT_LAMBDA_MARGIN: f64 = 2.0;

/// Which curvature denominator produced the step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepBranch {
    Hessian,
    GaussNewton,
}

/// Outcome of [`choose_step`].
#[derive(Clone, Copy, Debug)]
pub struct StepSizeDecision {
    pub lambda: f64,
    pub branch: StepBranch,
    /// Whether the λ_max cap was the binding constraint.
    pub clipped: bool,
    /// The curvature ⟨S, H(S)⟩ that was encountered (≤ 0 exactly when the
    /// Gauss-Newton branch was taken).
    pub denom: f64,
}

fn degenerate_eps(n: usize) -> f64 {
    1e-300 * n as f64
}

/// Quadratic-model minimizer `-⟨∇f, S⟩ / ⟨S, H(S)⟩`.
///
/// Fails with [`Error::NonPositiveCurvature`] when the denominator is not
/// strictly positive, signalling the caller to fall back to
/// [`lambda_gauss_newton`].
pub fn lambda_hessian(e: &TransformedEnsemble, s: &CMatrix) -> Result<f64> {
    let g = objective::gradient(e);
    let slope = cmat::real_inner(&g, s)?;
    let curvature = objective::hessian_bilinear(e, s, s)?;
    if curvature <= 0.0 {
        return Err(Error::NonPositiveCurvature { curvature });
    }
    Ok(-slope / curvature)
}

/// Gauss-Newton step `-⟨∇f, S⟩ / Σ_k ‖offdiag([D_k, U⁻¹S])‖²`.
///
/// The denominator is nonnegative by construction; a (measure-zero) exact
/// zero means S commutes off-diagonally with every D_k and yields
/// [`Error::DegenerateDirection`].
pub fn lambda_gauss_newton(e: &TransformedEnsemble, s: &CMatrix) -> Result<f64> {
    let g = objective::gradient(e);
    let slope = cmat::real_inner(&g, s)?;
    let denom = objective::gauss_newton_curvature(e, s)?;
    if denom <= degenerate_eps(e.n()) {
        return Err(Error::DegenerateDirection { denom });
    }
    Ok(-slope / denom)
}

/// Step cap `1/(margin·‖U⁻¹S‖_F)`: `U + λS` stays invertible for every
/// `λ` up to `margin` times this value.
pub fn lambda_max(u: &CMatrix, s: &CMatrix, margin: f64) -> Result<f64> {
    let u_inv = cmat::inverse(u)?;
    let norm = u_inv.mul(s).frobenius_norm();
    if norm == 0.0 {
        return Err(Error::DegenerateDirection { denom: 0.0 });
    }
    Ok(1.0 / (margin * norm))
}

/// Full step-size rule: the quadratic-model step when the curvature is
/// positive, the Gauss-Newton step otherwise, both capped at λ_max.
pub fn choose_step(e: &TransformedEnsemble, s: &CMatrix, margin: f64) -> Result<StepSizeDecision> {
    let g = objective::gradient(e);
    choose_step_with_gradient(e, &g, s, margin)
}

/// Same as [`choose_step`] with the gradient supplied by the caller (the
/// solvers already have it in hand).
pub fn choose_step_with_gradient(
    e: &TransformedEnsemble,
    g: &CMatrix,
    s: &CMatrix,
    margin: f64,
) -> Result<StepSizeDecision> {
    let slope = cmat::real_inner(g, s)?;
    let curvature = objective::hessian_bilinear(e, s, s)?;
    let transported_norm = e.apply_basis_inverse(s).frobenius_norm();
    if transported_norm == 0.0 {
        return Err(Error::DegenerateDirection { denom: 0.0 });
    }
    let cap = 1.0 / (margin * transported_norm);

    if curvature > 0.0 {
        let lh = -slope / curvature;
        if lh <= cap {
            Ok(StepSizeDecision {
                lambda: lh,
                branch: StepBranch::Hessian,
                clipped: false,
                denom: curvature,
            })
        } else {
            Ok(StepSizeDecision {
                lambda: cap,
                branch: StepBranch::Hessian,
                clipped: true,
                denom: curvature,
            })
        }
    } else {
        let gn = objective::gauss_newton_curvature(e, s)?;
        if gn <= degenerate_eps(e.n()) {
            return Err(Error::DegenerateDirection { denom: gn });
        }
        let lgn = -slope / gn;
        if lgn <= cap {
            Ok(StepSizeDecision {
                lambda: lgn,
                branch: StepBranch::GaussNewton,
                clipped: false,
                denom: curvature,
            })
        } else {
            Ok(StepSizeDecision {
                lambda: cap,
                branch: StepBranch::GaussNewton,
                clipped: true,
                denom: curvature,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_identity_ensemble(n: usize, k: usize, seed: u64) -> TransformedEnsemble {
        let mut rng = SeededRng::new(seed);
        let mats = (0..k)
            .map(|_| CMatrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0)))
            .collect();
        TransformedEnsemble::at_identity(mats).unwrap()
    }

    #[test]
    fn lambda_max_examples() {
        let n = 4;
        let i = CMatrix::identity(n);
        let lm = lambda_max(&i, &i, 2.0).unwrap();
        assert!((lm - 1.0 / (2.0 * (n as f64).sqrt())).abs() < 1e-15);

        let mut s = CMatrix::zeros(2, 2);
        s[(0, 1)] = c(2.0, 0.0);
        let lm = lambda_max(&CMatrix::identity(2), &s, 2.0).unwrap();
        assert!((lm - 0.25).abs() < 1e-15);
    }

    #[test]
    fn capped_step_keeps_update_invertible() {
        let mut rng = SeededRng::new(13);
        for _ in 0..20 {
            let s = CMatrix::from_fn(5, 5, |_, _| rng.complex_gaussian(1.0));
            let lm = lambda_max(&CMatrix::identity(5), &s, 2.0).unwrap();
            let mut b = CMatrix::identity(5);
            b.add_scaled(c(lm, 0.0), &s);
            assert!(cmat::inverse(&b).is_ok());
        }
    }

    #[test]
    fn quadratic_model_minimizer_is_exact_on_quadratic_slice() {
        // Along S the model is exact to second order; check that moving by
        // λ_H decreases the model-predicted value to its minimum.
        let e = random_identity_ensemble(4, 3, 991);
        let g = objective::gradient(&e);
        let s = g.scaled(c(-1.0, 0.0));
        let lh = lambda_hessian(&e, &s).unwrap();
        assert!(lh > 0.0);
        let curv = objective::hessian_bilinear(&e, &s, &s).unwrap();
        let slope = cmat::real_inner(&g, &s).unwrap();
        // Derivative of the quadratic model at λ_H vanishes.
        assert!((slope + lh * curv).abs() <= 1e-12 * slope.abs());
    }

    #[test]
    fn zero_gradient_gives_zero_step() {
        // Diagonal collection: gradient vanishes, curvature stays positive
        // along a direction with nonzero off-diagonal commutator.
        let d1 = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let e = TransformedEnsemble::at_identity(vec![d1]).unwrap();
        let mut s = CMatrix::zeros(2, 2);
        s[(0, 1)] = c(1.0, 0.0);
        let lh = lambda_hessian(&e, &s).unwrap();
        assert_eq!(lh, 0.0);
    }

    #[test]
    fn gauss_newton_equals_hessian_when_second_term_vanishes() {
        let d1 = CMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 2.0)]);
        let e = TransformedEnsemble::at_identity(vec![d1]).unwrap();
        let mut s = CMatrix::zeros(2, 2);
        s[(0, 1)] = c(0.3, -0.4);
        s[(1, 0)] = c(-1.0, 0.1);
        let gn_denom = objective::gauss_newton_curvature(&e, &s).unwrap();
        let full = objective::hessian_bilinear(&e, &s, &s).unwrap();
        assert!((gn_denom - full).abs() <= 1e-12 * full.abs());
    }

    #[test]
    fn degenerate_direction_detected() {
        let d1 = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let e = TransformedEnsemble::at_identity(vec![d1]).unwrap();
        // A diagonal direction commutes with a diagonal collection.
        let s = CMatrix::from_diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(
            lambda_gauss_newton(&e, &s),
            Err(Error::DegenerateDirection { .. })
        ));
    }

    #[test]
    fn choose_step_branches() {
        let e = random_identity_ensemble(5, 4, 313);
        let g = objective::gradient(&e);
        let s = g.scaled(c(-1.0, 0.0));
        let d = choose_step(&e, &s, 2.0).unwrap();
        assert!(d.lambda > 0.0);
        match d.branch {
            StepBranch::Hessian => assert!(d.denom > 0.0),
            StepBranch::GaussNewton => assert!(d.denom <= 0.0),
        }
        let cap = 1.0 / (2.0 * s.frobenius_norm());
        assert!(d.lambda <= cap * (1.0 + 1e-15));
        if d.clipped {
            assert!((d.lambda - cap).abs() <= 1e-15 * cap);
        }
    }

    #[test]
    fn gradient_step_decreases_objective_on_random_instances() {
        let mut ok = 0;
        for seed in 0..100u64 {
            let e = random_identity_ensemble(6, 3, 10_000 + seed);
            let f0 = objective::objective_value(&e);
            let g = objective::gradient(&e);
            let s = g.scaled(c(-1.0, 0.0));
            let d = choose_step(&e, &s, 2.0).unwrap();
            let mut b = CMatrix::identity(6);
            b.add_scaled(c(d.lambda, 0.0), &s);
            let b_inv = cmat::inverse(&b).unwrap();
            let moved: Vec<CMatrix> = e
                .transformed()
                .iter()
                .map(|m| b_inv.mul(m).mul(&b))
                .collect();
            let f1 = objective::objective_at_identity(&moved);
            if f1 < f0 {
                ok += 1;
            }
        }
        assert!(ok >= 95, "descent in only {ok}/100 trials");
    }
}
