//! The off-diagonal objective and its closed-form derivatives.
//!
//! For a collection `A = {A_1..A_K}` and an invertible basis `U`, write
//! `D_k = U⁻¹ A_k U`. The objective is
//!
//! ```text
//! f(U) = ½ Σ_k ‖offdiag(D_k)‖_F²
//! ```
//!
//! viewed as a real-valued function on the real inner-product space of
//! complex matrices (see [`crate::cmat::real_inner`]). Its gradient is
//!
//! ```text
//! ∇f = Σ_k U⁻* [D_k*, offdiag(D_k)]
//! ```
//!
//! and the second-order term is available in two interchangeable forms: a
//! symmetric real-bilinear form `H(Z, W)` and the unique real-linear operator
//! `H(Z)` with `Re⟨H(Z), W⟩ = H(Z, W)`. Everything here costs O(K n³) — the
//! 2n²×2n² second-derivative matrix is never formed. At the identity basis
//! (the multiplicative-update hot path) all `U⁻¹` factors are skipped
//! structurally rather than multiplied out.

use num_complex::Complex64;

use crate::cmat::{self, CMatrix};
use crate::{Error, Result};

/// An ordered collection of K square complex matrices sharing one dimension.
#[derive(Clone, Debug)]
pub struct MatrixEnsemble {
    matrices: Vec<CMatrix>,
    n: usize,
}

impl MatrixEnsemble {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::EmptyInput("ensemble needs at least one matrix"));
        }
        let n = matrices[0].n_rows();
        for m in &matrices {
            if !m.is_square() {
                return Err(Error::NotSquare {
                    rows: m.n_rows(),
                    cols: m.n_cols(),
                });
            }
            if m.n_rows() != n {
                return Err(Error::DimensionMismatch {
                    expected: (n, n),
                    got: (m.n_rows(), m.n_cols()),
                });
            }
        }
        Ok(MatrixEnsemble { matrices, n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<CMatrix> {
        self.matrices
    }

    /// Entrywise sum of the members (used by the eigenvector-sum initializer).
    pub fn sum(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.n, self.n);
        for m in &self.matrices {
            s.add_scaled(Complex64::ONE, m);
        }
        s
    }
}

#[derive(Clone, Debug)]
enum Basis {
    Identity,
    General {
        u: CMatrix,
        u_inv: CMatrix,
        u_inv_adj: CMatrix,
    },
}

/// An ensemble conjugated into a working basis, with `D_k = U⁻¹ A_k U`
/// cached once so repeated gradient and Hessian evaluations reuse it.
#[derive(Clone, Debug)]
pub struct TransformedEnsemble {
    basis: Basis,
    d: Vec<CMatrix>,
    n: usize,
}

impl TransformedEnsemble {
    /// Wraps a collection already expressed in the working basis (U = I).
    /// No inverse is ever taken on this path.
    pub fn at_identity(matrices: Vec<CMatrix>) -> Result<Self> {
        let e = MatrixEnsemble::new(matrices)?;
        Ok(TransformedEnsemble {
            n: e.n(),
            d: e.into_matrices(),
            basis: Basis::Identity,
        })
    }

    /// Conjugates `base` by `u`, failing if `u` is singular.
    pub fn new(base: &MatrixEnsemble, u: CMatrix) -> Result<Self> {
        if u.n_rows() != base.n() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: (base.n(), base.n()),
                got: (u.n_rows(), u.n_cols()),
            });
        }
        let u_inv = cmat::inverse(&u)?;
        let d = base
            .matrices()
            .iter()
            .map(|a| u_inv.mul(a).mul(&u))
            .collect();
        let u_inv_adj = u_inv.adjoint();
        Ok(TransformedEnsemble {
            n: base.n(),
            d,
            basis: Basis::General { u, u_inv, u_inv_adj },
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.d.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The cached transformed matrices `D_k`.
    pub fn transformed(&self) -> &[CMatrix] {
        &self.d
    }

    pub fn into_transformed(self) -> Vec<CMatrix> {
        self.d
    }

    pub fn is_identity_basis(&self) -> bool {
        matches!(self.basis, Basis::Identity)
    }

    /// The basis matrix U (materialized for the identity case).
    pub fn basis_matrix(&self) -> CMatrix {
        match &self.basis {
            Basis::Identity => CMatrix::identity(self.n),
            Basis::General { u, .. } => u.clone(),
        }
    }

    /// `U⁻¹ · z`; a plain copy at the identity.
    pub fn apply_basis_inverse(&self, z: &CMatrix) -> CMatrix {
        match &self.basis {
            Basis::Identity => z.clone(),
            Basis::General { u_inv, .. } => u_inv.mul(z),
        }
    }

    fn apply_inv_adjoint(&self, z: CMatrix) -> CMatrix {
        match &self.basis {
            Basis::Identity => z,
            Basis::General { u_inv_adj, .. } => u_inv_adj.mul(&z),
        }
    }

    fn check_dims(&self, z: &CMatrix) -> Result<()> {
        if z.n_rows() == self.n && z.n_cols() == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: (self.n, self.n),
                got: (z.n_rows(), z.n_cols()),
            })
        }
    }
}

/// `½ Σ_k ‖offdiag(D_k)‖_F²`; zero exactly when every `D_k` is diagonal.
pub fn objective_value(e: &TransformedEnsemble) -> f64 {
    0.5 * e.d.iter().map(|d| d.offdiag_norm_sq()).sum::<f64>()
}

/// Convenience: the objective of a raw collection at the identity basis.
pub fn objective_at_identity(matrices: &[CMatrix]) -> f64 {
    0.5 * matrices.iter().map(|d| d.offdiag_norm_sq()).sum::<f64>()
}

/// Gradient `Σ_k U⁻* [D_k*, offdiag(D_k)]`.
pub fn gradient(e: &TransformedEnsemble) -> CMatrix {
    let n = e.n;
    let mut sum = CMatrix::zeros(n, n);
    for d in &e.d {
        let da = d.adjoint();
        let mut od = d.clone();
        od.zero_diag_mut();
        // [D*, offdiag(D)]
        let mut term = da.mul(&od);
        term.add_scaled(-Complex64::ONE, &od.mul(&da));
        sum.add_scaled(Complex64::ONE, &term);
    }
    e.apply_inv_adjoint(sum)
}

/// The symmetric bilinear second-order form:
///
/// ```text
/// H(Z, W) = Σ_k Re⟨offdiag([D_k, X]), [D_k, Y]⟩
///         + Re⟨offdiag(D_k), [X, Y·D_k] + [Y, X·D_k]⟩
/// ```
///
/// with `X = U⁻¹Z`, `Y = U⁻¹W`.
pub fn hessian_bilinear(e: &TransformedEnsemble, z: &CMatrix, w: &CMatrix) -> Result<f64> {
    e.check_dims(z)?;
    e.check_dims(w)?;
    let x = e.apply_basis_inverse(z);
    let y = e.apply_basis_inverse(w);
    let mut total = 0.0;
    for d in &e.d {
        let mut od = d.clone();
        od.zero_diag_mut();

        // First term: the diagonal mask on one factor suffices since the
        // masked entries multiply into zeros.
        let mut dx = d.mul(&x);
        dx.add_scaled(-Complex64::ONE, &x.mul(d));
        dx.zero_diag_mut();
        let mut dy = d.mul(&y);
        dy.add_scaled(-Complex64::ONE, &y.mul(d));
        total += cmat::real_inner(&dx, &dy)?;

        // Second term.
        let yd = y.mul(d);
        let xd = x.mul(d);
        let mut c = x.mul(&yd);
        c.add_scaled(-Complex64::ONE, &yd.mul(&x));
        c.add_scaled(Complex64::ONE, &y.mul(&xd));
        c.add_scaled(-Complex64::ONE, &xd.mul(&y));
        total += cmat::real_inner(&od, &c)?;
    }
    Ok(total)
}

/// The nonnegative first summand of [`hessian_bilinear`] with `W = Z`:
/// `Σ_k ‖offdiag([D_k, U⁻¹Z])‖_F²`. This is the curvature surrogate used
/// when the full form is not positive.
pub fn gauss_newton_curvature(e: &TransformedEnsemble, z: &CMatrix) -> Result<f64> {
    e.check_dims(z)?;
    let x = e.apply_basis_inverse(z);
    let mut total = 0.0;
    for d in &e.d {
        let mut dx = d.mul(&x);
        dx.add_scaled(-Complex64::ONE, &x.mul(d));
        total += dx.offdiag_norm_sq();
    }
    Ok(total)
}

/// The Hessian as a real-linear operator:
///
/// ```text
/// H(Z) = Σ_k U⁻*( [D_k*, offdiag([D_k, X])]
///              + [X*, offdiag(D_k)]·D_k*
///              + [offdiag(D_k), (X·D_k)*] )
/// ```
///
/// with `X = U⁻¹Z`; satisfies `Re⟨H(Z), W⟩ =` [`hessian_bilinear`]`(Z, W)`.
pub fn hessian_apply(e: &TransformedEnsemble, z: &CMatrix) -> Result<CMatrix> {
    e.check_dims(z)?;
    let n = e.n;
    let x = e.apply_basis_inverse(z);
    let xa = x.adjoint();
    let mut sum = CMatrix::zeros(n, n);
    for d in &e.d {
        let da = d.adjoint();
        let mut od = d.clone();
        od.zero_diag_mut();

        // [D*, offdiag([D, X])]
        let mut dx = d.mul(&x);
        dx.add_scaled(-Complex64::ONE, &x.mul(d));
        dx.zero_diag_mut();
        let mut t1 = da.mul(&dx);
        t1.add_scaled(-Complex64::ONE, &dx.mul(&da));

        // [X*, offdiag(D)] · D*
        let mut t2 = xa.mul(&od);
        t2.add_scaled(-Complex64::ONE, &od.mul(&xa));
        let t2 = t2.mul(&da);

        // [offdiag(D), (X·D)*]
        let xda = x.mul(d).adjoint();
        let mut t3 = od.mul(&xda);
        t3.add_scaled(-Complex64::ONE, &xda.mul(&od));

        sum.add_scaled(Complex64::ONE, &t1);
        sum.add_scaled(Complex64::ONE, &t2);
        sum.add_scaled(Complex64::ONE, &t3);
    }
    Ok(e.apply_inv_adjoint(sum))
}

/// Second-order model `f(U) + t·Re⟨∇f, Z⟩ + ½t²·H(Z, Z)`; the true value
/// differs by O(t³) for small t.
pub fn taylor_model(e: &TransformedEnsemble, z: &CMatrix, t: f64) -> Result<f64> {
    let g = gradient(e);
    let slope = cmat::real_inner(&g, z)?;
    let curv = hessian_bilinear(e, z, z)?;
    Ok(objective_value(e) + t * slope + 0.5 * t * t * curv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut SeededRng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0))
    }

    fn random_identity_ensemble(n: usize, k: usize, seed: u64) -> TransformedEnsemble {
        let mut rng = SeededRng::new(seed);
        let mats = (0..k).map(|_| random_matrix(n, &mut rng)).collect();
        TransformedEnsemble::at_identity(mats).unwrap()
    }

    #[test]
    fn objective_zero_for_diagonal_collection() {
        let d1 = CMatrix::from_diag(&[c(1.0, 2.0), c(3.0, 0.0)]);
        let d2 = CMatrix::from_diag(&[c(-1.0, 0.5), c(0.0, 0.0)]);
        let e = TransformedEnsemble::at_identity(vec![d1, d2]).unwrap();
        assert_eq!(objective_value(&e), 0.0);
    }

    #[test]
    fn objective_single_offdiagonal_entry() {
        let m = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        let e = TransformedEnsemble::at_identity(vec![m]).unwrap();
        assert_eq!(objective_value(&e), 0.5);
    }

    #[test]
    fn objective_matches_entrywise_sum() {
        let e = random_identity_ensemble(5, 3, 17);
        let mut by_hand = 0.0;
        for d in e.transformed() {
            for i in 0..5 {
                for j in 0..5 {
                    if i != j {
                        by_hand += d[(i, j)].norm_sqr();
                    }
                }
            }
        }
        let v = objective_value(&e);
        assert!((v - 0.5 * by_hand).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn gradient_vanishes_on_diagonal_collection() {
        let d1 = CMatrix::from_diag(&[c(1.0, 2.0), c(3.0, 0.0), c(0.5, -1.0)]);
        let e = TransformedEnsemble::at_identity(vec![d1]).unwrap();
        assert_eq!(gradient(&e).frobenius_norm(), 0.0);
    }

    #[test]
    fn gradient_of_single_nilpotent_matrix() {
        let m = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        let e = TransformedEnsemble::at_identity(vec![m]).unwrap();
        let g = gradient(&e);
        assert!((g[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((g[(1, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(g[(0, 1)].norm() < 1e-15);
        assert!(g[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn bilinear_form_is_symmetric_and_zero_on_zero() {
        let e = random_identity_ensemble(4, 2, 23);
        let mut rng = SeededRng::new(24);
        let z = random_matrix(4, &mut rng);
        let w = random_matrix(4, &mut rng);
        let zero = CMatrix::zeros(4, 4);
        assert_eq!(hessian_bilinear(&e, &zero, &w).unwrap(), 0.0);
        let zw = hessian_bilinear(&e, &z, &w).unwrap();
        let wz = hessian_bilinear(&e, &w, &z).unwrap();
        assert!((zw - wz).abs() <= 1e-12 * zw.abs().max(1.0));
    }

    #[test]
    fn operator_and_form_agree() {
        let e = random_identity_ensemble(4, 3, 31);
        let mut rng = SeededRng::new(32);
        for _ in 0..10 {
            let z = random_matrix(4, &mut rng);
            let w = random_matrix(4, &mut rng);
            let via_op = cmat::real_inner(&hessian_apply(&e, &z).unwrap(), &w).unwrap();
            let via_form = hessian_bilinear(&e, &z, &w).unwrap();
            assert!(
                (via_op - via_form).abs() <= 1e-10 * (1.0 + via_form.abs()),
                "{via_op} vs {via_form}"
            );
        }
    }

    #[test]
    fn operator_is_real_linear() {
        let e = random_identity_ensemble(3, 2, 41);
        let mut rng = SeededRng::new(42);
        let z1 = random_matrix(3, &mut rng);
        let z2 = random_matrix(3, &mut rng);
        let (a, b) = (0.7, -1.3);
        let mut combo = z1.scaled(c(a, 0.0));
        combo.add_scaled(c(b, 0.0), &z2);
        let lhs = hessian_apply(&e, &combo).unwrap();
        let mut rhs = hessian_apply(&e, &z1).unwrap().scaled(c(a, 0.0));
        rhs.add_scaled(c(b, 0.0), &hessian_apply(&e, &z2).unwrap());
        assert!(lhs.sub(&rhs).frobenius_norm() <= 1e-12 * lhs.frobenius_norm().max(1.0));
    }

    #[test]
    fn curvature_nonnegative_when_collection_diagonal() {
        // With diagonal D_k only the squared-commutator term survives.
        let d1 = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 1.0), c(-0.5, 0.3)]);
        let d2 = CMatrix::from_diag(&[c(0.4, -1.0), c(1.5, 0.0), c(2.0, 2.0)]);
        let e = TransformedEnsemble::at_identity(vec![d1, d2]).unwrap();
        let mut rng = SeededRng::new(55);
        for _ in 0..10 {
            let z = random_matrix(3, &mut rng);
            let hz = hessian_apply(&e, &z).unwrap();
            let quad = cmat::real_inner(&hz, &z).unwrap();
            let gn = gauss_newton_curvature(&e, &z).unwrap();
            assert!(quad >= -1e-12 * gn.max(1.0));
            assert!((quad - gn).abs() <= 1e-10 * gn.max(1.0));
        }
    }

    #[test]
    fn gauss_newton_matches_first_summand() {
        let e = random_identity_ensemble(4, 2, 61);
        let mut rng = SeededRng::new(62);
        let z = random_matrix(4, &mut rng);
        // For W = Z the first summand is exactly the masked commutator energy.
        let gn = gauss_newton_curvature(&e, &z).unwrap();
        let mut by_hand = 0.0;
        for d in e.transformed() {
            let mut dz = d.mul(&z);
            dz.add_scaled(-Complex64::ONE, &z.mul(d));
            by_hand += dz.offdiag_norm_sq();
        }
        assert!((gn - by_hand).abs() <= 1e-12 * gn.max(1.0));
    }

    #[test]
    fn taylor_model_at_zero_and_zero_direction() {
        let e = random_identity_ensemble(3, 2, 71);
        let f = objective_value(&e);
        let mut rng = SeededRng::new(72);
        let z = random_matrix(3, &mut rng);
        assert_eq!(taylor_model(&e, &z, 0.0).unwrap(), f);
        let zero = CMatrix::zeros(3, 3);
        for t in [0.1, 0.5, 2.0] {
            assert_eq!(taylor_model(&e, &zero, t).unwrap(), f);
        }
    }

    #[test]
    fn general_basis_matches_identity_after_conjugation() {
        // f_A(UV) = f_{U⁻¹AU}(V) with V = I: conjugating and wrapping at the
        // identity must agree with the general-basis constructor.
        let mut rng = SeededRng::new(81);
        let mats: Vec<CMatrix> = (0..3).map(|_| random_matrix(4, &mut rng)).collect();
        let base = MatrixEnsemble::new(mats.clone()).unwrap();
        let u = random_matrix(4, &mut rng);
        let e_gen = TransformedEnsemble::new(&base, u.clone()).unwrap();
        let e_id = TransformedEnsemble::at_identity(e_gen.transformed().to_vec()).unwrap();
        let fv_gen = objective_value(&e_gen);
        let fv_id = objective_value(&e_id);
        assert!((fv_gen - fv_id).abs() <= 1e-12 * fv_gen.max(1.0));
    }

    #[test]
    fn ensemble_rejects_mixed_dimensions() {
        let a = CMatrix::identity(2);
        let b = CMatrix::identity(3);
        assert!(MatrixEnsemble::new(vec![a, b]).is_err());
        assert!(MatrixEnsemble::new(vec![]).is_err());
    }
}
