//! Shared test oracles, deliberately independent of the closed-form code
//! paths they check: the objective is re-derived entrywise through the raw
//! matrix kernels, derivatives come from finite differences, and line minima
//! from brute-force search.

use jointdiag::cmat::{self, CMatrix};
use jointdiag::rng::SeededRng;
use num_complex::Complex64;

/// Scales Monte Carlo trial counts via JD_PROPTEST_TRIALS (a multiplier in
/// percent would be overkill; the variable simply replaces the default when
/// set).
#[allow(dead_code)]
pub fn trials(default: usize) -> usize {
    std::env::var("JD_PROPTEST_TRIALS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

pub fn random_matrix(n: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0))
}

/// Random direction with unit Frobenius norm.
#[allow(dead_code)]
pub fn random_direction(n: usize, rng: &mut SeededRng) -> CMatrix {
    let m = random_matrix(n, rng);
    let norm = m.frobenius_norm();
    m.scaled(Complex64::new(1.0 / norm, 0.0))
}

pub fn random_collection(n: usize, k: usize, rng: &mut SeededRng) -> Vec<CMatrix> {
    (0..k).map(|_| random_matrix(n, rng)).collect()
}

/// Objective computed the pedestrian way: invert, conjugate, and sum the
/// squared moduli of the off-diagonal entries one by one.
pub fn objective_entrywise(base: &[CMatrix], u: &CMatrix) -> f64 {
    let n = u.n_rows();
    let u_inv = cmat::inverse(u).expect("oracle point must be invertible");
    let mut total = 0.0;
    for a in base {
        let d = u_inv.mul(a).mul(u);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    total += d[(i, j)].norm_sqr();
                }
            }
        }
    }
    0.5 * total
}

/// Central-difference directional derivative of the objective at `u` along
/// `z`.
pub fn fd_gradient_oracle(base: &[CMatrix], u: &CMatrix, z: &CMatrix, h: f64) -> f64 {
    let mut plus = u.clone();
    plus.add_scaled(Complex64::new(h, 0.0), z);
    let mut minus = u.clone();
    minus.add_scaled(Complex64::new(-h, 0.0), z);
    (objective_entrywise(base, &plus) - objective_entrywise(base, &minus)) / (2.0 * h)
}

/// Second central difference along `z`: approximates the quadratic form.
#[allow(dead_code)]
pub fn fd_hessian_oracle(base: &[CMatrix], u: &CMatrix, z: &CMatrix, h: f64) -> f64 {
    let mut plus = u.clone();
    plus.add_scaled(Complex64::new(h, 0.0), z);
    let mut minus = u.clone();
    minus.add_scaled(Complex64::new(-h, 0.0), z);
    (objective_entrywise(base, &plus) - 2.0 * objective_entrywise(base, u)
        + objective_entrywise(base, &minus))
        / (h * h)
}

/// Brute-force minimizer of λ ↦ f(U + λS) on (0, hi]: coarse grid scan
/// followed by golden-section refinement. `budget` caps the number of
/// objective evaluations.
#[allow(dead_code)]
pub fn line_search_oracle(base: &[CMatrix], u: &CMatrix, s: &CMatrix, hi: f64, budget: usize) -> f64 {
    let f = |lambda: f64| -> f64 {
        let mut point = u.clone();
        point.add_scaled(Complex64::new(lambda, 0.0), s);
        match cmat::inverse(&point) {
            Ok(point_inv) => {
                let mut total = 0.0;
                for a in base {
                    let d = point_inv.mul(a).mul(&point);
                    total += d.offdiag_norm_sq();
                }
                0.5 * total
            }
            Err(_) => f64::INFINITY,
        }
    };

    let grid = (budget * 4 / 5).max(8);
    let mut best_idx = 0usize;
    let mut best_val = f64::INFINITY;
    for i in 1..=grid {
        let lambda = hi * i as f64 / grid as f64;
        let v = f(lambda);
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }
    // Golden-section inside the bracketing cells.
    let mut a = hi * best_idx.saturating_sub(1) as f64 / grid as f64;
    let mut b = hi * (best_idx + 1).min(grid) as f64 / grid as f64;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..(budget / 5) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}
