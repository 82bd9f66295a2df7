//! Oracles for the acceptance suite, independent of the closed-form paths
//! they verify (finite differences, entrywise sums, brute-force line minima).

use jointdiag::cmat::{self, CMatrix};
use jointdiag::ensemble::GroundTruth;
use jointdiag::rng::SeededRng;
use jointdiag::solvers::{self, Init, SolverConfig};
use num_complex::Complex64;

pub fn random_matrix(n: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0))
}

#[allow(dead_code)]
pub fn random_direction(n: usize, rng: &mut SeededRng) -> CMatrix {
    let m = random_matrix(n, rng);
    let norm = m.frobenius_norm();
    m.scaled(Complex64::new(1.0 / norm, 0.0))
}

/// Objective summed entry by entry through the raw kernels.
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

#[allow(dead_code)]
pub fn fd_gradient_oracle(base: &[CMatrix], u: &CMatrix, z: &CMatrix, h: f64) -> f64 {
    let mut plus = u.clone();
    plus.add_scaled(Complex64::new(h, 0.0), z);
    let mut minus = u.clone();
    minus.add_scaled(Complex64::new(-h, 0.0), z);
    (objective_entrywise(base, &plus) - objective_entrywise(base, &minus)) / (2.0 * h)
}

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

/// Brute-force minimizer of λ ↦ f(U + λS) on (0, hi]: grid scan plus
/// golden-section refinement within a ~1000-evaluation budget.
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

/// Reconstructs the per-iteration working collections, directions, and step
/// lengths of a deterministic multiplicative run from truncated re-runs:
/// `B_m = U_m⁻¹ U_{m+1} = I + λ_m S_m`.
#[allow(dead_code)]
pub fn extract_steps(
    gt: &GroundTruth,
    cfg: &SolverConfig,
    upto: usize,
) -> Vec<(Vec<CMatrix>, CMatrix, f64)> {
    let mut out = Vec::new();
    let mut prev_u = match &cfg.init {
        Init::Identity => CMatrix::identity(gt.noisy.n()),
        Init::EigSum => cmat::eig(&gt.noisy.sum()).unwrap().1,
        Init::User(u) => u.clone(),
    };
    for m in 1..=upto {
        let mut cfg_m = cfg.clone();
        cfg_m.max_iters = m;
        cfg_m.rel_tol = 0.0;
        let r = solvers::solve(&gt.noisy, &cfg_m).unwrap();
        if r.trace.len() != m + 1 {
            break;
        }
        let row = r.trace.last().unwrap();
        let b = cmat::inverse(&prev_u).unwrap().mul(&r.u);
        let mut s = b.clone();
        s.add_scaled(-Complex64::ONE, &CMatrix::identity(b.n_rows()));
        s.scale_mut(Complex64::new(1.0 / row.lambda, 0.0));
        let e = jointdiag::TransformedEnsemble::new(&gt.noisy, prev_u.clone()).unwrap();
        out.push((e.into_transformed(), s, row.lambda));
        prev_u = r.u.clone();
    }
    out
}

/// Prints the per-criterion verdict line and panics on failure.
#[allow(dead_code)]
pub fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "[acceptance] {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}
