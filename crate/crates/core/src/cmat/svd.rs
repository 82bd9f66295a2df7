//! Singular values and dominant left singular subspaces.
//!
//! `singular_values` runs one-sided Jacobi on the columns, which resolves
//! small singular values to full precision (no squaring into a Gram matrix).
//! `top_singular_subspace` extracts the leading left singular vectors of a
//! large matrix by randomized block subspace iteration followed by a
//! Rayleigh-Ritz refinement — only matrix products with the input are needed.

use num_complex::Complex64;

use super::CMatrix;
use crate::rng::SeededRng;
use crate::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 60;
const SUBSPACE_MAX_ITERS: usize = 300;

/// All singular values, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let x = if m.n_rows() >= m.n_cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    let (rotated, _) = one_sided_jacobi(x, false);
    let mut sigma: Vec<f64> = (0..rotated.n_cols())
        .map(|j| column_norm(&rotated, j))
        .collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sigma
}

/// Orthogonalizes the columns of `x` by plane rotations: on return the
/// columns of the rotated matrix are mutually orthogonal with norms equal to
/// the singular values. When requested, `v` accumulates the rotations so that
/// `x_input = x_rotated · v^H`.
fn one_sided_jacobi(mut x: CMatrix, want_v: bool) -> (CMatrix, Option<CMatrix>) {
    let n = x.n_cols();
    let rows = x.n_rows();
    let mut v = want_v.then(|| CMatrix::identity(n));
    if n < 2 {
        return (x, v);
    }
    let tol = 1e-15;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = Complex64::ZERO;
                for i in 0..rows {
                    let xp = x[(i, p)];
                    let xq = x[(i, q)];
                    app += xp.norm_sqr();
                    aqq += xq.norm_sqr();
                    apq += xp.conj() * xq;
                }
                let g = apq.norm();
                if g <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Diagonalize the 2x2 Gram block [[app, apq], [apq*, aqq]].
                let phase = apq / g;
                let tau = (aqq - app) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column update [xp', xq'] = [xp, xq] · J with
                // J = [[c, s], [-s·conj(phase), c·conj(phase)]].
                let j10 = -s * phase.conj();
                let j11 = c * phase.conj();
                for i in 0..rows {
                    let xp = x[(i, p)];
                    let xq = x[(i, q)];
                    x[(i, p)] = c * xp + j10 * xq;
                    x[(i, q)] = s * xp + j11 * xq;
                }
                if let Some(v) = v.as_mut() {
                    for i in 0..n {
                        let vp = v[(i, p)];
                        let vq = v[(i, q)];
                        v[(i, p)] = c * vp + j10 * vq;
                        v[(i, q)] = s * vp + j11 * vq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (x, v)
}

fn column_norm(m: &CMatrix, j: usize) -> f64 {
    (0..m.n_rows())
        .map(|i| m[(i, j)].norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Leading `k` left singular vectors and the singular-value estimates of the
/// explored block (descending, length ≥ k). Deterministic given the seed.
pub fn top_singular_subspace(h: &CMatrix, k: usize, seed: u64) -> Result<(CMatrix, Vec<f64>)> {
    let rows = h.n_rows();
    let cols = h.n_cols();
    let min_dim = rows.min(cols);
    if k == 0 || k > min_dim {
        return Err(Error::DimensionMismatch {
            expected: (min_dim, min_dim),
            got: (k, k),
        });
    }
    let block = (k + 8).min(min_dim);
    let mut rng = SeededRng::new(seed ^ 0x5a5a_1234_dead_beef);
    let ha = h.adjoint();

    let omega = CMatrix::from_fn(cols, block, |_, _| rng.complex_gaussian(1.0));
    let mut q = h.mul(&omega);
    orthonormalize_columns(&mut q, &mut rng);

    let mut prev_sigma = vec![f64::INFINITY; k];
    for iter in 0..SUBSPACE_MAX_ITERS {
        let mut z = ha.mul(&q);
        orthonormalize_columns(&mut z, &mut rng);
        let y = h.mul(&z);
        let mut sigma: Vec<f64> = (0..block).map(|j| column_norm(&y, j)).collect();
        sigma.sort_by(|a, b| b.partial_cmp(a).unwrap());
        q = y;
        orthonormalize_columns(&mut q, &mut rng);

        let mut settled = iter >= 1;
        for j in 0..k {
            let denom = sigma[j].max(f64::MIN_POSITIVE);
            if (sigma[j] - prev_sigma[j]).abs() > 1e-12 * denom {
                settled = false;
            }
        }
        prev_sigma[..k].copy_from_slice(&sigma[..k]);
        if settled {
            break;
        }
    }

    // Rayleigh-Ritz: restrict to the subspace and take an exact small SVD.
    let b = q.adjoint().mul(h); // block x cols
    let (rotated, v) = one_sided_jacobi(b.adjoint(), true);
    let v = v.expect("rotations requested");
    let mut order: Vec<usize> = (0..block).collect();
    let norms: Vec<f64> = (0..block).map(|j| column_norm(&rotated, j)).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap());

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    // Left singular vectors of b are the accumulated rotations; lift back.
    let mut w = CMatrix::zeros(rows, k);
    for (out_col, &j) in order.iter().take(k).enumerate() {
        for i in 0..rows {
            let mut acc = Complex64::ZERO;
            for l in 0..block {
                acc += q[(i, l)] * v[(l, j)];
            }
            w[(i, out_col)] = acc;
        }
    }
    Ok((w, sigma))
}

/// Modified Gram-Schmidt with a second orthogonalization pass. Columns that
/// collapse to zero (rank-deficient input) are replaced by fresh random
/// directions orthogonal to the ones already kept.
fn orthonormalize_columns(m: &mut CMatrix, rng: &mut SeededRng) {
    let rows = m.n_rows();
    let cols = m.n_cols();
    let scale = m.max_abs().max(f64::MIN_POSITIVE) * rows as f64;
    for j in 0..cols {
        let mut attempts = 0;
        loop {
            for _pass in 0..2 {
                for prev in 0..j {
                    let mut dot = Complex64::ZERO;
                    for i in 0..rows {
                        dot += m[(i, prev)].conj() * m[(i, j)];
                    }
                    for i in 0..rows {
                        let p = m[(i, prev)];
                        m[(i, j)] -= dot * p;
                    }
                }
            }
            let norm = column_norm(m, j);
            if norm > 1e-14 * scale && norm > 0.0 {
                let inv = 1.0 / norm;
                for i in 0..rows {
                    let val = m[(i, j)];
                    m[(i, j)] = val * inv;
                }
                break;
            }
            // Degenerate column: re-randomize and retry.
            attempts += 1;
            for i in 0..rows {
                m[(i, j)] = rng.complex_gaussian(1.0);
            }
            assert!(attempts < 50, "orthonormalization failed to recover");
        }
    }
}
