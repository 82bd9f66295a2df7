//! General complex eigendecomposition.
//!
//! Householder reduction to upper Hessenberg form, then the explicitly
//! shifted QR iteration with Wilkinson shifts (the complex analogue of the
//! classic EISPACK COMQR routine). Eigenvectors are recovered from the
//! triangular Schur factor by back-substitution and rotated back.

use num_complex::Complex64;

use super::CMatrix;
use crate::{Error, Result};

/// QR steps allowed per matrix dimension before giving up.
const SWEEP_BUDGET_PER_N: usize = 60;

/// Eigenvalues and unit-norm eigenvector columns of a general complex square
/// matrix: `m · vectors ≈ vectors · diag(values)`.
pub fn eig(m: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let (t, z) = schur(m, true)?;
    let z = z.expect("schur vectors requested");
    let values = t.diag();
    let vectors = triangular_eigenvectors(&t, &z);
    Ok((values, vectors))
}

/// Eigenvalues only; skips accumulating transformations.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let (t, _) = schur(m, false)?;
    Ok(t.diag())
}

/// Schur decomposition `m = Z T Z^H` with `T` upper triangular.
fn schur(m: &CMatrix, want_z: bool) -> Result<(CMatrix, Option<CMatrix>)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.n_rows(),
            cols: m.n_cols(),
        });
    }
    let n = m.n_rows();
    let mut h = m.clone();
    let mut z = want_z.then(|| CMatrix::identity(n));
    if n == 1 {
        return Ok((h, z));
    }

    hessenberg(&mut h, z.as_mut());
    qr_iteration(&mut h, z.as_mut())?;
    Ok((h, z))
}

/// In-place Householder reduction to upper Hessenberg form; accumulates the
/// similarity transform into `z` when present.
fn hessenberg(h: &mut CMatrix, mut z: Option<&mut CMatrix>) {
    let n = h.n_rows();
    let mut v = vec![Complex64::ZERO; n];
    for k in 0..n.saturating_sub(2) {
        // Reflector annihilating column k below the subdiagonal.
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += h[(i, k)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let alpha = if x0.norm() == 0.0 {
            Complex64::new(-norm, 0.0)
        } else {
            -(x0 / x0.norm()) * norm
        };
        let mut vnorm_sq = 0.0;
        for i in k + 1..n {
            let mut vi = h[(i, k)];
            if i == k + 1 {
                vi -= alpha;
            }
            v[i] = vi;
            vnorm_sq += vi.norm_sqr();
        }
        if vnorm_sq == 0.0 {
            continue;
        }
        let inv_norm = 1.0 / vnorm_sq.sqrt();
        for item in v.iter_mut().take(n).skip(k + 1) {
            *item *= inv_norm;
        }

        // Left: rows k+1.., columns k.. get (I - 2vv^H).
        for j in k..n {
            let mut w = Complex64::ZERO;
            for i in k + 1..n {
                w += v[i].conj() * h[(i, j)];
            }
            w *= 2.0;
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= w * vi;
            }
        }
        // Right: columns k+1.., all rows.
        for i in 0..n {
            let mut w = Complex64::ZERO;
            for j in k + 1..n {
                w += h[(i, j)] * v[j];
            }
            w *= 2.0;
            for j in k + 1..n {
                let vj = v[j].conj();
                h[(i, j)] -= w * vj;
            }
        }
        if let Some(z) = z.as_deref_mut() {
            for i in 0..n {
                let mut w = Complex64::ZERO;
                for j in k + 1..n {
                    w += z[(i, j)] * v[j];
                }
                w *= 2.0;
                for j in k + 1..n {
                    let vj = v[j].conj();
                    z[(i, j)] -= w * vj;
                }
            }
        }
        // The column is now exactly [alpha, 0, ..., 0]^T.
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = Complex64::ZERO;
        }
    }
}

/// Shifted QR on a Hessenberg matrix, deflating one eigenvalue at a time.
fn qr_iteration(h: &mut CMatrix, mut z: Option<&mut CMatrix>) -> Result<()> {
    let n = h.n_rows();
    let eps = f64::EPSILON;
    let hnorm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let budget = SWEEP_BUDGET_PER_N * n;
    let mut total_steps = 0usize;
    let mut steps_since_deflation = 0usize;
    let mut hi = n - 1;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi > 0 {
        // Smallest l such that the block l..=hi has no negligible subdiagonal.
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = Complex64::ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            steps_since_deflation = 0;
            continue;
        }

        total_steps += 1;
        steps_since_deflation += 1;
        if total_steps > budget {
            return Err(Error::NoConvergence { budget });
        }

        let mu = if steps_since_deflation.is_multiple_of(16) {
            // Exceptional shift to break symmetric stalls.
            let mut kick = h[(hi, hi - 1)].norm();
            if hi >= 2 && hi - 1 > l {
                kick += h[(hi - 1, hi - 2)].norm();
            }
            h[(hi, hi)] + Complex64::new(1.5 * kick, 0.0)
        } else {
            wilkinson_shift(h, hi)
        };

        // Explicit shifted QR step on the active block.
        for i in l..=hi {
            let d = h[(i, i)];
            h[(i, i)] = d - mu;
        }
        rotations.clear();
        for i in l..hi {
            let a = h[(i, i)];
            let b = h[(i + 1, i)];
            let (c, s, r) = givens(a, b);
            rotations.push((c, s));
            h[(i, i)] = r;
            h[(i + 1, i)] = Complex64::ZERO;
            for j in i + 1..n {
                let x = h[(i, j)];
                let y = h[(i + 1, j)];
                h[(i, j)] = c * x + s * y;
                h[(i + 1, j)] = -s.conj() * x + c * y;
            }
        }
        for (idx, i) in (l..hi).enumerate() {
            let (c, s) = rotations[idx];
            for r in 0..=i + 1 {
                let x = h[(r, i)];
                let y = h[(r, i + 1)];
                h[(r, i)] = c * x + s.conj() * y;
                h[(r, i + 1)] = -s * x + c * y;
            }
            if let Some(z) = z.as_deref_mut() {
                for r in 0..n {
                    let x = z[(r, i)];
                    let y = z[(r, i + 1)];
                    z[(r, i)] = c * x + s.conj() * y;
                    z[(r, i + 1)] = -s * x + c * y;
                }
            }
        }
        for i in l..=hi {
            let d = h[(i, i)];
            h[(i, i)] = d + mu;
        }
    }
    Ok(())
}

/// Eigenvalue of the trailing 2x2 block closest to the corner entry.
fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    let l1 = half_tr + disc;
    let l2 = half_tr - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Givens rotation G = [[c, s], [-conj(s), c]] with real c >= 0 such that
/// G · [a, b]^T = [r, 0]^T.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let a_abs = a.norm();
    let b_abs = b.norm();
    if b_abs == 0.0 {
        return (1.0, Complex64::ZERO, a);
    }
    let mag = (a_abs * a_abs + b_abs * b_abs).sqrt();
    if a_abs == 0.0 {
        return (0.0, b.conj() / b_abs, Complex64::new(b_abs, 0.0));
    }
    let phase = a / a_abs;
    let c = a_abs / mag;
    let s = phase * b.conj() / mag;
    (c, s, phase * mag)
}

/// Right eigenvectors of the Schur pair `(t, z)`, unit-norm columns.
fn triangular_eigenvectors(t: &CMatrix, z: &CMatrix) -> CMatrix {
    let n = t.n_rows();
    let tnorm = t.max_abs().max(f64::MIN_POSITIVE);
    let guard = f64::EPSILON * tnorm;
    let mut vt = CMatrix::zeros(n, n);
    for j in 0..n {
        let lambda = t[(j, j)];
        vt[(j, j)] = Complex64::ONE;
        for i in (0..j).rev() {
            let mut s = Complex64::ZERO;
            for k in i + 1..=j {
                s += t[(i, k)] * vt[(k, j)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < guard {
                // Repeated eigenvalue: perturb to keep the solve bounded.
                d = Complex64::new(guard, 0.0);
            }
            vt[(i, j)] = -s / d;
        }
        // Rescale to fend off overflow in pathological clusters.
        let mx = (i_range_max(&vt, j)).max(1.0);
        if mx > 1e100 {
            let inv = 1.0 / mx;
            for i in 0..=j {
                let val = vt[(i, j)];
                vt[(i, j)] = val * inv;
            }
        }
    }
    let mut v = z.mul(&vt);
    for j in 0..n {
        let mut norm_sq = 0.0;
        for i in 0..n {
            norm_sq += v[(i, j)].norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for i in 0..n {
                let val = v[(i, j)];
                v[(i, j)] = val * inv;
            }
        }
    }
    v
}

fn i_range_max(m: &CMatrix, j: usize) -> f64 {
    (0..=j).map(|i| m[(i, j)].norm()).fold(0.0, f64::max)
}
