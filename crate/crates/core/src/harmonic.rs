//! 3-D harmonic retrieval by multilevel ESPRIT and joint diagonalization.
//!
//! A data cube sampled from a sum of damped complex exponentials is embedded
//! into a 3-level Hankel matrix whose column space (the signal subspace)
//! carries one shift-invariance per axis. Solving the three shift equations
//! in the subspace basis yields matrices `F_1, F_2, F_3` that share joint
//! eigenvectors: their joint eigenvalues, consistently paired by the solver,
//! are the per-axis exponentials `exp(f_{m,d})`. Joint diagonalization is
//! what makes the per-axis estimates line up mode by mode without any
//! separate pairing step.

use num_complex::Complex64;

use crate::cmat::{self, CMatrix};
use crate::metrics;
use crate::objective::MatrixEnsemble;
use crate::rng::SeededRng;
use crate::solvers::JdResult;
use crate::{Error, Result};

/// Sum-of-exponentials model on a regular 3-D grid.
#[derive(Clone, Debug)]
pub struct HarmonicModel {
    pub k_modes: usize,
    /// Per-mode, per-axis complex exponents; the imaginary part is the
    /// angular frequency, the real part a (nonpositive) damping.
    pub freqs: Vec<[Complex64; 3]>,
    pub amps: Vec<Complex64>,
    pub grid: (usize, usize, usize),
    pub snr_db: f64,
    pub seed: u64,
}

impl HarmonicModel {
    /// Random model: frequencies uniform on [0, 2π), dampings on [-0.05, 0],
    /// amplitudes circular Gaussian.
    pub fn random(k_modes: usize, grid: (usize, usize, usize), snr_db: f64, seed: u64) -> Self {
        assert!(k_modes >= 1);
        let mut rng = SeededRng::new(seed);
        let freqs = (0..k_modes)
            .map(|_| {
                let mut f = [Complex64::ZERO; 3];
                for fd in &mut f {
                    let damping = rng.uniform_in(-0.05, 0.0);
                    let omega = rng.uniform_in(0.0, 2.0 * std::f64::consts::PI);
                    *fd = Complex64::new(damping, omega);
                }
                f
            })
            .collect();
        let amps = (0..k_modes).map(|_| rng.complex_gaussian(1.0)).collect();
        HarmonicModel {
            k_modes,
            freqs,
            amps,
            grid,
            snr_db,
            seed,
        }
    }
}

/// Complex 3-D array, index order (a, b, c) with c fastest.
#[derive(Clone, Debug)]
pub struct Cube {
    pub dims: (usize, usize, usize),
    pub data: Vec<Complex64>,
}

impl Cube {
    #[inline]
    pub fn at(&self, a: usize, b: usize, c: usize) -> Complex64 {
        let (_, n2, n3) = self.dims;
        self.data[(a * n2 + b) * n3 + c]
    }
}

/// Evaluates the model on its grid and adds circular Gaussian noise at the
/// model's SNR (applied to the vectorized cube, with `snr_db` scaling the
/// noise amplitude by `10^(-snr/10)` as in [`crate::ensemble`]). The noise
/// pattern depends only on the seed, so sweeps over SNR share it up to
/// amplitude.
pub fn synthesize(model: &HarmonicModel) -> Cube {
    let (n1, n2, n3) = model.grid;
    let k = model.k_modes;
    // Per-axis power tables exp(f_d * index).
    let table = |axis: usize, len: usize| -> Vec<Vec<Complex64>> {
        (0..k)
            .map(|m| (0..len).map(|i| (model.freqs[m][axis] * i as f64).exp()).collect())
            .collect()
    };
    let t1 = table(0, n1);
    let t2 = table(1, n2);
    let t3 = table(2, n3);

    let mut data = vec![Complex64::ZERO; n1 * n2 * n3];
    for a in 0..n1 {
        for b in 0..n2 {
            for c in 0..n3 {
                let mut v = Complex64::ZERO;
                for m in 0..k {
                    v += model.amps[m] * t1[m][a] * t2[m][b] * t3[m][c];
                }
                data[(a * n2 + b) * n3 + c] = v;
            }
        }
    }

    if model.snr_db.is_finite() {
        let power: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        let sigma = (power / data.len() as f64).sqrt() * 10f64.powf(-model.snr_db / 10.0);
        let mut rng = SeededRng::new(model.seed ^ 0x6e6f_6973_655f_7061);
        for v in &mut data {
            *v += rng.complex_gaussian(1.0) * sigma;
        }
    }

    Cube {
        dims: (n1, n2, n3),
        data,
    }
}

/// Ratio below which the trailing signal singular value counts as missing.
const RANK_TOLERANCE: f64 = 1e-10;

/// Reduces a cube to a joint diagonalization problem: three `k_modes ×
/// k_modes` matrices whose joint eigenvalues are the per-axis exponentials.
pub fn esprit_reduce(cube: &Cube, k_modes: usize) -> Result<MatrixEnsemble> {
    let (n1, n2, n3) = cube.dims;
    // Window per axis: ceil((n_d + 1) / 2).
    let l = [(n1 + 2) / 2, (n2 + 2) / 2, (n3 + 2) / 2];
    let m = [n1 - l[0] + 1, n2 - l[1] + 1, n3 - l[2] + 1];
    let rows = l[0] * l[1] * l[2];
    let cols = m[0] * m[1] * m[2];
    // Every axis must keep >= k_modes rows after dropping one slice.
    let min_under = (0..3).map(|d| rows / l[d] * (l[d] - 1)).min().unwrap_or(0);
    if k_modes > cols || k_modes > min_under {
        return Err(Error::DimensionMismatch {
            expected: (min_under.min(cols), min_under.min(cols)),
            got: (k_modes, k_modes),
        });
    }

    // 3-level Hankel: H[(i1,i2,i3), (j1,j2,j3)] = cube[i1+j1, i2+j2, i3+j3].
    let mut h = CMatrix::zeros(rows, cols);
    for i1 in 0..l[0] {
        for i2 in 0..l[1] {
            for i3 in 0..l[2] {
                let r = (i1 * l[1] + i2) * l[2] + i3;
                for j1 in 0..m[0] {
                    for j2 in 0..m[1] {
                        for j3 in 0..m[2] {
                            let c = (j1 * m[1] + j2) * m[2] + j3;
                            h[(r, c)] = cube.at(i1 + j1, i2 + j2, i3 + j3);
                        }
                    }
                }
            }
        }
    }

    let (w, sigma) = cmat::top_singular_subspace(&h, k_modes, 0x4861_6e6b_656c)?;
    if sigma[k_modes - 1] < RANK_TOLERANCE * sigma[0] {
        return Err(Error::RankDeficient {
            index: k_modes - 1,
            sigma: sigma[k_modes - 1],
            sigma_max: sigma[0],
        });
    }

    // Shift equations: rows with i_d < l_d - 1 against the same rows moved
    // one slice up along axis d.
    let strides = [l[1] * l[2], l[2], 1];
    let mut shift_matrices = Vec::with_capacity(3);
    for d in 0..3 {
        let mut under_rows = Vec::new();
        for i1 in 0..l[0] {
            for i2 in 0..l[1] {
                for i3 in 0..l[2] {
                    let idx = [i1, i2, i3];
                    if idx[d] + 1 < l[d] {
                        under_rows.push((i1 * l[1] + i2) * l[2] + i3);
                    }
                }
            }
        }
        let nu = under_rows.len();
        let mut w_under = CMatrix::zeros(nu, k_modes);
        let mut w_over = CMatrix::zeros(nu, k_modes);
        for (out_r, &r) in under_rows.iter().enumerate() {
            for c in 0..k_modes {
                w_under[(out_r, c)] = w[(r, c)];
                w_over[(out_r, c)] = w[(r + strides[d], c)];
            }
        }
        // Least squares F = (W_under)⁺ W_over via the normal equations;
        // W_under has (generically) full column rank k_modes.
        let gram = w_under.adjoint().mul(&w_under);
        let rhs = w_under.adjoint().mul(&w_over);
        let f = cmat::inverse(&gram)?.mul(&rhs);
        shift_matrices.push(f);
    }

    MatrixEnsemble::new(shift_matrices)
}

/// Per-mode, per-axis exponents recovered from a solve on the reduced
/// problem: the principal logarithm of each joint eigenvalue. Rows follow
/// the solver's ordering; matching to a ground truth is a metrics concern.
pub fn recover_frequencies(result: &JdResult) -> Result<Vec<[Complex64; 3]>> {
    if result.diagonals.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: (3, 0),
            got: (result.diagonals.len(), 0),
        });
    }
    let n = result.diagonals[0].len();
    let mut freqs = Vec::with_capacity(n);
    for i in 0..n {
        let mut f = [Complex64::ZERO; 3];
        for (d, fd) in f.iter_mut().enumerate() {
            let v = result.diagonals[d][i];
            if v.norm() == 0.0 {
                return Err(Error::ModeDegenerate { index: i });
            }
            *fd = v.ln();
        }
        freqs.push(f);
    }
    Ok(freqs)
}

/// Squared l2 error between estimated and true angular frequencies (the
/// imaginary parts), wrapped to (-π, π] per axis, minimized over the mode
/// assignment.
pub fn frequency_error(estimated: &[[Complex64; 3]], truth: &[[Complex64; 3]]) -> Result<f64> {
    if estimated.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: (truth.len(), 3),
            got: (estimated.len(), 3),
        });
    }
    let n = truth.len();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..3)
                        .map(|d| wrap_angle(estimated[i][d].im - truth[j][d].im).powi(2))
                        .sum()
                })
                .collect()
        })
        .collect();
    let perm = metrics::min_cost_assignment(&cost);
    Ok(perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum())
}

/// Wraps an angle difference into (-π, π].
fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut y = x - two_pi * (x / two_pi).round();
    if y <= -std::f64::consts::PI {
        y += two_pi;
    }
    y
}
