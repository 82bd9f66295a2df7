//! Scoring: permutation-matched eigenvalue error, campaign medians, and
//! basis-conditioning diagnostics.
//!
//! A joint diagonalizer is only determined up to column permutation and
//! scaling. Eigenvalues are invariant under the scaling, so the error metric
//! stacks each row's diagonal estimates across the collection into a joint
//! vector and finds the permutation minimizing the total squared distance to
//! the ground truth — an optimal assignment problem solved exactly.

use num_complex::Complex64;

use crate::cmat::{self, CMatrix};
use crate::ensemble::GroundTruth;
use crate::objective::{self, TransformedEnsemble};
use crate::solvers::JdResult;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct EigenvalueError {
    /// `matched_permutation[i] = j`: result row i matched to truth row j.
    pub matched_permutation: Vec<usize>,
    pub total_error: f64,
    pub per_index_error: Vec<f64>,
}

/// Matches the result's joint eigenvalue rows to the ground truth by optimal
/// assignment on squared l2 distance and returns the minimal total error.
pub fn eigenvalue_error(result: &JdResult, gt: &GroundTruth) -> Result<EigenvalueError> {
    let k = gt.deltas.len();
    if result.diagonals.len() != k {
        return Err(Error::DimensionMismatch {
            expected: (k, 0),
            got: (result.diagonals.len(), 0),
        });
    }
    let n = gt.deltas[0].len();
    if result.diagonals.iter().any(|d| d.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            got: (result.diagonals[0].len(), n),
        });
    }
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..k)
                        .map(|kk| (result.diagonals[kk][i] - gt.deltas[kk][j]).norm_sqr())
                        .sum()
                })
                .collect()
        })
        .collect();
    let matched_permutation = min_cost_assignment(&cost);
    let per_index_error: Vec<f64> = matched_permutation
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .collect();
    let total_error = per_index_error.iter().sum();
    Ok(EigenvalueError {
        matched_permutation,
        total_error,
        per_index_error,
    })
}

/// Median of log₁₀ of the final objectives. For an even count the
/// lower-middle element is returned, keeping the statistic deterministic.
pub fn median_log10_objective(results: &[JdResult]) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyInput("median of zero results"));
    }
    let values: Vec<f64> = results.iter().map(|r| r.final_objective().log10()).collect();
    Ok(median_lower(&values))
}

/// Lower-middle median of arbitrary values.
pub fn median_lower(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[(sorted.len() - 1) / 2]
}

/// Conditioning diagnostics of a working basis:
///
/// - `cond_uu`: condition number of `U⁻¹U⁻*` (ratio of extreme singular
///   values). Large values mean the additive-update geometry is stretched.
/// - `inv_rho_s1`: `1/ρ(U⁻¹S₁)` for the raw gradient direction
///   `S₁ = U⁻* S₂` — the singularity-free step budget of an additive step.
/// - `inv_rho_s2`: `1/ρ(S₂)` for the basis-changed gradient direction
///   `S₂ = -Σ_k [D_k*, offdiag(D_k)]` — the budget of a multiplicative step.
pub fn basis_diagnostics(u: &CMatrix, e: &TransformedEnsemble) -> Result<(f64, f64, f64)> {
    let u_inv = cmat::inverse(u)?;
    let u_inv_adj = u_inv.adjoint();

    let m = u_inv.mul(&u_inv_adj);
    let sigma = cmat::singular_values(&m);
    let smin = *sigma.last().expect("square matrix has singular values");
    let cond_uu = if smin > 0.0 { sigma[0] / smin } else { f64::INFINITY };

    // Gradient of the transformed collection at the identity, negated.
    let e_id = TransformedEnsemble::at_identity(e.transformed().to_vec())?;
    let s2 = objective::gradient(&e_id).scaled(-Complex64::ONE);
    let s1 = u_inv_adj.mul(&s2);

    let rho = |m: &CMatrix| -> Result<f64> {
        Ok(cmat::eigenvalues(m)?
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max))
    };
    let rho_s1 = rho(&u_inv.mul(&s1))?;
    let rho_s2 = rho(&s2)?;
    let inv = |r: f64| if r > 0.0 { 1.0 / r } else { f64::INFINITY };
    Ok((cond_uu, inv(rho_s1), inv(rho_s2)))
}

/// Exact minimum-cost assignment on a square cost matrix (shortest
/// augmenting paths with potentials, O(n³)). Returns `perm[row] = col`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(n > 0 && cost.iter().all(|r| r.len() == n), "square cost matrix");
    const INF: f64 = f64::INFINITY;

    // 1-indexed potentials; p[j] is the row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}
