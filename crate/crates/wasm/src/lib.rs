//! Browser bindings for the interactive demo page.
//!
//! Three operations, each returning a JSON payload the page renders on a
//! canvas:
//!
//! - [`solver_traces`]: run the three solvers on one seeded instance and
//!   return their objective traces.
//! - [`step_slice`]: sample the objective along the gradient directions of
//!   the additive and multiplicative updates, with the singularity-free
//!   radii and the chosen steps.
//! - [`harmonic_demo`]: synthesize a 3-D sum of damped exponentials, reduce
//!   it via multilevel ESPRIT, diagonalize, and return true vs. estimated
//!   frequencies.

use jointdiag::cmat::{self, CMatrix};
use jointdiag::ensemble;
use jointdiag::harmonic::{self, HarmonicModel};
use jointdiag::objective::{self, TransformedEnsemble};
use jointdiag::solvers::{self, Algorithm, Init, SolverConfig};
use jointdiag::stepsize;
use num_complex::Complex64;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_init(init: &str) -> Init {
    match init {
        "identity" => Init::Identity,
        _ => Init::EigSum,
    }
}

/// Runs gradient descent, conjugate gradient, and quasi-Newton on the same
/// seeded noisy instance; returns objective traces and summary numbers.
#[wasm_bindgen]
pub fn solver_traces(
    n: usize,
    k: usize,
    snr_db: f64,
    seed: u64,
    init: &str,
    max_iters: usize,
) -> Result<String, JsError> {
    if !(2..=40).contains(&n) || !(1..=20).contains(&k) {
        return Err(JsError::new("supported sizes: 2 <= n <= 40, 1 <= k <= 20"));
    }
    let gt = ensemble::generate(n, k, snr_db, seed);
    let floor = ensemble::objective_floor(&gt).map_err(|e| JsError::new(&e.to_string()))?;
    let mut payload = serde_json::Map::new();
    for (label, alg) in [
        ("gd", Algorithm::Gd),
        ("cg", Algorithm::Cg),
        ("qn", Algorithm::Qn),
    ] {
        let cfg = SolverConfig {
            algorithm: alg,
            init: parse_init(init),
            max_iters,
            rel_tol: 1e-12,
            seed,
            ..Default::default()
        };
        let r = solvers::solve(&gt.noisy, &cfg).map_err(|e| JsError::new(&e.to_string()))?;
        let objectives: Vec<f64> = r.trace.iter().map(|row| row.objective).collect();
        let lambdas: Vec<f64> = r.trace.iter().map(|row| row.lambda).collect();
        payload.insert(
            label.to_string(),
            json!({
                "objectives": objectives,
                "lambdas": lambdas,
                "iterations": r.iterations(),
                "final_objective": r.final_objective(),
            }),
        );
    }
    payload.insert("noise_floor".into(), json!(floor));
    Ok(serde_json::Value::Object(payload).to_string())
}

/// Samples the objective along the two gradient directions from the
/// eigenvector-sum starting basis: the raw (additive) direction and the
/// basis-changed (multiplicative) one. The singularity-free radius of the
/// multiplicative direction is typically several times larger.
#[wasm_bindgen]
pub fn step_slice(
    n: usize,
    k: usize,
    snr_db: f64,
    seed: u64,
    points: usize,
) -> Result<String, JsError> {
    if !(2..=30).contains(&n) || !(1..=20).contains(&k) || !(16..=4000).contains(&points) {
        return Err(JsError::new("supported: 2<=n<=30, 1<=k<=20, 16<=points<=4000"));
    }
    let gt = ensemble::generate(n, k, snr_db, seed);
    let (_, u0) = cmat::eig(&gt.noisy.sum()).map_err(|e| JsError::new(&e.to_string()))?;
    let e = TransformedEnsemble::new(&gt.noisy, u0.clone()).map_err(|e| JsError::new(&e.to_string()))?;
    let conjugated = e.transformed().to_vec();

    // Multiplicative direction: negative gradient at the identity of the
    // conjugated collection. Additive direction expressed in the same
    // coordinates: f(U + λS₁) = f_conj(I + λ·U⁻¹U⁻*·S₂).
    let e_id = TransformedEnsemble::at_identity(conjugated.clone())
        .map_err(|e| JsError::new(&e.to_string()))?;
    let g = objective::gradient(&e_id);
    let s_mult = g.scaled(-Complex64::ONE);
    let u0_inv = cmat::inverse(&u0).map_err(|e| JsError::new(&e.to_string()))?;
    let s_add = u0_inv.mul(&u0_inv.adjoint()).mul(&s_mult);

    let radius = |s: &CMatrix| -> f64 {
        match cmat::eigenvalues(s) {
            Ok(vals) => {
                let rho = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if rho > 0.0 {
                    1.0 / rho
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::NAN,
        }
    };
    let rho_inv_mult = radius(&s_mult);
    let rho_inv_add = radius(&s_add);
    let hi = 2.2 * rho_inv_mult.max(rho_inv_add).min(1e6);

    let sample = |s: &CMatrix| -> Vec<f64> {
        (0..=points)
            .map(|i| {
                let lambda = hi * i as f64 / points as f64;
                let mut b = CMatrix::identity(n);
                b.add_scaled(Complex64::new(lambda, 0.0), s);
                match cmat::inverse(&b) {
                    Ok(b_inv) => {
                        0.5 * conjugated
                            .iter()
                            .map(|d| b_inv.mul(d).mul(&b).offdiag_norm_sq())
                            .sum::<f64>()
                    }
                    Err(_) => f64::INFINITY,
                }
            })
            .collect()
    };

    let step_mult = stepsize::choose_step(&e_id, &s_mult, 2.0)
        .map_err(|e| JsError::new(&e.to_string()))?;
    let step_add = stepsize::choose_step(&e_id, &s_add, 2.0)
        .map_err(|e| JsError::new(&e.to_string()))?;

    let lambdas: Vec<f64> = (0..=points).map(|i| hi * i as f64 / points as f64).collect();
    Ok(json!({
        "lambda": lambdas,
        "f_mult": sample(&s_mult),
        "f_add": sample(&s_add),
        "rho_inv_mult": rho_inv_mult,
        "rho_inv_add": rho_inv_add,
        "lambda_max_mult": 1.0 / (2.0 * s_mult.frobenius_norm()),
        "lambda_max_add": 1.0 / (2.0 * s_add.frobenius_norm()),
        "lambda_chosen_mult": step_mult.lambda,
        "lambda_chosen_add": step_add.lambda,
        "f0": objective::objective_value(&e_id),
    })
    .to_string())
}

/// End-to-end harmonic retrieval on a cubic grid; returns per-axis true and
/// estimated angular frequencies plus the matched error.
#[wasm_bindgen]
pub fn harmonic_demo(
    k_modes: usize,
    grid_edge: usize,
    snr_db: f64,
    seed: u64,
) -> Result<String, JsError> {
    if !(1..=27).contains(&k_modes) || !(4..=17).contains(&grid_edge) {
        return Err(JsError::new("supported: 1<=modes<=27, 4<=grid<=17"));
    }
    let model = HarmonicModel::random(k_modes, (grid_edge, grid_edge, grid_edge), snr_db, seed);
    let cube = harmonic::synthesize(&model);
    let reduced =
        harmonic::esprit_reduce(&cube, k_modes).map_err(|e| JsError::new(&e.to_string()))?;
    let cfg = SolverConfig {
        algorithm: Algorithm::Cg,
        init: Init::EigSum,
        seed,
        ..Default::default()
    };
    let r = solvers::solve(&reduced, &cfg).map_err(|e| JsError::new(&e.to_string()))?;
    let est = harmonic::recover_frequencies(&r).map_err(|e| JsError::new(&e.to_string()))?;
    let err = harmonic::frequency_error(&est, &model.freqs)
        .map_err(|e| JsError::new(&e.to_string()))?;

    let freqs_json = |fs: &[[Complex64; 3]]| -> serde_json::Value {
        json!(fs
            .iter()
            .map(|f| [f[0].im, f[1].im, f[2].im])
            .collect::<Vec<_>>())
    };
    Ok(json!({
        "true_freqs": freqs_json(&model.freqs),
        "est_freqs": freqs_json(&est),
        "freq_error": err,
        "objective": r.final_objective(),
        "iterations": r.iterations(),
        "n": reduced.n(),
        "k": reduced.len(),
    })
    .to_string())
}
