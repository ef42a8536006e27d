//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string so the page needs no generated type glue beyond `wasm-bindgen`.

use plantlab::ldlr::{ldlr_advantage, Method};
use plantlab::linalg::sym_eigenvalues;
use plantlab::models::{sample_uniform, PlantedModel};
use plantlab::pseudocal::{PseudoCalibration, PSD_TOL};
use plantlab::rng::trial_rng;
use plantlab::sos::{expected_kernel_dim, min_nonzero_eigenvalue, solution_moment_matrix, DistKind, RANK_TOL};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Keeps a single pseudo-calibration build under a few seconds in the browser.
const MAX_PSEUDOCAL_N: usize = 10;

fn js(e: plantlab::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `‖μ̂^{≤d} − 1‖²` for Boolean tensor PCA with `λ = n^exponent` at each n.
#[wasm_bindgen]
pub fn ldlr_curve(k: usize, exponent: f64, d: usize, ns: Vec<u32>) -> Result<String, JsError> {
    let mut points = Vec::new();
    for n in ns {
        let n = n as usize;
        let lambda = (n as f64).powf(exponent);
        let model = PlantedModel::tpca(n, k, lambda, 0.0);
        let r = ldlr_advantage(&model, d, Method::Analytic, 0, 0).map_err(js)?;
        points.push(json!({ "n": n, "lambda": lambda, "norm_sq": r.norm_sq }));
    }
    Ok(json!(points).to_string())
}

/// Spectrum of the pseudo-calibrated matrix `Λ^{≤D}(A)` (d = 1, order-3
/// tensors) on one null sample.
#[wasm_bindgen]
pub fn pseudocal_eigenvalues(n: usize, lambda: f64, big_d: usize, seed: u64) -> Result<String, JsError> {
    if n > MAX_PSEUDOCAL_N {
        return Err(JsError::new(&format!("n = {n} is too slow for the browser demo (max {MAX_PSEUDOCAL_N})")));
    }
    let model = PlantedModel::tpca(n, 3, lambda, 0.0);
    let pc = PseudoCalibration::new(&model, 1, big_d).map_err(js)?;
    let inst = sample_uniform(&model, &mut trial_rng(seed, 0));
    let rep = pc.check(&inst, PSD_TOL).map_err(js)?;
    let ev = sym_eigenvalues(&pc.eval(&inst).map_err(js)?.matrix.data).map_err(js)?;
    Ok(json!({
        "eigenvalues": ev,
        "min_eig_rel": rep.min_eig_rel,
        "lambda_00": rep.lambda_00,
        "certified_value": rep.certified_value,
    })
    .to_string())
}

/// Spectrum of a solution distribution's moment matrix.
#[wasm_bindgen]
pub fn moment_spectrum(kind: &str, n: usize, d: usize) -> Result<String, JsError> {
    let kind: DistKind = kind.parse().map_err(js)?;
    let dist = kind.at(n);
    let x = solution_moment_matrix(&dist, d).map_err(js)?;
    let s = min_nonzero_eigenvalue(&x, RANK_TOL).map_err(js)?;
    let ev = sym_eigenvalues(&x).map_err(js)?;
    Ok(json!({
        "eigenvalues": ev,
        "min_nonzero": s.min_nonzero,
        "kernel_dim": s.kernel_dim,
        "expected_kernel_dim": expected_kernel_dim(&dist, d),
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn exports_return_json() {
        let v: Value = serde_json::from_str(&ldlr_curve(3, 0.85, 4, vec![8, 16]).unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        let v: Value = serde_json::from_str(&moment_spectrum("sphere", 4, 1).unwrap()).unwrap();
        assert!((v["min_nonzero"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        let v: Value = serde_json::from_str(&pseudocal_eigenvalues(6, 1.0, 2, 1).unwrap()).unwrap();
        assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 7);
    }
}
