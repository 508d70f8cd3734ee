//! Browser bindings for `www/index.html`.
//!
//! Errors are returned as plain strings so the functions stay callable
//! (and testable) outside a JavaScript host.

use pam_core::lyapunov::{figure2_table, gamma2_general, gamma_k_onesided, intermittency_report, ReportModel};
use pam_core::quadrature::{first_moment_q, onesided_moment_q, second_moment_q};
use pam_core::{ModelParams, MomentResult, OrderedTuple};
use wasm_bindgen::prelude::*;

/// Largest ν grid the figure endpoint accepts.
const MAX_POINTS: usize = 400;

#[wasm_bindgen]
#[derive(Debug, Clone, Copy)]
pub struct Moment {
    log_value: f64,
    sign: f64,
    rel_error: f64,
}

#[wasm_bindgen]
impl Moment {
    #[wasm_bindgen(getter)]
    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    #[wasm_bindgen(getter)]
    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// Linear value; `Infinity` once it overflows.
    #[wasm_bindgen(getter)]
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_value.exp()
        }
    }

    #[wasm_bindgen(getter)]
    pub fn rel_error(&self) -> f64 {
        self.rel_error
    }
}

impl From<MomentResult> for Moment {
    fn from(r: MomentResult) -> Self {
        Self { log_value: r.log_abs, sign: r.sign, rel_error: r.rel_error }
    }
}

fn moment_inner(p: f64, q: f64, beta: f64, t: f64, n: &[i32]) -> pam_core::Result<MomentResult> {
    let params = ModelParams::new(p, q, beta)?;
    let mut n: Vec<i64> = n.iter().map(|&x| x as i64).collect();
    n.sort_unstable_by(|a, b| b.cmp(a));
    match n.len() {
        0 => Err(pam_core::PamError::InvalidParameter("give at least one site".into())),
        1 => first_moment_q(&params, t, n[0]),
        2 if !params.is_one_sided() => second_moment_q(&params, t, n[0], n[1]),
        _ => {
            if !params.is_one_sided() {
                return Err(pam_core::PamError::Precondition(
                    "moments of order 3 and up need p = 2, q = 0".into(),
                ));
            }
            onesided_moment_q(beta, t, &OrderedTuple::new(n)?)
        }
    }
}

/// `E[∏ Z(t,nᵢ)]` by contour quadrature. Sites may come in any order.
#[wasm_bindgen]
pub fn moment(p: f64, q: f64, beta: f64, t: f64, n: &[i32]) -> Result<Moment, String> {
    moment_inner(p, q, beta, t, n).map(Moment::from).map_err(|e| e.to_string())
}

/// Rows of `ν, γ̃₁ − γ₁, γ₁ − γ₁, γ₂/2 − γ₁, …, γ_k/k − γ₁`, flattened;
/// each row has `k_max + 2` entries.
#[wasm_bindgen]
pub fn exponent_curves(nu_min: f64, nu_max: f64, points: usize, k_max: usize) -> Result<Vec<f64>, String> {
    if !(nu_min > 0.0 && nu_min < nu_max) || !(2..=MAX_POINTS).contains(&points) || !(1..=8).contains(&k_max) {
        return Err(format!("need 0 < ν_min < ν_max, 2 ≤ points ≤ {MAX_POINTS}, 1 ≤ k_max ≤ 8"));
    }
    let nus: Vec<f64> = (0..points)
        .map(|i| nu_min + (nu_max - nu_min) * i as f64 / (points - 1) as f64)
        .collect();
    let rows = figure2_table(&nus, k_max).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|r| [r.nu, r.tilde_gamma1].into_iter().chain(r.scaled.iter().copied()))
        .collect())
}

/// Text table of exponents and the intermittency chain for one model.
/// `model` is `onesided` (uses `nu`) or `symmetric` (uses `beta`).
#[wasm_bindgen]
pub fn exponent_report(model: &str, nu: f64, beta: f64, k_max: usize) -> Result<String, String> {
    let run = || -> pam_core::Result<String> {
        let mut out = String::new();
        match model {
            "onesided" => {
                for k in 1..=k_max {
                    let g = gamma_k_onesided(k, nu)?;
                    out.push_str(&format!("γ_{k}(1;{nu}) = {:.10}\n", g.value));
                }
                let rep = intermittency_report(nu, k_max, ReportModel::OneSided)?;
                for c in &rep.comparisons {
                    out.push_str(&format!("{} < {}  margin {:.3e}\n", c.lower, c.upper, c.margin));
                }
            }
            "symmetric" => {
                let ex = gamma2_general(&ModelParams::symmetric(beta)?)?;
                out.push_str(&format!("γ₁ = {:.10}\nγ₂ = {:.10}\n", ex.gamma1, ex.gamma2.value));
            }
            other => return Err(pam_core::PamError::InvalidParameter(format!("unknown model {other}"))),
        }
        Ok(out)
    };
    run().map_err(|e| e.to_string())
}
