//! Lyapunov exponents: closed forms, convex root solves, intermittency
//! ordering and finite-time growth-rate fits.

mod fit;
mod roots;

pub use fit::{figure2_table, growth_rate_fit, Figure2Row};
pub use roots::bracketed_newton;

use crate::error::{PamError, Result};
use crate::mathcore::{digamma, ln_gamma, trigamma, ModelParams};

/// `q` below which the general two-sided solve is refused.
pub const MIN_Q: f64 = 1e-3;
pub const MAX_REPORT_K: usize = 10;
const LGAMMA_FROM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentMethod {
    ClosedForm,
    RootFinder,
    GrowthFit,
}

impl ExponentMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ExponentMethod::ClosedForm => "closed-form",
            ExponentMethod::RootFinder => "root-finder",
            ExponentMethod::GrowthFit => "growth-fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentResult {
    pub value: f64,
    pub critical_point: Option<f64>,
    pub method: ExponentMethod,
    pub bracket: Option<(f64, f64)>,
    /// `|H'(z⁰)|` for root solves; error bar for growth fits.
    pub residual: f64,
}

impl ExponentResult {
    fn closed(value: f64) -> Self {
        Self {
            value,
            critical_point: None,
            method: ExponentMethod::ClosedForm,
            bracket: None,
            residual: 0.0,
        }
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(PamError::InvalidParameter(format!("velocity must be finite and > 0, got {nu}")))
    }
}

/// `H_k(z) = k(k−3)/2 + kz − ν log ∏_{i<k} (z+i)`.
pub fn h_k(z: f64, k: usize, nu: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(PamError::InvalidParameter(format!("H_k needs z > 0, got {z}")));
    }
    if k == 0 {
        return Err(PamError::InvalidParameter("order must be ≥ 1".into()));
    }
    let kf = k as f64;
    let log_prod = if k >= LGAMMA_FROM {
        ln_gamma(z + kf) - ln_gamma(z)
    } else {
        (0..k).map(|i| (z + i as f64).ln()).sum()
    };
    Ok(0.5 * kf * (kf - 3.0) + kf * z - nu * log_prod)
}

fn h_k_derivs(z: f64, k: usize, nu: f64) -> (f64, f64) {
    let (mut d1, mut d2) = (0.0, 0.0);
    for i in 0..k {
        let w = 1.0 / (z + i as f64);
        d1 += w;
        d2 += w * w;
    }
    (k as f64 - nu * d1, nu * d2)
}

/// `γ_k(1;ν) = H_k(z⁰_k)` with `H_k'(z⁰_k) = 0`.
pub fn gamma_k_onesided(k: usize, nu: f64) -> Result<ExponentResult> {
    if k == 0 {
        return Err(PamError::InvalidParameter("order must be ≥ 1".into()));
    }
    check_nu(nu)?;
    let root = bracketed_newton(|z| h_k_derivs(z, k, nu))?;
    let value = h_k(root.x, k, nu)?;
    Ok(ExponentResult {
        value,
        critical_point: Some(root.x),
        method: ExponentMethod::RootFinder,
        bracket: Some(root.bracket),
        residual: root.residual,
    })
}

/// `γ₁(1;ν) = −1 + ν − ν log ν`.
pub fn gamma1_onesided(nu: f64) -> Result<f64> {
    check_nu(nu)?;
    Ok(-1.0 + nu - nu * nu.ln())
}

/// One-sided exponent at general `β` from the `β = 1` exponent through
/// Brownian scaling: `γ_k(β;ν) = β²γ_k(1;ν/β²) + k(β²−1) − 2kν log β`.
pub fn gamma_k_onesided_beta(k: usize, beta: f64, nu: f64) -> Result<ExponentResult> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(PamError::InvalidParameter(format!("β must be > 0, got {beta}")));
    }
    let b2 = beta * beta;
    let mut r = gamma_k_onesided(k, nu / b2)?;
    let kf = k as f64;
    r.value = b2 * r.value + kf * (b2 - 1.0) - 2.0 * kf * nu * beta.ln();
    Ok(r)
}

fn s_of(p: f64, q: f64, b2: f64, z: f64) -> f64 {
    let b = p * z - q / z + 2.0 * b2;
    // larger root of p s² − b s − q = 0, written to avoid cancellation
    let d = (b * b + 4.0 * p * q).sqrt();
    if b >= 0.0 {
        (b + d) / (2.0 * p)
    } else {
        2.0 * q / (d - b)
    }
}

/// `H₂(z)` for the general two-sided model.
pub fn h2_general(params: &ModelParams, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(PamError::InvalidParameter(format!("H₂ needs z > 0, got {z}")));
    }
    let (p, q) = (params.p(), params.q());
    if p == 0.0 {
        return Err(PamError::InvalidParameter("H₂ needs p > 0".into()));
    }
    let s = s_of(p, q, params.beta_sq(), z);
    let v = p - q;
    Ok(0.5 * (p * s + q / s - 2.0 - v * s.ln() + p * z + q / z - 2.0 - v * z.ln()))
}

fn h2_prime(p: f64, q: f64, b2: f64, z: f64) -> f64 {
    let s = s_of(p, q, b2, z);
    let v = p - q;
    let ds = (p + q / (z * z)) / (p + q / (s * s));
    0.5 * ((p - q / (s * s) - v / s) * ds + p - q / (z * z) - v / z)
}

/// Exponents of the two-sided model at its characteristic velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedExponents {
    pub gamma1: f64,
    pub gamma2: ExponentResult,
}

/// `γ₂ = H₂(z⁰₂)` for `p, q > 0`; the one-sided point `(2,0)` goes
/// through [`gamma_k_onesided_beta`] at velocity 1.
pub fn gamma2_general(params: &ModelParams) -> Result<TwoSidedExponents> {
    let (p, q, b2) = (params.p(), params.q(), params.beta_sq());
    if params.beta() <= 0.0 {
        return Err(PamError::InvalidParameter("γ₂ needs β > 0".into()));
    }
    if q == 0.0 {
        return Ok(TwoSidedExponents {
            gamma1: 0.0,
            gamma2: gamma_k_onesided_beta(2, params.beta(), 1.0)?,
        });
    }
    if q < MIN_Q || p < MIN_Q {
        return Err(PamError::Precondition(format!(
            "two-sided exponent solve unsupported for min(p,q) < {MIN_Q}"
        )));
    }
    let g = |z: f64| {
        let d = h2_prime(p, q, b2, z);
        let h = 1e-6 * z;
        (d, (h2_prime(p, q, b2, z + h) - h2_prime(p, q, b2, z - h)) / (2.0 * h))
    };
    let root = bracketed_newton(g)?;
    Ok(TwoSidedExponents {
        gamma1: 0.0,
        gamma2: ExponentResult {
            value: h2_general(params, root.x)?,
            critical_point: Some(root.x),
            method: ExponentMethod::RootFinder,
            bracket: Some(root.bracket),
            residual: root.residual,
        },
    })
}

/// `γ̃₁(1;ν) = −3/2 + inf_{z>0} (z − νΨ(z))`.
pub fn almost_sure_replica(nu: f64) -> Result<ExponentResult> {
    check_nu(nu)?;
    let g = |z: f64| {
        let h = 1e-5 * z;
        let d2 = -nu * (trigamma(z + h) - trigamma(z - h)) / (2.0 * h);
        (1.0 - nu * trigamma(z), d2)
    };
    let root = bracketed_newton(g)?;
    Ok(ExponentResult {
        value: -1.5 + root.x - nu * digamma(root.x),
        critical_point: Some(root.x),
        method: ExponentMethod::RootFinder,
        bracket: Some(root.bracket),
        residual: root.residual,
    })
}

/// `(k³−k)/24`.
pub fn she_gamma(k: usize) -> f64 {
    let k = k as f64;
    (k * k * k - k) / 24.0
}

/// The closed-form `γ_k` of the continuum model, wrapped.
pub fn she_gamma_result(k: usize) -> ExponentResult {
    ExponentResult::closed(she_gamma(k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReportModel {
    OneSided,
    Symmetric { beta: f64 },
    She,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub lower: String,
    pub upper: String,
    pub margin: f64,
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntermittencyReport {
    pub entries: Vec<ReportEntry>,
    pub comparisons: Vec<Comparison>,
}

impl IntermittencyReport {
    pub fn all_strict(&self) -> bool {
        self.comparisons.iter().all(|c| c.strict)
    }
}

/// The chain `γ̃₁ < γ₁ < γ₂/2 < ⋯ < γ_{k_max}/k_max` with margins. The
/// symmetric model stops at `k = 2`; `γ̃₁` is only known one-sided.
pub fn intermittency_report(nu: f64, k_max: usize, model: ReportModel) -> Result<IntermittencyReport> {
    if k_max == 0 || k_max > MAX_REPORT_K {
        return Err(PamError::InvalidParameter(format!("k_max must be in 1..={MAX_REPORT_K}")));
    }
    let mut entries = Vec::new();
    match model {
        ReportModel::OneSided => {
            entries.push(ReportEntry {
                label: "gamma_tilde_1".into(),
                value: almost_sure_replica(nu)?.value,
            });
            for k in 1..=k_max {
                entries.push(ReportEntry {
                    label: format!("gamma_{k}/{k}"),
                    value: gamma_k_onesided(k, nu)?.value / k as f64,
                });
            }
        }
        ReportModel::Symmetric { beta } => {
            let params = ModelParams::symmetric(beta)?;
            let ex = gamma2_general(&params)?;
            entries.push(ReportEntry { label: "gamma_1/1".into(), value: ex.gamma1 });
            if k_max >= 2 {
                entries.push(ReportEntry {
                    label: "gamma_2/2".into(),
                    value: ex.gamma2.value / 2.0,
                });
            }
        }
        ReportModel::She => {
            for k in 1..=k_max {
                entries.push(ReportEntry {
                    label: format!("gamma_{k}/{k}"),
                    value: she_gamma(k) / k as f64,
                });
            }
        }
    }
    let comparisons = entries
        .windows(2)
        .map(|w| {
            let margin = w[1].value - w[0].value;
            Comparison {
                lower: w[0].label.clone(),
                upper: w[1].label.clone(),
                margin,
                strict: margin > 0.0,
            }
        })
        .collect();
    Ok(IntermittencyReport { entries, comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_gamma2(nu: f64) -> f64 {
        let r = (1.0 + nu * nu).sqrt();
        -2.0 + nu + r - nu * (0.5 * nu * (nu + r)).ln()
    }

    #[test]
    fn h_k_examples() {
        assert_eq!(h_k(1.0, 1, 1.0).unwrap(), 0.0);
        assert!(h_k(0.0, 2, 1.0).is_err());
        assert!(h_k(-1.0, 2, 1.0).is_err());
        for (z, k, nu) in [(0.3, 5, 1.2), (2.0, 40, 0.7), (7.5, 3, 3.0)] {
            let kf = k as f64;
            let gamma_form = 0.5 * kf * (kf - 3.0) + kf * z - nu * (ln_gamma(z + kf) - ln_gamma(z));
            assert!((h_k(z, k, nu).unwrap() - gamma_form).abs() < 1e-12 * gamma_form.abs().max(1.0));
        }
    }

    #[test]
    fn gamma_2_matches_closed_form() {
        for nu in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let r = gamma_k_onesided(2, nu).unwrap();
            assert!((r.value - paper_gamma2(nu)).abs() < 1e-12, "ν={nu}");
            let z0 = (nu - 1.0 + (1.0 + nu * nu).sqrt()) / 2.0;
            assert!((r.critical_point.unwrap() - z0).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_1_is_minimum_of_h1() {
        assert!(gamma_k_onesided(1, 1.0).unwrap().value.abs() < 1e-15);
        let r = gamma_k_onesided(1, 2.0).unwrap();
        assert!((r.value - (1.0 - 2.0 * 2f64.ln())).abs() < 1e-13);
        assert!((r.value - gamma1_onesided(2.0).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn root_solves_are_tight_and_convex() {
        for k in 1..=10 {
            for nu in [0.1, 0.5, 1.0, 3.0, 10.0] {
                let r = gamma_k_onesided(k, nu).unwrap();
                let z = r.critical_point.unwrap();
                assert!(z > 0.0);
                assert!(h_k_derivs(z, k, nu).0.abs() <= 1e-12);
                assert!(h_k_derivs(z, k, nu).1 > 0.0);
            }
        }
    }

    #[test]
    fn symmetric_gamma2_is_bound_state_energy() {
        // relative coordinate of two walkers: hops ±1 at rate 1, potential β² at 0;
        // the bound state a^{|m|} has energy √(4+β⁴) − 2
        for beta in [0.25f64, 0.5, 1.0, 2.0] {
            let params = ModelParams::symmetric(beta).unwrap();
            let ex = gamma2_general(&params).unwrap();
            let b4 = beta.powi(4);
            assert!((ex.gamma2.value - ((4.0 + b4).sqrt() - 2.0)).abs() < 1e-12, "β={beta}");
            let z0 = 0.5 * (-beta * beta + (4.0 + b4).sqrt());
            assert!((ex.gamma2.critical_point.unwrap() - z0).abs() < 1e-10);
            assert_eq!(ex.gamma1, 0.0);
        }
    }

    #[test]
    fn one_sided_point_delegates_consistently() {
        // at q = 0 the general H₂ is still defined (s = z + β²); its minimum must
        // equal the scaled one-sided exponent
        for beta in [0.5f64, 1.0, 1.7] {
            let params = ModelParams::one_sided(beta).unwrap();
            let via = gamma2_general(&params).unwrap().gamma2.value;
            let direct = (1..4000)
                .map(|i| i as f64 * 1e-3)
                .map(|z| h2_general(&params, z).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!((via - direct).abs() < 1e-6, "β={beta}: {via} vs {direct}");
        }
        assert!(gamma2_general(&ModelParams::new(1.9995, 5e-4, 1.0).unwrap()).is_err());
    }

    #[test]
    fn gamma2_vanishes_with_noise() {
        let small = gamma2_general(&ModelParams::symmetric(1e-3).unwrap()).unwrap().gamma2.value;
        assert!(small.abs() < 1e-10);
    }

    #[test]
    fn replica_exponent() {
        let r = almost_sure_replica(1.0).unwrap();
        let z = r.critical_point.unwrap();
        assert!(z > 1.0 && z < 2.0);
        assert!((trigamma(z) - 1.0).abs() < 1e-12);
        for nu in [0.25, 0.5, 1.0, 2.0, 4.0] {
            assert!(almost_sure_replica(nu).unwrap().value < gamma1_onesided(nu).unwrap());
        }
        let vals: Vec<f64> = (0..100)
            .map(|i| almost_sure_replica(0.05 + i as f64 * 0.05).unwrap().value)
            .collect();
        assert!(vals.iter().all(|v| v.is_finite()));
        assert!(vals.windows(3).all(|w| (w[0] - 2.0 * w[1] + w[2]).abs() <= 0.1));
    }

    #[test]
    fn she_exponents() {
        assert_eq!(she_gamma(1), 0.0);
        assert_eq!(she_gamma(2), 0.25);
        assert_eq!(she_gamma(3), 1.0);
        assert_eq!(she_gamma(4), 2.5);
    }

    #[test]
    fn intermittency_chains() {
        let r = intermittency_report(1.0, 5, ReportModel::OneSided).unwrap();
        assert!(r.all_strict());
        let f = gamma_k_onesided(2, 1.0).unwrap().value - 2.0 * gamma_k_onesided(1, 1.0).unwrap().value;
        let c = r.comparisons.iter().find(|c| c.lower == "gamma_1/1").unwrap();
        assert!((c.margin - f / 2.0).abs() < 1e-14);
        assert!(intermittency_report(1.0, 5, ReportModel::She).unwrap().all_strict());
        assert!(intermittency_report(0.0, 2, ReportModel::Symmetric { beta: 1.0 })
            .unwrap()
            .all_strict());
        assert!(intermittency_report(1.0, 11, ReportModel::She).is_err());
        for k in 1..=9 {
            for nu in [0.25, 1.0, 4.0] {
                let a = gamma_k_onesided(k, nu).unwrap().value / k as f64;
                let b = gamma_k_onesided(k + 1, nu).unwrap().value / (k + 1) as f64;
                assert!(b > a);
            }
        }
    }
}
