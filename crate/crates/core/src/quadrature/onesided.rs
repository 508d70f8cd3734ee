//! Nested-contour formulas with cross factor `(zₐ − z_b)/(zₐ − z_b − s)`:
//! the one-sided k-point moments (`s = β²`) and the continuum analogue on
//! vertical lines.

use super::nested::{converge, nested_sum, Converged, Factor};
use super::twopoint::first_moment_with;
use crate::error::{PamError, Result};
use crate::mathcore::{Contour, LogComplex, ModelParams, MomentResult, OrderedTuple, Route};
use num_complex::Complex64;

pub const MAX_K_NESTED: usize = 5;
pub const MAX_K_SHE: usize = 4;
pub const ONESIDED_TOL: f64 = 1e-8;
pub const SHE_TOL: f64 = 1e-10;

const START: usize = 16;
/// Digits of cancellation the default radii may lose before the saddle
/// radii are preferred.
const MAX_DEFAULT_LOSS: f64 = 13.8;
/// Ratio `(r_inner + s)/r_outer` of neighbouring default circles.
const DEFAULT_RATIO: f64 = 0.7;
/// Radial gap of the saddle plan, in units of the shift.
const SADDLE_SPACING: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanKind {
    /// Geometrically spaced circles from radius 1/2 outwards.
    Default,
    /// Centred circles through the real saddle of the ground-state string
    /// `w, w + s', w + 2s', …` with `s' = 1.2 s`.
    Saddle,
    /// Radii supplied by the caller.
    Custom,
}

/// Per-variable contours for a nested integral, outermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourPlan {
    pub kind: PlanKind,
    pub contours: Vec<Contour>,
    /// Smallest radial margin `r_a − r_b − s·(b − a)` between nested circles.
    pub margin: f64,
}

impl ContourPlan {
    fn circles(kind: PlanKind, radii: &[f64], shift: f64) -> Result<Self> {
        let contours = radii
            .iter()
            .map(|&r| Contour::centered_circle(r, START))
            .collect::<Result<Vec<_>>>()?;
        let plan = Self {
            kind,
            contours,
            margin: f64::INFINITY,
        };
        plan.validated(shift)
    }

    /// Centred circles with the given radii, outermost first.
    pub fn from_radii(radii: &[f64], shift: f64) -> Result<Self> {
        Self::circles(PlanKind::Custom, radii, shift)
    }

    /// Scales every radius by `factor` (used for contour-independence checks).
    pub fn scaled(&self, factor: f64, shift: f64) -> Result<Self> {
        let radii: Vec<f64> = self.radii().iter().map(|r| r * factor).collect();
        Self::circles(self.kind, &radii, shift)
    }

    pub fn radii(&self) -> Vec<f64> {
        self.contours.iter().map(|c| c.radius().unwrap_or(f64::NAN)).collect()
    }

    /// Checks that contour `a` contains 0 and contour `b` translated by `s`
    /// for every `a < b`.
    fn validated(mut self, shift: f64) -> Result<Self> {
        let mut margin = f64::INFINITY;
        for (a, ca) in self.contours.iter().enumerate() {
            let ra = ca.radius().unwrap_or(0.0);
            let cen_a = ca.center().unwrap_or_default();
            if !ca.encloses(Complex64::new(0.0, 0.0)) {
                return Err(PamError::Contour(format!("contour {a} does not enclose 0")));
            }
            for cb in &self.contours[a + 1..] {
                let rb = cb.radius().unwrap_or(0.0);
                let cen_b = cb.center().unwrap_or_default();
                let m = ra - (cen_b + shift - cen_a).norm() - rb;
                if m <= 0.0 {
                    return Err(PamError::Contour(format!(
                        "contour {a} does not contain the shifted inner contour (margin {m:e})"
                    )));
                }
                margin = margin.min(m);
            }
        }
        self.margin = margin;
        Ok(self)
    }
}

/// Innermost radius `1/2`, each further circle chosen so that the nearest
/// cross-factor pole sits at a fixed fraction of its radius:
/// `r_{j−1} = (r_j + s)/ρ` with `ρ = 0.7`.
pub fn default_plan(k: usize, shift: f64) -> Result<ContourPlan> {
    let mut radii = vec![0.5; k];
    for j in (0..k.saturating_sub(1)).rev() {
        radii[j] = (radii[j + 1] + shift) / DEFAULT_RATIO;
    }
    ContourPlan::circles(PlanKind::Default, &radii, shift)
}

fn log_peak(t: f64, n: i64, r: f64) -> f64 {
    t * (r - 1.0) - (n + 1) as f64 * r.ln()
}

fn plan_peak(plan: &ContourPlan, t: f64, n: &[i64]) -> f64 {
    plan.radii().iter().zip(n).map(|(&r, &m)| log_peak(t, m, r)).sum()
}

/// Circles through the real minimiser of
/// `Σⱼ log|e^{t(zⱼ−1)} zⱼ^{−nⱼ−1}|` along `zⱼ = w + (k−1−j)·1.2s`.
pub fn saddle_plan(t: f64, n: &[i64], shift: f64) -> Result<ContourPlan> {
    let k = n.len();
    let gap = SADDLE_SPACING * shift;
    let offs: Vec<f64> = (0..k).map(|j| (k - 1 - j) as f64 * gap).collect();
    let dphi = |w: f64| -> f64 {
        k as f64 * t - n.iter().zip(&offs).map(|(&m, &o)| (m + 1) as f64 / (w + o)).sum::<f64>()
    };
    let (mut lo, mut hi) = (1e-9, 1.0);
    while dphi(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(PamError::Contour("saddle radius diverges".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dphi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    let radii: Vec<f64> = offs.iter().map(|o| w + o).collect();
    ContourPlan::circles(PlanKind::Saddle, &radii, shift)
}

fn plan_is_practical(plan: &ContourPlan, t: f64) -> bool {
    let rmax = plan.radii().iter().cloned().fold(0.0, f64::max);
    rmax / plan.margin <= 400.0 && t * rmax <= 4000.0
}

/// Picks the default radii unless they would lose more than six digits to
/// cancellation relative to the saddle radii.
pub fn choose_plan(t: f64, n: &[i64], shift: f64) -> Result<ContourPlan> {
    let default = default_plan(n.len(), shift)?;
    if t == 0.0 {
        return Ok(default);
    }
    let saddle = match saddle_plan(t, n, shift) {
        Ok(p) if plan_is_practical(&p, t) => p,
        _ => return Ok(default),
    };
    if plan_peak(&default, t, n) - plan_peak(&saddle, t, n) > MAX_DEFAULT_LOSS {
        Ok(saddle)
    } else {
        Ok(default)
    }
}

fn node_cap(k: usize) -> usize {
    if k <= 2 {
        1 << 20
    } else {
        1 << 12
    }
}

/// `∮⋯∮ ∏_{a<b} (zₐ−z_b)/(zₐ−z_b−s) ∏ⱼ fⱼ(zⱼ) dzⱼ/(2πi)` on the given plan.
pub fn nested_shift_integral(
    factor: &Factor<'_>,
    shift: f64,
    plan: &ContourPlan,
    tol: f64,
) -> Result<Converged> {
    let k = plan.contours.len();
    let cross = |_: usize, _: usize, za: Complex64, zb: Complex64| {
        let d = za - zb;
        d / (d - shift)
    };
    converge(START, node_cap(k), tol, |nodes| {
        let cs = plan
            .contours
            .iter()
            .map(|c| c.with_nodes(nodes))
            .collect::<Result<Vec<_>>>()?;
        nested_sum(&cs, factor, &cross)
    })
}

fn onesided_factor(t: f64, n: &[i64]) -> impl Fn(usize, Complex64) -> LogComplex + Sync + '_ {
    move |a: usize, z: Complex64| LogComplex::exp_of(z * t - t - z.ln() * (n[a] + 1) as f64)
}

/// One-sided nested integral for any integer tuple (no ordering check),
/// on an explicit or automatically chosen plan.
pub fn onesided_integral(
    beta: f64,
    t: f64,
    n: &[i64],
    plan: Option<&ContourPlan>,
    tol: f64,
) -> Result<MomentResult> {
    let k = n.len();
    if k == 0 || k > MAX_K_NESTED {
        return Err(PamError::Precondition(format!(
            "nested quadrature supports 1 ≤ k ≤ {MAX_K_NESTED}, got k = {k}"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) || !(beta >= 0.0 && beta.is_finite()) {
        return Err(PamError::InvalidParameter(format!("need finite t ≥ 0 and β ≥ 0, got t = {t}, β = {beta}")));
    }
    if beta == 0.0 {
        let params = ModelParams::one_sided(0.0)?;
        let mut log_abs = 0.0;
        let mut sign = 1.0;
        let mut err = 0.0;
        for &m in n {
            let r = first_moment_with(&params, t, m, tol, None)?;
            log_abs += r.log_abs;
            sign *= r.sign;
            err += r.rel_error;
        }
        let v = if sign == 0.0 {
            LogComplex::ZERO
        } else {
            LogComplex::new(log_abs, if sign < 0.0 { std::f64::consts::PI } else { 0.0 })
        };
        return Ok(MomentResult::from_log(v, Route::Quadrature, err, 0));
    }
    let shift = beta * beta;
    let chosen;
    let plan = match plan {
        Some(p) => p,
        None => {
            chosen = choose_plan(t, n, shift)?;
            &chosen
        }
    };
    if plan.contours.len() != k {
        return Err(PamError::Precondition("plan and tuple lengths differ".into()));
    }
    let f = onesided_factor(t, n);
    let out = nested_shift_integral(&f, shift, plan, tol)?;
    Ok(MomentResult::from_log(out.value, Route::Quadrature, out.rel_error, out.nodes))
}

/// `E[∏ Z(t, nᵢ)]` for the one-sided model at noise strength `β`.
pub fn onesided_moment_q(beta: f64, t: f64, n: &OrderedTuple) -> Result<MomentResult> {
    if n.entries().iter().any(|&m| m < 0) {
        // jumps only go right, so sites left of the origin stay empty
        return Ok(MomentResult::from_real(0.0, Route::Quadrature, 0.0, 0));
    }
    onesided_integral(beta, t, n.entries(), None, ONESIDED_TOL)
}

/// Vertical-line contours `β²αⱼ + i[−Y, Y]`, `αⱼ = 1.25(k−1−j) + 1/2`.
pub fn she_plan(t: f64, k: usize, beta: f64, tol: f64) -> Result<Vec<Contour>> {
    let b2 = beta * beta;
    let alpha: Vec<f64> = (0..k).map(|j| 1.25 * (k - 1 - j) as f64 + 0.5).collect();
    let amax = alpha.iter().map(|a| a * b2).fold(0.0, f64::max);
    let y = (2.0 * ((1.0 / tol).ln() + t * amax * amax) / t).sqrt();
    if !y.is_finite() || y > 1e5 {
        return Err(PamError::Contour(format!(
            "tail truncation needs half-height {y:e} at t = {t:e}; t is too small for tolerance {tol:e}"
        )));
    }
    alpha
        .iter()
        .map(|a| Contour::vertical_line(b2 * a, y, START))
        .collect()
}

/// Joint moment `E[∏ 𝒵(t, xᵢ)]` of the continuum equation for
/// `x₁ ≤ ⋯ ≤ x_k`.
pub fn she_moment_q(t: f64, x: &[f64], beta: f64) -> Result<MomentResult> {
    she_moment_with(t, x, beta, SHE_TOL)
}

pub fn she_moment_with(t: f64, x: &[f64], beta: f64, tol: f64) -> Result<MomentResult> {
    let k = x.len();
    if k == 0 || k > MAX_K_SHE {
        return Err(PamError::Precondition(format!("continuum moments support 1 ≤ k ≤ {MAX_K_SHE}, got {k}")));
    }
    if x.windows(2).any(|w| w[0] > w[1]) {
        return Err(PamError::Precondition("positions must be weakly increasing".into()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(PamError::InvalidParameter(format!("time must be positive, got {t}")));
    }
    if beta == 0.0 {
        let v: f64 = x
            .iter()
            .map(|xi| (-xi * xi / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt())
            .product();
        return Ok(MomentResult::from_real(v, Route::Quadrature, 0.0, 0));
    }
    let lines = she_plan(t, k, beta, tol)?;
    let shift = beta * beta;
    let factor = |a: usize, z: Complex64| LogComplex::exp_of(z * z * (0.5 * t) + z * x[a]);
    let cross = |_: usize, _: usize, za: Complex64, zb: Complex64| {
        let d = za - zb;
        d / (d - shift)
    };
    let out = converge(START, node_cap(k), tol, |nodes| {
        let cs = lines.iter().map(|c| c.with_nodes(nodes)).collect::<Result<Vec<_>>>()?;
        nested_sum(&cs, &factor, &cross)
    })?;
    Ok(MomentResult::from_log(out.value, Route::Quadrature, out.rel_error, out.nodes))
}
