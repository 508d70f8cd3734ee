//! First and two-point moments of the general `(p,q)` model.
//!
//! The two-point formula integrates
//! `C(z₁,z₂) F_{n₁}(z₁) F_{n₂}(z₂) dz₁/z₁ dz₂/z₂` with
//! `C = (φ(z₁)−φ(z₂)) / (φ(z₁)−φ(z₂)−2β²)`, `φ(z) = pz − q/z`, the `z₂`
//! circle lying inside every `z₂`-pole. For large `t` that representation
//! cancels catastrophically, so the default route pushes the `z₂` circle out
//! through its poles and keeps the residues as a separate one-dimensional
//! term: `u = (A) + (B)`.

use super::nested::{converge, nested_sum, Converged};
use crate::error::{PamError, Result};
use crate::mathcore::{eval_f_log, Contour, LogComplex, ModelParams, MomentResult, Route};
use num_complex::Complex64;

const CAP_1D: usize = 1 << 20;
const CAP_2D: usize = 1 << 12;
const START: usize = 16;
const RADIUS_RANGE: (f64, f64) = (1.0 / 64.0, 64.0);
const SEPARATION: f64 = 0.05;
const SAMPLES: usize = 2048;

pub const FIRST_MOMENT_TOL: f64 = 1e-12;
pub const SECOND_MOMENT_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(PamError::InvalidParameter(format!("time must be finite and ≥ 0, got {t}")))
    }
}

/// Radius of the circle through the real saddle of `|F_{t,n}(z)/z|`-free
/// part `z^{-n} e^{(t/2)(pz+q/z)}`, clamped to a safe range.
pub fn saddle_radius(params: &ModelParams, t: f64, n: i64) -> f64 {
    let (p, q, n) = (params.p(), params.q(), n as f64);
    let r = if t == 0.0 {
        1.0
    } else if p > 0.0 {
        (n + (n * n + t * t * p * q).sqrt()) / (t * p)
    } else if n < 0.0 {
        t * q / (-2.0 * n)
    } else {
        1.0
    };
    r.clamp(RADIUS_RANGE.0, RADIUS_RANGE.1)
}

fn f_over_z(params: &ModelParams, t: f64, n: i64, z: Complex64) -> LogComplex {
    eval_f_log(z, t, n + 1, params).unwrap_or(LogComplex::ZERO)
}

/// `E[Z(t,n)] = (1/2πi) ∮ F_{t,n}(z) dz/z` on the saddle circle.
pub fn first_moment_q(params: &ModelParams, t: f64, n: i64) -> Result<MomentResult> {
    first_moment_with(params, t, n, FIRST_MOMENT_TOL, None)
}

/// [`first_moment_q`] with an explicit tolerance and optional radius.
pub fn first_moment_with(
    params: &ModelParams,
    t: f64,
    n: i64,
    tol: f64,
    radius: Option<f64>,
) -> Result<MomentResult> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(MomentResult::from_real(if n == 0 { 1.0 } else { 0.0 }, Route::Quadrature, 0.0, 0));
    }
    let r = radius.unwrap_or_else(|| saddle_radius(params, t, n));
    let base = Contour::centered_circle(r, START)?;
    let factor = |_: usize, z: Complex64| f_over_z(params, t, n, z);
    let one = |_: usize, _: usize, _: Complex64, _: Complex64| c(1.0);
    let out = converge(START, CAP_1D, tol, |nodes| {
        nested_sum(&[base.with_nodes(nodes)?], &factor, &one)
    })?;
    Ok(result(&out))
}

fn result(out: &Converged) -> MomentResult {
    MomentResult::from_log(out.value, Route::Quadrature, out.rel_error, out.nodes)
}

fn phi(params: &ModelParams, z: Complex64) -> Complex64 {
    z * params.p() - z.inv() * params.q()
}

/// Cross factor `C(z₁, z₂)` of the two-point formula.
pub fn cross_factor(params: &ModelParams, z1: Complex64, z2: Complex64) -> Complex64 {
    let d = phi(params, z1) - phi(params, z2);
    d / (d - 2.0 * params.beta_sq())
}

/// Poles in `z₂` of `C(z₁, ·)`: roots of `p σ² − (φ(z₁) − 2β²) σ − q = 0`
/// (the spurious root `σ = 0` of the `q = 0` case is dropped).
pub fn z2_poles(params: &ModelParams, z1: Complex64) -> Vec<Complex64> {
    let (p, q) = (params.p(), params.q());
    let b = phi(params, z1) - 2.0 * params.beta_sq();
    if p == 0.0 {
        return if b == c(0.0) { vec![] } else { vec![-q / b] };
    }
    if q == 0.0 {
        return vec![b / p];
    }
    let sq = (b * b + 4.0 * p * q).sqrt();
    let s = if (b.conj() * sq).re >= 0.0 { sq } else { -sq };
    let big = (b + s) / (2.0 * p);
    vec![big, -q / (p * big)]
}

/// Smallest `||σ| − r₂| / r₂` over the `z₂`-poles for `z₁` on the circle
/// `|z₁| = r₁`, together with the worst `(z₁, σ)`.
fn pole_gap(params: &ModelParams, r1: f64, r2: f64) -> (f64, Complex64, Complex64) {
    let mut worst = (f64::INFINITY, c(r1), c(0.0));
    for j in 0..SAMPLES {
        let z1 = Complex64::from_polar(r1, std::f64::consts::TAU * (j as f64 + 0.5) / SAMPLES as f64);
        for s in z2_poles(params, z1) {
            let g = (s.norm() - r2).abs() / r2;
            if g < worst.0 {
                worst = (g, z1, s);
            }
        }
    }
    worst
}

/// Radii of the split representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub r1: f64,
    pub r2: f64,
    /// Relative distance of the nearest `z₂`-pole from the `r₂` circle.
    pub gap: f64,
}

/// Real exponent of the residue integrand at `z₁ = r > 0` through the
/// positive `z₂`-pole.
fn residue_exponent(params: &ModelParams, t: f64, n1: i64, n2: i64, r: f64) -> f64 {
    let z1 = c(r);
    let sigma = z2_poles(params, z1)
        .into_iter()
        .find(|s| s.re > 0.0 && s.im.abs() <= 1e-12 * s.re.max(1.0));
    match sigma {
        Some(s) => f_over_z(params, t, n1, z1).log_abs + f_over_z(params, t, n2, s).log_abs,
        None => f64::INFINITY,
    }
}

fn minimise_residue_radius(params: &ModelParams, t: f64, n1: i64, n2: i64) -> f64 {
    let lo = if params.q() == 0.0 { params.beta_sq() * 1.02 + 1e-3 } else { 1e-2 };
    let (a, b) = (lo.ln(), 100f64.ln());
    let m = 400;
    let grid: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
    let vals: Vec<f64> = grid
        .iter()
        .map(|&x| residue_exponent(params, t, n1, n2, x.exp()))
        .collect();
    let (best, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    if !vals[best].is_finite() {
        return 1.0;
    }
    // golden-section refinement on the neighbouring cells
    let (mut x0, mut x1) = (grid[best.saturating_sub(1)], grid[(best + 1).min(m)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let e = |x: f64| residue_exponent(params, t, n1, n2, x.exp());
    for _ in 0..60 {
        let xa = x1 - g * (x1 - x0);
        let xb = x0 + g * (x1 - x0);
        if e(xa) <= e(xb) {
            x1 = xb;
        } else {
            x0 = xa;
        }
    }
    (0.5 * (x0 + x1)).exp()
}

/// Chooses `(r₁, r₂)` for the split representation: `r₂` through the saddle
/// of `F_{n₂}`, `r₁` through the real saddle of the residue term, both
/// nudged until every `z₂`-pole stays clear of the `r₂` circle.
pub fn split_plan(params: &ModelParams, t: f64, n1: i64, n2: i64) -> Option<SplitPlan> {
    let r2 = saddle_radius(params, t, n2);
    let r1 = minimise_residue_radius(params, t, n1, n2).clamp(RADIUS_RANGE.0, RADIUS_RANGE.1);
    let factors = [1.0, 1.1, 1.0 / 1.1, 1.25, 0.8, 1.5, 1.0 / 1.5, 2.0, 0.5];
    for &f2 in &factors {
        for &f1 in &factors {
            let (a, b) = (r1 * f1, r2 * f2);
            if params.q() == 0.0 && a <= params.beta_sq() * 1.01 {
                continue;
            }
            let (gap, _, _) = pole_gap(params, a, b);
            if gap >= SEPARATION {
                return Some(SplitPlan { r1: a, r2: b, gap });
            }
        }
    }
    None
}

/// Integral of the two-point formula without checking `n₁ ≥ n₂`; off the
/// cone this is the analytic continuation used for boundary checks.
pub fn two_point_integral(params: &ModelParams, t: f64, n1: i64, n2: i64, tol: f64) -> Result<MomentResult> {
    check_time(t)?;
    if t == 0.0 {
        let v = if n1 == 0 && n2 == 0 { 1.0 } else { 0.0 };
        return Ok(MomentResult::from_real(v, Route::Quadrature, 0.0, 0));
    }
    match split_plan(params, t, n1, n2) {
        Some(plan) => split_integral(params, t, n1, n2, plan, tol),
        None => direct_integral(params, t, n1, n2, tol),
    }
}

/// `E[Z(t,n₁) Z(t,n₂)]` for `n₁ ≥ n₂`.
pub fn second_moment_q(params: &ModelParams, t: f64, n1: i64, n2: i64) -> Result<MomentResult> {
    if n1 < n2 {
        return Err(PamError::Precondition(format!("two-point formula requires n1 ≥ n2, got ({n1}, {n2})")));
    }
    if params.beta() == 0.0 {
        let a = first_moment_with(params, t, n1, SECOND_MOMENT_TOL, None)?;
        let b = first_moment_with(params, t, n2, SECOND_MOMENT_TOL, None)?;
        let v = LogComplex::new(a.log_abs + b.log_abs, if a.sign * b.sign < 0.0 { std::f64::consts::PI } else { 0.0 });
        let v = if a.sign == 0.0 || b.sign == 0.0 { LogComplex::ZERO } else { v };
        return Ok(MomentResult::from_log(v, Route::Quadrature, a.rel_error + b.rel_error, a.work.max(b.work)));
    }
    two_point_integral(params, t, n1, n2, SECOND_MOMENT_TOL)
}

/// The split representation `(A) + (B)` for a given plan.
pub fn split_integral(
    params: &ModelParams,
    t: f64,
    n1: i64,
    n2: i64,
    plan: SplitPlan,
    tol: f64,
) -> Result<MomentResult> {
    let b2 = params.beta_sq();
    let residue_factor = |_: usize, z1: Complex64| -> LogComplex {
        let mut terms = Vec::with_capacity(2);
        for s in z2_poles(params, z1) {
            if s.norm() < plan.r2 {
                let dphi = params.p() + params.q() / (s * s);
                let w = LogComplex::from_complex(2.0 * b2 / dphi);
                terms.push(w.mul(&f_over_z(params, t, n2, s)));
            }
        }
        if terms.is_empty() {
            return LogComplex::ZERO;
        }
        f_over_z(params, t, n1, z1).mul(&LogComplex::sum(&terms))
    };
    let one = |_: usize, _: usize, _: Complex64, _: Complex64| c(1.0);
    let c1 = Contour::centered_circle(plan.r1, START)?;
    let b = converge(START, CAP_1D, tol, |n| nested_sum(&[c1.with_nodes(n)?], &residue_factor, &one))?;

    let c2 = Contour::centered_circle(plan.r2, START)?;
    let ns = [n1, n2];
    let factor = |a: usize, z: Complex64| f_over_z(params, t, ns[a], z);
    let cross = |_: usize, _: usize, z1: Complex64, z2: Complex64| cross_factor(params, z1, z2);
    let a = converge(START, CAP_2D, tol, |n| {
        nested_sum(&[c1.with_nodes(n)?, c2.with_nodes(n)?], &factor, &cross)
    })?;

    let total = LogComplex::sum(&[a.value, b.value]);
    let err = if total.is_zero() {
        a.rel_error.max(b.rel_error)
    } else {
        ((a.value.log_abs - total.log_abs).exp() * a.rel_error)
            + ((b.value.log_abs - total.log_abs).exp() * b.rel_error)
    };
    Ok(MomentResult::from_log(total, Route::Quadrature, err, a.nodes.max(b.nodes)))
}

/// Two-point formula on the contours as stated: `z₁` on the unit circle and
/// `z₂` on a circle of radius `r₂` inside all `z₂`-poles.
pub fn second_moment_q_direct(params: &ModelParams, t: f64, n1: i64, n2: i64) -> Result<MomentResult> {
    check_time(t)?;
    direct_integral(params, t, n1, n2, SECOND_MOMENT_TOL)
}

/// Radius search for the inner circle: start at `1/2`, require every pole
/// to have modulus above `1.25 r₂`, halve down to `1e-3`.
pub fn direct_r2(params: &ModelParams) -> Result<f64> {
    let mut r2 = 0.5;
    loop {
        let mut bad = None;
        'scan: for j in 0..SAMPLES {
            let z1 = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / SAMPLES as f64);
            for s in z2_poles(params, z1) {
                if s.norm() <= 1.25 * r2 {
                    bad = Some((z1, s));
                    break 'scan;
                }
            }
        }
        match bad {
            None => return Ok(r2),
            Some((z1, s)) if r2 / 2.0 < 1e-3 => {
                return Err(PamError::PoleSeparation {
                    z1: format!("{z1}"),
                    pole: format!("{s}"),
                })
            }
            Some(_) => r2 /= 2.0,
        }
    }
}

fn direct_integral(params: &ModelParams, t: f64, n1: i64, n2: i64, tol: f64) -> Result<MomentResult> {
    let r2 = direct_r2(params)?;
    let c1 = Contour::centered_circle(1.0, START)?;
    let c2 = Contour::centered_circle(r2, START)?;
    let ns = [n1, n2];
    let factor = |a: usize, z: Complex64| f_over_z(params, t, ns[a], z);
    let cross = |_: usize, _: usize, z1: Complex64, z2: Complex64| cross_factor(params, z1, z2);
    let out = converge(START, CAP_2D, tol, |n| {
        nested_sum(&[c1.with_nodes(n)?, c2.with_nodes(n)?], &factor, &cross)
    })?;
    Ok(result(&out))
}
