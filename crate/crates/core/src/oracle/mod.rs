//! Ground truth by direct integration of the truncated moment ODE systems.
//!
//! The k-point moment `v(t; n⃗) = E[∏ Z(t, nᵢ)]` solves
//! `v' = H v`, `H = ½ Σᵢ [Δ]ᵢ + β² #{a < b : n_a = n_b}`,
//! with `v(0; n⃗) = ∏ 1{nᵢ = 0}`. The system is truncated to a finite box
//! and integrated with an embedded Runge–Kutta pair; a certificate on the
//! box boundary guards the truncation.

mod integrator;

pub use integrator::{integrate, Integrator};

use crate::error::{PamError, Result};
use crate::mathcore::{ModelParams, MomentResult, Route};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// Largest order for the two-sided system.
pub const MAX_K_TWO_SIDED: usize = 2;
/// Largest order for the one-sided `(2,0)` system.
pub const MAX_K_ONE_SIDED: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub tol: f64,
    /// Window half-width `L`; `None` applies the sizing rule.
    pub window: Option<usize>,
    pub integrator: Integrator,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            window: None,
            integrator: Integrator::DormandPrince,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// `L = ⌈2(p+q+β²)t + 10√t + 10 + max|nᵢ|⌉`.
pub fn window_rule(params: &ModelParams, t: f64, n: &[i64]) -> usize {
    let reach = n.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64;
    (2.0 * (2.0 + params.beta_sq()) * t + 10.0 * t.sqrt() + 10.0 + reach).ceil() as usize
}

/// Dense moment array over a box `[lo, hi]^k`.
#[derive(Debug, Clone)]
pub struct MomentField {
    k: usize,
    lo: i64,
    size: usize,
    one_sided: bool,
    pub t: f64,
    pub values: Vec<f64>,
    pub steps: usize,
}

impl MomentField {
    fn empty(k: usize, lo: i64, size: usize, one_sided: bool) -> Self {
        Self {
            k,
            lo,
            size,
            one_sided,
            t: 0.0,
            values: vec![0.0; size.pow(k as u32)],
            steps: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Inclusive coordinate range of the box.
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.size as i64 - 1)
    }

    pub fn is_one_sided(&self) -> bool {
        self.one_sided
    }

    fn index(&self, n: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for &x in n {
            let c = x - self.lo;
            if c < 0 || c >= self.size as i64 {
                return None;
            }
            idx = idx * self.size + c as usize;
        }
        Some(idx)
    }

    fn coords(&self, mut idx: usize, out: &mut [i64]) {
        for slot in out.iter_mut().rev() {
            *slot = (idx % self.size) as i64 + self.lo;
            idx /= self.size;
        }
    }

    /// Value at `n⃗`; zero outside the box.
    pub fn get(&self, n: &[i64]) -> f64 {
        assert_eq!(n.len(), self.k, "tuple length must equal the field order");
        self.index(n).map_or(0.0, |i| self.values[i])
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        n.len() == self.k && self.index(n).is_some()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Sum of `|v|` over the sites where some coordinate sits on a
    /// truncation edge (only the upper edge for the one-sided box, whose
    /// lower layer is the absorbing boundary).
    pub fn boundary_mass(&self) -> f64 {
        let mut c = vec![0i64; self.k];
        let (lo, hi) = self.window();
        let mut s = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            self.coords(i, &mut c);
            let edge = c.iter().any(|&x| x == hi || (!self.one_sided && x == lo));
            if edge {
                s += v.abs();
            }
        }
        s
    }

    /// Largest `|v(n⃗) − v(σn⃗)|` over random sites and permutations.
    pub fn symmetry_defect(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = self.window();
        let mut n = vec![0i64; self.k];
        let mut worst = 0.0f64;
        for _ in 0..samples {
            // bias samples towards the bulk where values are not negligible
            let spread = ((hi - lo) / 4).max(1);
            for x in n.iter_mut() {
                *x = rng.random_range(-spread..=spread).clamp(lo, hi);
            }
            let mut m = n.clone();
            m.shuffle(&mut rng);
            worst = worst.max((self.get(&n) - self.get(&m)).abs());
        }
        worst
    }

    /// Writes `t,n,value` rows (`n` joined with `;`) for every site.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,n,value")?;
        let mut c = vec![0i64; self.k];
        for (i, v) in self.values.iter().enumerate() {
            self.coords(i, &mut c);
            let label: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{:.17e},{},{:.17e}", self.t, label.join(";"), v)?;
        }
        Ok(())
    }
}

/// Matrix-free generator on the truncated box.
struct Generator {
    k: usize,
    size: usize,
    half_p: f64,
    half_q: f64,
    diag: Vec<f64>,
    /// Sites whose value is pinned at zero (the one-sided `n = −1` layer).
    pinned: Vec<usize>,
}

impl Generator {
    fn new(field: &MomentField, params: &ModelParams) -> Self {
        let k = field.k;
        let mut c = vec![0i64; k];
        let mut diag = Vec::with_capacity(field.values.len());
        let mut pinned = Vec::new();
        for i in 0..field.values.len() {
            field.coords(i, &mut c);
            let mut pairs = 0usize;
            for a in 0..k {
                for b in a + 1..k {
                    if c[a] == c[b] {
                        pairs += 1;
                    }
                }
            }
            diag.push(-(k as f64) + params.beta_sq() * pairs as f64);
            if field.one_sided && c.contains(&field.lo) {
                pinned.push(i);
            }
        }
        Self {
            k,
            size: field.size,
            half_p: 0.5 * params.p(),
            half_q: 0.5 * params.q(),
            diag,
            pinned,
        }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for ((o, &d), &x) in out.iter_mut().zip(&self.diag).zip(v) {
            *o = d * x;
        }
        let m = self.size;
        let total = v.len();
        for axis in 0..self.k {
            let stride = m.pow((self.k - 1 - axis) as u32);
            let block = stride * m;
            for base in (0..total).step_by(block) {
                for c in 0..m {
                    let row = base + c * stride;
                    if c >= 1 && self.half_p != 0.0 {
                        let src = row - stride;
                        for j in 0..stride {
                            out[row + j] += self.half_p * v[src + j];
                        }
                    }
                    if c + 1 < m && self.half_q != 0.0 {
                        let src = row + stride;
                        for j in 0..stride {
                            out[row + j] += self.half_q * v[src + j];
                        }
                    }
                }
            }
        }
        for &i in &self.pinned {
            out[i] = 0.0;
        }
    }
}

fn check_order(params: &ModelParams, k: usize) -> Result<()> {
    if k == 0 {
        return Err(PamError::Precondition("moment order must be at least 1".into()));
    }
    let cap = if params.is_one_sided() { MAX_K_ONE_SIDED } else { MAX_K_TWO_SIDED };
    if k > cap {
        return Err(PamError::Precondition(format!(
            "moment ODE oracle supports k ≤ {cap} for (p,q) = ({}, {}), got k = {k}",
            params.p(),
            params.q()
        )));
    }
    Ok(())
}

/// Integrates the k-point system to time `t` over the whole box.
///
/// `reach` is the largest `|nᵢ|` the caller intends to read; it only enters
/// the window sizing rule. The one-sided `(2,0)` system uses the box
/// `{−1,…,L}^k` with the `−1` layer held at zero.
pub fn solve_field(
    params: &ModelParams,
    k: usize,
    t: f64,
    reach: i64,
    opts: &OdeOptions,
) -> Result<MomentField> {
    check_order(params, k)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(PamError::InvalidParameter(format!("time must be finite and ≥ 0, got {t}")));
    }
    if !(opts.tol > 0.0 && opts.tol < 1e-2) {
        return Err(PamError::InvalidParameter(format!("tolerance must lie in (0, 1e-2), got {}", opts.tol)));
    }
    let l = opts.window.unwrap_or_else(|| window_rule(params, t, &[reach]));
    if (l as i64) < reach.abs() + 1 {
        return Err(PamError::Precondition(format!(
            "window half-width {l} does not contain the requested sites (|n| ≤ {reach})"
        )));
    }
    let one_sided = params.is_one_sided();
    let (lo, size) = if one_sided { (-1, l + 2) } else { (-(l as i64), 2 * l + 1) };
    let mut field = MomentField::empty(k, lo, size, one_sided);
    let origin = field.index(&vec![0; k]).expect("origin lies inside the window");
    field.values[origin] = 1.0;

    let gen = Generator::new(&field, params);
    let rate = k as f64 + params.beta_sq() * (k * (k - 1) / 2) as f64;
    let mut values = std::mem::take(&mut field.values);
    let steps = integrate(opts.integrator, &mut values, t, opts.tol, rate, |y, out| {
        gen.apply(y, out)
    })?;
    field.values = values;
    field.t = t;
    field.steps = steps;

    let boundary = field.boundary_mass();
    let limit = opts.tol * field.max_value();
    if boundary > limit {
        return Err(PamError::WindowTooSmall {
            boundary,
            limit,
            suggested: 2 * l,
        });
    }
    Ok(field)
}

/// `E[∏ Z(t, nᵢ)]` from the moment ODE system.
pub fn ode_moment(params: &ModelParams, n: &[i64], t: f64, opts: &OdeOptions) -> Result<MomentResult> {
    let reach = n.iter().map(|x| x.abs()).max().unwrap_or(0);
    let field = solve_field(params, n.len(), t, reach, opts)?;
    let v = field.get(n);
    Ok(MomentResult::from_real(v, Route::Ode, opts.tol, field.steps))
}

/// Normalised residual of the two-point boundary operator
/// `T_β u(n) = β²u(n,n) + (p/2)u(n,n−1) + (q/2)u(n+1,n) − (p/2)u(n−1,n) − (q/2)u(n,n+1)`
/// over the diagonal sites `n ∈ diagonal`, divided by `scale`.
///
/// `u` must supply values one step off the cone `n₁ ≥ n₂` as well.
pub fn boundary_residual_two_sided<U, I>(params: &ModelParams, u: U, diagonal: I, scale: f64) -> f64
where
    U: Fn(i64, i64) -> f64,
    I: IntoIterator<Item = i64>,
{
    let (hp, hq, b2) = (0.5 * params.p(), 0.5 * params.q(), params.beta_sq());
    diagonal
        .into_iter()
        .map(|n| {
            let r = b2 * u(n, n) + hp * u(n, n - 1) + hq * u(n + 1, n)
                - hp * u(n - 1, n)
                - hq * u(n, n + 1);
            r.abs() / scale
        })
        .fold(0.0, f64::max)
}

/// Normalised residual of `([Δ]ᵢ − [Δ]ᵢ₊₁ − 2β²) u` for the one-sided
/// operator `[Δ]ᵢ u(n⃗) = 2(u(n⃗ − eᵢ) − u(n⃗))`, evaluated at every
/// supplied site and every adjacent pair with `nᵢ = nᵢ₊₁`.
pub fn boundary_residual_one_sided<U>(beta: f64, u: U, sites: &[Vec<i64>], scale: f64) -> f64
where
    U: Fn(&[i64]) -> f64,
{
    let b2 = beta * beta;
    let mut worst = 0.0f64;
    for n in sites {
        let centre = u(n);
        for i in 0..n.len().saturating_sub(1) {
            if n[i] != n[i + 1] {
                continue;
            }
            let mut a = n.clone();
            a[i] -= 1;
            let mut b = n.clone();
            b[i + 1] -= 1;
            let r = 2.0 * (u(&a) - centre) - 2.0 * (u(&b) - centre) - 2.0 * b2 * centre;
            worst = worst.max(r.abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::ln_gamma;

    fn poisson(t: f64, n: i64) -> f64 {
        (-t + n as f64 * t.ln() - ln_gamma(n as f64 + 1.0)).exp()
    }

    #[test]
    fn one_sided_first_moment_is_poisson() {
        let m = ModelParams::one_sided(1.7).unwrap();
        for t in [1.0, 5.0] {
            let f = solve_field(&m, 1, t, 25, &OdeOptions::default()).unwrap();
            for n in 0..=25 {
                assert!((f.get(&[n]) - poisson(t, n)).abs() < 1e-9, "t={t} n={n}");
            }
            assert_eq!(f.get(&[-1]), 0.0);
        }
        let r = ode_moment(&m, &[0], 1.0, &OdeOptions::default()).unwrap();
        assert!((r.value() - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn mass_is_conserved() {
        for (p, q) in [(1.0, 1.0), (0.3, 1.7), (2.0, 0.0)] {
            let m = ModelParams::new(p, q, 2.0).unwrap();
            let f = solve_field(&m, 1, 2.0, 0, &OdeOptions::default()).unwrap();
            let mass: f64 = f.values.iter().sum();
            assert!((mass - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn first_moment_ignores_beta() {
        let opts = OdeOptions::default();
        let a = ode_moment(&ModelParams::new(0.5, 1.5, 0.0).unwrap(), &[1], 1.3, &opts).unwrap();
        let b = ode_moment(&ModelParams::new(0.5, 1.5, 3.0).unwrap(), &[1], 1.3, &opts).unwrap();
        assert!(a.rel_diff(&b) < 1e-12);
    }

    #[test]
    fn zero_noise_factorises() {
        let m = ModelParams::new(0.6, 1.4, 0.0).unwrap();
        let opts = OdeOptions::default();
        let one = solve_field(&m, 1, 1.0, 3, &opts).unwrap();
        let two = solve_field(&m, 2, 1.0, 3, &opts).unwrap();
        for (a, b) in [(0, 0), (1, 0), (3, -2), (-1, 2)] {
            let prod = one.get(&[a]) * one.get(&[b]);
            assert!((two.get(&[a, b]) - prod).abs() < 1e-11, "({a},{b})");
        }
    }

    #[test]
    fn fields_are_symmetric_and_nonnegative() {
        let m = ModelParams::symmetric(1.0).unwrap();
        let f = solve_field(&m, 2, 1.0, 0, &OdeOptions::default()).unwrap();
        assert!(f.symmetry_defect(100, 3) <= 1e-10);
        assert!(f.min_value() >= -1e-12);
        let m = ModelParams::one_sided(1.0).unwrap();
        let f = solve_field(&m, 3, 0.5, 2, &OdeOptions::default()).unwrap();
        assert!(f.symmetry_defect(100, 4) <= 1e-10);
        assert!(f.min_value() >= -1e-12);
    }

    #[test]
    fn integrators_agree() {
        let m = ModelParams::symmetric(1.0).unwrap();
        let dp = ode_moment(&m, &[0, 0], 1.0, &OdeOptions::default()).unwrap();
        let ck = ode_moment(
            &m,
            &[0, 0],
            1.0,
            &OdeOptions {
                integrator: Integrator::CashKarp,
                ..OdeOptions::default()
            },
        )
        .unwrap();
        assert!(dp.rel_diff(&ck) < 1e-8);
    }

    #[test]
    fn window_and_tolerance_refinement() {
        let m = ModelParams::symmetric(1.0).unwrap();
        let tol = 1e-10;
        let base = ode_moment(&m, &[1, 0], 1.0, &OdeOptions::with_tol(tol)).unwrap();
        let l = window_rule(&m, 1.0, &[1, 0]);
        let fine = ode_moment(
            &m,
            &[1, 0],
            1.0,
            &OdeOptions {
                tol: tol / 2.0,
                window: Some(2 * l),
                ..OdeOptions::default()
            },
        )
        .unwrap();
        assert!((base.value() - fine.value()).abs() <= 10.0 * tol);
    }

    #[test]
    fn small_window_is_reported() {
        let m = ModelParams::symmetric(1.0).unwrap();
        let opts = OdeOptions {
            window: Some(3),
            ..OdeOptions::default()
        };
        match ode_moment(&m, &[0, 0], 2.0, &opts) {
            Err(PamError::WindowTooSmall { suggested, .. }) => assert_eq!(suggested, 6),
            other => panic!("expected window failure, got {other:?}"),
        }
    }

    #[test]
    fn order_limits() {
        let sym = ModelParams::symmetric(1.0).unwrap();
        assert!(ode_moment(&sym, &[0, 0, 0], 0.1, &OdeOptions::default()).is_err());
        let one = ModelParams::one_sided(1.0).unwrap();
        assert!(ode_moment(&one, &[0; 5], 0.1, &OdeOptions::default()).is_err());
        assert!(ode_moment(&one, &[], 0.1, &OdeOptions::default()).is_err());
    }

    #[test]
    fn zero_noise_residual_telescopes() {
        let m = ModelParams::new(0.8, 1.2, 0.0).unwrap();
        let one = solve_field(&m, 1, 1.0, 4, &OdeOptions::default()).unwrap();
        let u = |a: i64, b: i64| one.get(&[a]) * one.get(&[b]);
        let r = boundary_residual_two_sided(&m, u, -4..=4, one.max_value().powi(2));
        assert!(r <= 1e-10);
    }

    #[test]
    fn delta_data_at_time_zero() {
        let m = ModelParams::symmetric(0.5).unwrap();
        assert_eq!(ode_moment(&m, &[0, 0], 0.0, &OdeOptions::default()).unwrap().value(), 1.0);
        assert_eq!(ode_moment(&m, &[1, 0], 0.0, &OdeOptions::default()).unwrap().value(), 0.0);
    }
}
