//! Monte Carlo estimators: Itô Euler–Maruyama simulation of the lattice SDE
//! and exact event-driven simulation of the pinned two-walker
//! representation of the second moment.
//!
//! Every replica draws from its own ChaCha8 stream (the seed selects the
//! key, the replica index the stream), so results are bit-identical
//! whatever the thread count and replicas can be regenerated one at a time.

use crate::error::{PamError, Result};
use crate::mathcore::{ModelParams, MomentResult, Route, Window};
use crate::oracle::window_rule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

pub const MAX_MC_K: usize = 3;
pub const MIN_REPLICAS: usize = 100;
pub const MAX_CLIP_FRACTION: f64 = 1e-4;
const JACKKNIFE_BLOCKS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `Z ← Z + dt·½ΔZ + βZ√dt ξ`, then clipped at 0.
    EulerMaruyama,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Sites `−L..=L` (two-sided) or `0..=L` (one-sided).
    pub window: usize,
    pub replicas: usize,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimConfig {
    /// `dt = 0.0025/max(1, β²)` and the oracle's window for reach `reach`.
    pub fn new(params: &ModelParams, t: f64, reach: &[i64], replicas: usize, seed: u64) -> Self {
        Self {
            dt: 0.0025 / params.beta_sq().max(1.0),
            window: window_rule(params, t, reach),
            replicas,
            seed,
            scheme: Scheme::EulerMaruyama,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let limit = 0.01 / params.beta_sq().max(1.0);
        if !(self.dt > 0.0) || self.dt > limit {
            return Err(PamError::InvalidParameter(format!("dt must be in (0, {limit}], got {}", self.dt)));
        }
        if self.replicas < MIN_REPLICAS {
            return Err(PamError::InvalidParameter(format!(
                "at least {MIN_REPLICAS} replicas are required, got {}",
                self.replicas
            )));
        }
        if self.window == 0 {
            return Err(PamError::InvalidParameter("window must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// One replica's field at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub field: Window<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub snapshots: Vec<FieldSnapshot>,
    pub clips: u64,
    pub site_steps: u64,
}

/// Estimate with its standard error, plus clip accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: usize,
    pub clips: u64,
}

impl McEstimate {
    /// `|mean − x| / std_error`.
    pub fn z_score(&self, x: f64) -> f64 {
        (self.mean - x).abs() / self.std_error
    }

    pub fn to_moment(&self) -> MomentResult {
        MomentResult::from_real(self.mean, Route::MonteCarlo, self.std_error / self.mean.abs(), self.replicas)
    }
}

fn rng_for(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

fn steps(t: f64, dt: f64) -> (usize, f64) {
    let n = (t / dt).ceil().max(1.0) as usize;
    (n, t / n as f64)
}

struct Stepper {
    lo: i64,
    cur: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    fn new(params: &ModelParams, window: usize) -> Self {
        let lo = if params.is_one_sided() { 0 } else { -(window as i64) };
        let size = if params.is_one_sided() { window + 1 } else { 2 * window + 1 };
        let mut cur = vec![0.0; size];
        cur[(-lo) as usize] = 1.0;
        Self {
            lo,
            cur,
            next: vec![0.0; size],
        }
    }

    fn run(&mut self, params: &ModelParams, nsteps: usize, h: f64, rng: &mut ChaCha8Rng) -> u64 {
        let (beta, p, q) = (params.beta(), params.p(), params.q());
        let sq = h.sqrt();
        let mut clips = 0;
        for _ in 0..nsteps {
            let cur = &self.cur;
            let n = cur.len();
            for i in 0..n {
                let z = cur[i];
                let left = if i > 0 { cur[i - 1] } else { 0.0 };
                let right = if i + 1 < n { cur[i + 1] } else { 0.0 };
                let lap = p * left + q * right - 2.0 * z;
                let xi: f64 = rng.sample(StandardNormal);
                let v = z + 0.5 * h * lap + beta * z * sq * xi;
                self.next[i] = if v < 0.0 {
                    clips += 1;
                    0.0
                } else {
                    v
                };
            }
            std::mem::swap(&mut self.cur, &mut self.next);
        }
        clips
    }

    fn value(&self, n: i64) -> f64 {
        let i = n - self.lo;
        if i < 0 || i >= self.cur.len() as i64 {
            0.0
        } else {
            self.cur[i as usize]
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(PamError::InvalidParameter(format!("time must be finite and > 0, got {t}")))
    }
}

fn map_replicas<T: Send, F: Fn(usize) -> T + Sync + Send>(r: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..r).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..r).map(f).collect()
    }
}

fn check_clips(clips: u64, site_steps: u64, dt: f64) -> Result<()> {
    let fraction = clips as f64 / site_steps as f64;
    if fraction > MAX_CLIP_FRACTION {
        return Err(PamError::TimeStepTooLarge {
            fraction,
            suggested_dt: dt / 4.0,
        });
    }
    Ok(())
}

/// Simulates every replica and keeps its final field.
pub fn simulate_pam(params: &ModelParams, t: f64, cfg: &SimConfig) -> Result<Simulation> {
    check_time(t)?;
    cfg.validate(params)?;
    let (nsteps, h) = steps(t, cfg.dt);
    let runs = map_replicas(cfg.replicas, |r| {
        let mut rng = rng_for(cfg.seed, r);
        let mut st = Stepper::new(params, cfg.window);
        let clips = st.run(params, nsteps, h, &mut rng);
        let start = st.lo;
        (
            FieldSnapshot {
                t,
                field: Window::new(start, st.cur),
            },
            clips,
        )
    });
    let size = runs.first().map(|r| r.0.field.values.len()).unwrap_or(0);
    let clips: u64 = runs.iter().map(|r| r.1).sum();
    let site_steps = (size * nsteps * cfg.replicas) as u64;
    check_clips(clips, site_steps, cfg.dt)?;
    Ok(Simulation {
        snapshots: runs.into_iter().map(|r| r.0).collect(),
        clips,
        site_steps,
    })
}

/// Grouped jackknife standard error of a sample mean.
pub fn jackknife(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(PamError::Degenerate("need at least two samples".into()));
    }
    let g = JACKKNIFE_BLOCKS.min(n);
    let total: f64 = samples.iter().sum();
    let mean = total / n as f64;
    let mut pseudo = Vec::with_capacity(g);
    for b in 0..g {
        let (lo, hi) = (b * n / g, (b + 1) * n / g);
        let block: f64 = samples[lo..hi].iter().sum();
        pseudo.push((total - block) / (n - (hi - lo)) as f64);
    }
    let pm = pseudo.iter().sum::<f64>() / g as f64;
    let var = pseudo.iter().map(|x| (x - pm) * (x - pm)).sum::<f64>() * (g - 1) as f64 / g as f64;
    let se = var.sqrt();
    if se == 0.0 {
        return Err(PamError::Degenerate("all samples are identical".into()));
    }
    Ok((mean, se))
}

/// Replica mean of `∏ᵢ Z(t,nᵢ)` (products within one replica) with its
/// jackknife standard error.
pub fn mc_moment(params: &ModelParams, t: f64, n: &[i64], cfg: &SimConfig) -> Result<McEstimate> {
    if n.is_empty() || n.len() > MAX_MC_K {
        return Err(PamError::Precondition(format!(
            "Monte Carlo moments are limited to 1 ≤ k ≤ {MAX_MC_K}: the estimator variance of higher moments is dominated by rare peaks"
        )));
    }
    check_time(t)?;
    cfg.validate(params)?;
    let (nsteps, h) = steps(t, cfg.dt);
    let runs = map_replicas(cfg.replicas, |r| {
        let mut rng = rng_for(cfg.seed, r);
        let mut st = Stepper::new(params, cfg.window);
        let clips = st.run(params, nsteps, h, &mut rng);
        (n.iter().map(|&x| st.value(x)).product::<f64>(), clips, st.cur.len())
    });
    let clips: u64 = runs.iter().map(|r| r.1).sum();
    let site_steps = (runs[0].2 * nsteps * cfg.replicas) as u64;
    check_clips(clips, site_steps, cfg.dt)?;
    let samples: Vec<f64> = runs.iter().map(|r| r.0).collect();
    if samples.iter().all(|&x| x == 0.0) {
        return Err(PamError::Degenerate("every replica returned zero".into()));
    }
    let (mean, std_error) = jackknife(&samples)?;
    Ok(McEstimate {
        mean,
        std_error,
        replicas: cfg.replicas,
        clips,
    })
}

/// One sample of `1{π₁(t)=n₁, π₂(t)=n₂} exp(β² ∫₀ᵗ 1{π₁=π₂} ds)` for two
/// independent walks from 0, each stepping `+1` at rate `p/2` and `−1` at
/// rate `q/2`.
fn pinned_sample(params: &ModelParams, t: f64, n: (i64, i64), rng: &mut ChaCha8Rng) -> f64 {
    let up = params.p() / 2.0;
    let (mut x, mut y) = (0i64, 0i64);
    let (mut s, mut local) = (0.0, 0.0);
    loop {
        // each walker jumps at total rate (p+q)/2 = 1
        let tau: f64 = rng.sample::<f64, _>(Exp1) / 2.0;
        let end = (s + tau).min(t);
        if x == y {
            local += end - s;
        }
        if s + tau >= t {
            break;
        }
        s += tau;
        let u: f64 = rng.random();
        let step = if u * 2.0 % 1.0 < up { 1 } else { -1 };
        if u < 0.5 {
            x += step;
        } else {
            y += step;
        }
    }
    if (x, y) == n {
        (params.beta_sq() * local).exp()
    } else {
        0.0
    }
}

/// `E[Z(t,n₁)Z(t,n₂)]` through the pinned two-walker representation.
pub fn pinned_walk_second_moment(params: &ModelParams, t: f64, n: (i64, i64), cfg: &SimConfig) -> Result<McEstimate> {
    check_time(t)?;
    if cfg.replicas < MIN_REPLICAS {
        return Err(PamError::InvalidParameter(format!("at least {MIN_REPLICAS} replicas are required")));
    }
    let samples = map_replicas(cfg.replicas, |r| pinned_sample(params, t, n, &mut rng_for(cfg.seed, r)));
    if samples.iter().all(|&x| x == 0.0) {
        return Err(PamError::Degenerate("no walk pair ended at the requested sites".into()));
    }
    let (mean, std_error) = jackknife(&samples)?;
    Ok(McEstimate {
        mean,
        std_error,
        replicas: cfg.replicas,
        clips: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let p = ModelParams::symmetric(1.0).unwrap();
        let cfg = SimConfig::new(&p, 1.0, &[0], 1000, 1);
        assert!(cfg.validate(&p).is_ok());
        assert!(cfg.clone().with_dt(0.02).validate(&p).is_err());
        let few = SimConfig { replicas: 10, ..cfg.clone() };
        assert!(few.validate(&p).is_err());
        let p2 = ModelParams::symmetric(2.0).unwrap();
        assert!(cfg.with_dt(0.004).validate(&p2).is_err());
    }

    #[test]
    fn jackknife_matches_plain_standard_error_for_iid_blocks() {
        let mut rng = rng_for(5, 0);
        let xs: Vec<f64> = (0..10000).map(|_| rng.random::<f64>()).collect();
        let (m, se) = jackknife(&xs).unwrap();
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / 9999.0;
        assert!((m - xs.iter().sum::<f64>() / 1e4).abs() < 1e-14);
        assert!((se / (var / 1e4).sqrt() - 1.0).abs() < 0.3);
        assert!(jackknife(&[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn noise_free_simulation_is_heat_flow() {
        let p = ModelParams::new(1.5, 0.5, 0.0).unwrap();
        let cfg = SimConfig::new(&p, 0.5, &[0], 100, 3);
        let sim = simulate_pam(&p, 0.5, &cfg).unwrap();
        let f = &sim.snapshots[0].field;
        assert_eq!(sim.snapshots[0], sim.snapshots[99]);
        // walk moving +1 at rate 3/4 and −1 at rate 1/4
        let (a, b): (f64, f64) = (0.75 * 0.5, 0.25 * 0.5);
        let exact = |n: i64| -> f64 {
            (0..60)
                .filter_map(|j: i64| {
                    let i = j - n;
                    if i < 0 {
                        return None;
                    }
                    let lf = |m: i64| (1..=m).map(|x| (x as f64).ln()).sum::<f64>();
                    Some((-(a + b) + j as f64 * a.ln() + i as f64 * b.ln() - lf(j) - lf(i)).exp())
                })
                .sum()
        };
        for n in -2..=3 {
            assert!((f.get(n) - exact(n)).abs() < 2e-3, "n={n}");
        }
        assert_eq!(sim.clips, 0);
    }

    #[test]
    fn seeds_are_deterministic() {
        let p = ModelParams::symmetric(1.0).unwrap();
        let cfg = SimConfig::new(&p, 0.2, &[0], 200, 42);
        let a = mc_moment(&p, 0.2, &[0, 1], &cfg).unwrap();
        let b = mc_moment(&p, 0.2, &[0, 1], &cfg).unwrap();
        assert_eq!(a, b);
        let c = pinned_walk_second_moment(&p, 0.5, (0, 0), &cfg).unwrap();
        assert_eq!(c, pinned_walk_second_moment(&p, 0.5, (0, 0), &cfg).unwrap());
    }

    #[test]
    fn refuses_high_orders_and_large_steps() {
        let p = ModelParams::symmetric(1.0).unwrap();
        let cfg = SimConfig::new(&p, 0.2, &[0], 200, 1);
        assert!(matches!(mc_moment(&p, 0.2, &[0; 4], &cfg), Err(PamError::Precondition(_))));
        assert!(mc_moment(&p, -1.0, &[0], &cfg).is_err());
    }
}
