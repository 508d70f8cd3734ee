use crate::error::{PamError, Result};

/// Embedded explicit Runge–Kutta pair, propagating the higher-order solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Dormand–Prince 5(4).
    DormandPrince,
    /// Cash–Karp 5(4).
    CashKarp,
}

struct Tableau {
    c: &'static [f64],
    a: &'static [&'static [f64]],
    b: &'static [f64],
    /// Difference between the propagated and embedded weights.
    e: &'static [f64],
}

const DP: Tableau = Tableau {
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
        &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
        &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
        &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ],
    b: &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0],
    e: &[
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ],
};

const CK: Tableau = Tableau {
    c: &[0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0],
    a: &[
        &[],
        &[1.0 / 5.0],
        &[3.0 / 40.0, 9.0 / 40.0],
        &[3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0],
        &[-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0],
        &[
            1631.0 / 55296.0,
            175.0 / 512.0,
            575.0 / 13824.0,
            44275.0 / 110592.0,
            253.0 / 4096.0,
        ],
    ],
    b: &[37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0],
    e: &[
        37.0 / 378.0 - 2825.0 / 27648.0,
        0.0,
        250.0 / 621.0 - 18575.0 / 48384.0,
        125.0 / 594.0 - 13525.0 / 55296.0,
        -277.0 / 14336.0,
        512.0 / 1771.0 - 0.25,
    ],
};

impl Integrator {
    fn tableau(&self) -> &'static Tableau {
        match self {
            Integrator::DormandPrince => &DP,
            Integrator::CashKarp => &CK,
        }
    }
}

const MAX_STEPS: usize = 200_000;

/// Integrates the autonomous linear system `y' = rhs(y)` from 0 to `t_end`
/// in place. Returns the number of accepted steps.
///
/// The local error of each component is measured against
/// `tol · (|y| + floor · ‖y‖∞)`, so negligible far-field entries do not force
/// tiny steps.
pub fn integrate<F>(
    method: Integrator,
    y: &mut Vec<f64>,
    t_end: f64,
    tol: f64,
    rate_bound: f64,
    mut rhs: F,
) -> Result<usize>
where
    F: FnMut(&[f64], &mut [f64]),
{
    const FLOOR: f64 = 1e-4;
    if t_end <= 0.0 {
        return Ok(0);
    }
    let tab = method.tableau();
    let stages = tab.c.len();
    let n = y.len();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; stages];
    let mut stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    let mut t = 0.0;
    let mut h = (0.1 / rate_bound.max(1e-3)).min(t_end);
    let mut accepted = 0;
    let mut attempts = 0;
    while t < t_end {
        attempts += 1;
        if attempts > MAX_STEPS {
            return Err(PamError::Integrator(format!(
                "step limit {MAX_STEPS} reached at t = {t:e} of {t_end:e}"
            )));
        }
        let last = t + h >= t_end * (1.0 - 1e-14);
        if last {
            h = t_end - t;
        }
        for s in 0..stages {
            stage.copy_from_slice(y);
            for (j, &a) in tab.a[s].iter().enumerate() {
                if a != 0.0 {
                    let ha = h * a;
                    for (st, kj) in stage.iter_mut().zip(&k[j]) {
                        *st += ha * kj;
                    }
                }
            }
            let (_, rest) = k.split_at_mut(s);
            rhs(&stage, &mut rest[0]);
        }
        let y_max = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut err = 0.0f64;
        for i in 0..n {
            let mut inc = 0.0;
            let mut e = 0.0;
            for s in 0..stages {
                inc += tab.b[s] * k[s][i];
                e += tab.e[s] * k[s][i];
            }
            y_new[i] = y[i] + h * inc;
            let sc = tol * (y[i].abs().max(y_new[i].abs()) + FLOOR * y_max);
            if sc > 0.0 {
                err = err.max((h * e).abs() / sc);
            }
        }
        if !err.is_finite() {
            return Err(PamError::Integrator(format!("non-finite error estimate at t = {t:e}")));
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            std::mem::swap(y, &mut y_new);
            accepted += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t_end {
            return Err(PamError::Integrator(format!("step size underflow at t = {t:e}")));
        }
    }
    Ok(accepted)
}
