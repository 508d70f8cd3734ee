use super::{almost_sure_replica, gamma1_onesided, gamma_k_onesided, ExponentMethod, ExponentResult};
use crate::error::{PamError, Result};

/// Largest time the log-domain quadrature routes are trusted at.
pub const MAX_FIT_TIME: f64 = 40.0;

/// Finite-time exponent estimate from log-moments on an increasing grid:
/// the slope over the last two points, with the change from the previous
/// slope as error bar.
pub fn growth_rate_fit<E>(mut log_moment: E, t_grid: &[f64]) -> Result<ExponentResult>
where
    E: FnMut(f64) -> Result<f64>,
{
    if t_grid.len() < 3 {
        return Err(PamError::Precondition("growth fit needs at least 3 times".into()));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid[0] <= 0.0 {
        return Err(PamError::Precondition("time grid must be positive and increasing".into()));
    }
    if t_grid[t_grid.len() - 1] > MAX_FIT_TIME {
        return Err(PamError::Precondition(format!("growth fit times must be ≤ {MAX_FIT_TIME}")));
    }
    let logs = t_grid.iter().map(|&t| log_moment(t)).collect::<Result<Vec<_>>>()?;
    let slope = |i: usize| (logs[i + 1] - logs[i]) / (t_grid[i + 1] - t_grid[i]);
    let n = t_grid.len();
    let top = slope(n - 2);
    let below = slope(n - 3);
    Ok(ExponentResult {
        value: top,
        critical_point: None,
        method: ExponentMethod::GrowthFit,
        bracket: None,
        residual: (top - below).abs(),
    })
}

/// One velocity of the normalised exponent figure: every value has
/// `γ₁(1;ν)` subtracted.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure2Row {
    pub nu: f64,
    pub tilde_gamma1: f64,
    /// `γ_k/k − γ₁` for `k = 1..=k_max`; the first entry is the zero column.
    pub scaled: Vec<f64>,
}

impl Figure2Row {
    /// `γ̃₁ < 0 = γ₁ < γ₂/2 < ⋯` after normalisation.
    pub fn ordered(&self) -> bool {
        self.tilde_gamma1 < self.scaled[0]
            && self.scaled[0] == 0.0
            && self.scaled.windows(2).all(|w| w[0] < w[1])
    }
}

pub fn figure2_table(nus: &[f64], k_max: usize) -> Result<Vec<Figure2Row>> {
    if k_max == 0 {
        return Err(PamError::InvalidParameter("k_max must be ≥ 1".into()));
    }
    nus.iter()
        .map(|&nu| {
            let g1 = gamma1_onesided(nu)?;
            let mut scaled = vec![0.0];
            for k in 2..=k_max {
                scaled.push(gamma_k_onesided(k, nu)?.value / k as f64 - g1);
            }
            Ok(Figure2Row {
                nu,
                tilde_gamma1: almost_sure_replica(nu)?.value - g1,
                scaled,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear_evaluators() {
        let r = growth_rate_fit(|_| Ok(3.5), &[10.0, 20.0, 40.0]).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.residual, 0.0);
        let r = growth_rate_fit(|t| Ok(0.7 * t - 2.0), &[1.0, 2.0, 5.0]).unwrap();
        assert!((r.value - 0.7).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(growth_rate_fit(|_| Ok(0.0), &[1.0, 2.0]).is_err());
        assert!(growth_rate_fit(|_| Ok(0.0), &[1.0, 3.0, 2.0]).is_err());
        assert!(growth_rate_fit(|_| Ok(0.0), &[10.0, 20.0, 80.0]).is_err());
        assert!(growth_rate_fit(|t| if t > 15.0 { Err(PamError::Degenerate("x".into())) } else { Ok(0.0) }, &[10.0, 20.0, 40.0]).is_err());
    }

    #[test]
    fn figure_rows_are_ordered() {
        let nus: Vec<f64> = (0..20).map(|i| 0.05 + i as f64 * 0.25).collect();
        for row in figure2_table(&nus, 5).unwrap() {
            assert!(row.ordered(), "ν={}", row.nu);
        }
    }
}
