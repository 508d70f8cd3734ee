use crate::error::{PamError, Result};

/// Jump rates `p` (towards `n-1` in the generator) and `q`, with `p + q = 2`,
/// and noise strength `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    p: f64,
    q: f64,
    beta: f64,
}

const RATE_SUM_TOL: f64 = 1e-12;

impl ModelParams {
    pub fn new(p: f64, q: f64, beta: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && beta.is_finite()) {
            return Err(PamError::InvalidParameter(format!(
                "non-finite parameters p={p}, q={q}, beta={beta}"
            )));
        }
        if p < 0.0 || q < 0.0 {
            return Err(PamError::InvalidParameter(format!(
                "jump rates must be nonnegative (p={p}, q={q})"
            )));
        }
        if (p + q - 2.0).abs() > RATE_SUM_TOL {
            return Err(PamError::InvalidParameter(format!(
                "jump rates must satisfy p + q = 2 (p={p}, q={q})"
            )));
        }
        if beta < 0.0 {
            return Err(PamError::InvalidParameter(format!(
                "noise strength must be nonnegative (beta={beta})"
            )));
        }
        Ok(Self { p, q, beta })
    }

    /// Symmetric model `p = q = 1`.
    pub fn symmetric(beta: f64) -> Result<Self> {
        Self::new(1.0, 1.0, beta)
    }

    /// One-sided model `p = 2, q = 0`.
    pub fn one_sided(beta: f64) -> Result<Self> {
        Self::new(2.0, 0.0, beta)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_sq(&self) -> f64 {
        self.beta * self.beta
    }

    /// Characteristic velocity `p - q` of the mean.
    pub fn drift(&self) -> f64 {
        self.p - self.q
    }

    pub fn is_one_sided(&self) -> bool {
        self.q == 0.0
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.p, self.q, beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rates() {
        assert!(ModelParams::new(1.5, 1.0, 1.0).is_err());
        assert!(ModelParams::new(-0.5, 2.5, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn accepts_valid() {
        let m = ModelParams::new(1.5, 0.5, 0.3).unwrap();
        assert_eq!(m.drift(), 1.0);
        assert!(ModelParams::one_sided(1.0).unwrap().is_one_sided());
    }
}
