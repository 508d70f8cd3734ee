use crate::error::{PamError, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContourKind {
    /// Positively oriented circle.
    Circle { center: Complex64, radius: f64 },
    /// Upward vertical segment `abscissa + i[-half_height, half_height]`.
    VerticalLine { abscissa: f64, half_height: f64 },
}

/// A discretised contour for the trapezoid rule.
///
/// Weights include the `1/(2πi)` normalisation, so that
/// `(1/2πi) ∮ g(z) dz ≈ Σ wⱼ g(zⱼ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub kind: ContourKind,
    nodes: usize,
    /// Angular offset of the first node in units of the node spacing.
    offset: f64,
}

impl Contour {
    pub fn circle(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(PamError::Contour(format!("circle radius must be positive, got {radius}")));
        }
        Self::checked(ContourKind::Circle { center, radius }, nodes)
    }

    pub fn centered_circle(radius: f64, nodes: usize) -> Result<Self> {
        Self::circle(Complex64::new(0.0, 0.0), radius, nodes)
    }

    pub fn vertical_line(abscissa: f64, half_height: f64, nodes: usize) -> Result<Self> {
        if !(half_height > 0.0 && half_height.is_finite()) {
            return Err(PamError::Contour(format!(
                "vertical line half-height must be positive, got {half_height}"
            )));
        }
        Self::checked(ContourKind::VerticalLine { abscissa, half_height }, nodes)
    }

    fn checked(kind: ContourKind, nodes: usize) -> Result<Self> {
        if nodes < 8 || !nodes.is_multiple_of(2) {
            return Err(PamError::Contour(format!(
                "node count must be even and at least 8, got {nodes}"
            )));
        }
        Ok(Self { kind, nodes, offset: 0.0 })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Same geometry with a different node count.
    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        let mut c = Self::checked(self.kind, nodes)?;
        c.offset = self.offset;
        Ok(c)
    }

    /// Shift circle nodes by `fraction` of the node spacing.
    pub fn with_offset(mut self, fraction: f64) -> Self {
        self.offset = fraction;
        self
    }

    pub fn center(&self) -> Option<Complex64> {
        match self.kind {
            ContourKind::Circle { center, .. } => Some(center),
            ContourKind::VerticalLine { .. } => None,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            ContourKind::Circle { radius, .. } => Some(radius),
            ContourKind::VerticalLine { .. } => None,
        }
    }

    /// Whether `z` lies strictly inside a circle contour.
    pub fn encloses(&self, z: Complex64) -> bool {
        match self.kind {
            ContourKind::Circle { center, radius } => (z - center).norm() < radius,
            ContourKind::VerticalLine { .. } => false,
        }
    }

    /// Distance from `z` to the contour curve.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        match self.kind {
            ContourKind::Circle { center, radius } => ((z - center).norm() - radius).abs(),
            ContourKind::VerticalLine { abscissa, .. } => (z.re - abscissa).abs(),
        }
    }

    /// Nodes and weights `(zⱼ, wⱼ)`.
    pub fn nodes(&self) -> Vec<(Complex64, Complex64)> {
        let n = self.nodes;
        match self.kind {
            ContourKind::Circle { center, radius } => (0..n)
                .map(|j| {
                    let theta = TAU * (j as f64 + self.offset) / n as f64;
                    let d = Complex64::from_polar(radius, theta);
                    (center + d, d / n as f64)
                })
                .collect(),
            ContourKind::VerticalLine { abscissa, half_height } => {
                // n intervals, endpoints carry half weight; dz = i dy.
                let h = 2.0 * half_height / n as f64;
                (0..=n)
                    .map(|j| {
                        let y = -half_height + h * j as f64;
                        let end = if j == 0 || j == n { 0.5 } else { 1.0 };
                        (Complex64::new(abscissa, y), Complex64::new(end * h / (2.0 * PI), 0.0))
                    })
                    .collect()
            }
        }
    }
}

/// Square root with the argument tracked continuously along a path:
/// for `z = r e^{iθ}` with `θ ∈ ℝ` followed without jumps, `√z = √r e^{iθ/2}`.
#[derive(Debug, Clone, Copy)]
pub struct TrackedSqrt {
    theta: Option<f64>,
}

impl Default for TrackedSqrt {
    fn default() -> Self {
        Self::new()
    }
}

impl TrackedSqrt {
    pub fn new() -> Self {
        Self { theta: None }
    }

    /// Start the path at argument `theta` (the branch of the first point is
    /// then the one closest to it).
    pub fn starting_at(theta: f64) -> Self {
        Self { theta: Some(theta) }
    }

    pub fn argument(&self) -> Option<f64> {
        self.theta
    }

    /// Square root of the next point on the path.
    pub fn next(&mut self, z: Complex64) -> Complex64 {
        let principal = z.arg();
        let theta = match self.theta {
            None => principal,
            Some(prev) => {
                let turns = ((prev - principal) / TAU).round();
                principal + TAU * turns
            }
        };
        self.theta = Some(theta);
        Complex64::from_polar(z.norm().sqrt(), theta / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_rule_integrates_monomials() {
        let c = Contour::circle(Complex64::new(0.3, -0.1), 1.7, 16).unwrap();
        let center = c.center().unwrap();
        for m in -5i32..=5 {
            let s: Complex64 = c.nodes().iter().map(|(z, w)| w * (z - center).powi(m)).sum();
            let expected = if m == -1 { 1.0 } else { 0.0 };
            assert!((s - expected).norm() < 1e-14, "m={m} s={s}");
        }
    }

    #[test]
    fn vertical_line_gaussian() {
        // (1/2πi)∫ e^{z²/2} dz over Re z = 0.7 equals 1/√(2π).
        let c = Contour::vertical_line(0.7, 12.0, 256).unwrap();
        let s: Complex64 = c.nodes().iter().map(|(z, w)| w * (z * z / 2.0).exp()).sum();
        assert!((s.re - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-13);
        assert!(s.im.abs() < 1e-13);
    }

    #[test]
    fn node_count_validation() {
        assert!(Contour::centered_circle(1.0, 6).is_err());
        assert!(Contour::centered_circle(1.0, 9).is_err());
        assert!(Contour::centered_circle(-1.0, 8).is_err());
        assert!(Contour::centered_circle(1.0, 8).is_ok());
    }

    #[test]
    fn tracked_sqrt_follows_winding() {
        // Going once around the origin flips the sign of the root.
        let mut s = TrackedSqrt::new();
        let n = 64;
        let mut last = Complex64::new(0.0, 0.0);
        for j in 0..=n {
            let z = Complex64::from_polar(4.0, TAU * j as f64 / n as f64);
            last = s.next(z);
            assert!((last * last - z).norm() < 1e-12);
        }
        assert!((last + Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }
}
