use crate::error::{PamError, Result};

const LO: f64 = 1e-8;
const HI: f64 = 1e8;

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
}

/// Root on `(1e−8, 1e8)` of an increasing function given with its
/// derivative. The bracket grows geometrically from 1; Newton steps that
/// leave it or stall are replaced by bisection.
pub fn bracketed_newton<G: Fn(f64) -> (f64, f64)>(g: G) -> Result<Root> {
    let (mut a, mut b) = (1.0, 1.0);
    while g(a).0 > 0.0 {
        a *= 0.5;
        if a < LO {
            return Err(PamError::Bracket(format!("no sign change above {LO}")));
        }
    }
    while g(b).0 < 0.0 {
        b *= 2.0;
        if b > HI {
            return Err(PamError::Bracket(format!("no sign change below {HI}")));
        }
    }
    let bracket = (a, b);
    let mut x = 0.5 * (a + b);
    let mut width = b - a;
    for _ in 0..200 {
        let (v, d) = g(x);
        if v == 0.0 {
            break;
        }
        if v < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - v / d;
        let next = if d > 0.0 && newton > a && newton < b && (b - a) < 0.75 * width {
            newton
        } else {
            0.5 * (a + b)
        };
        width = b - a;
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            x = next;
            break;
        }
        x = next;
    }
    Ok(Root {
        x,
        bracket,
        residual: g(x).0.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_roots_across_scales() {
        for r in [1e-6, 0.3, 1.0, 17.0, 4e6] {
            let root = bracketed_newton(|x| (x.ln() - f64::ln(r), 1.0 / x)).unwrap();
            assert!((root.x / r - 1.0).abs() < 1e-13, "{r}");
        }
    }

    #[test]
    fn reports_missing_bracket() {
        assert!(bracketed_newton(|x| (x + 1.0, 1.0)).is_err());
        assert!(bracketed_newton(|x| (-1.0 - x, -1.0)).is_err());
    }
}
