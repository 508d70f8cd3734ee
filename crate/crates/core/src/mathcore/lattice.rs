use super::{LogComplex, ModelParams};
use crate::error::{PamError, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// An integer-indexed sequence known on `start, start+1, …`; values outside
/// the window read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Window<T> {
    pub start: i64,
    pub values: Vec<T>,
}

impl<T: Copy + Default> Window<T> {
    pub fn new(start: i64, values: Vec<T>) -> Self {
        Self { start, values }
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> T {
        let i = n - self.start;
        if i < 0 || i >= self.values.len() as i64 {
            T::default()
        } else {
            self.values[i as usize]
        }
    }
}

/// `Δ^{p,q} f(n) = p f(n−1) + q f(n+1) − 2 f(n)`.
pub fn apply_delta<T>(f: &Window<T>, n: i64, params: &ModelParams) -> T
where
    T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    f.get(n - 1) * params.p() + f.get(n + 1) * params.q() - f.get(n) * 2.0
}

/// `F_{t,n}(z) = z^{−n} exp((t/2)(pz + q/z − 2))`.
pub fn eval_f(z: Complex64, t: f64, n: i64, params: &ModelParams) -> Result<Complex64> {
    check_nonzero(z)?;
    let e = exponent(z, t, params);
    Ok(e.exp() * z.powi(-(n as i32)))
}

/// Log-domain form of [`eval_f`].
pub fn eval_f_log(z: Complex64, t: f64, n: i64, params: &ModelParams) -> Result<LogComplex> {
    check_nonzero(z)?;
    let w = exponent(z, t, params) - z.ln() * n as f64;
    Ok(LogComplex::exp_of(w))
}

fn exponent(z: Complex64, t: f64, params: &ModelParams) -> Complex64 {
    (z * params.p() + z.inv() * params.q() - 2.0) * (0.5 * t)
}

fn check_nonzero(z: Complex64) -> Result<()> {
    if z.re == 0.0 && z.im == 0.0 {
        Err(PamError::InvalidParameter("F is undefined at z = 0".into()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_is_harmonic() {
        for (p, q) in [(1.0, 1.0), (2.0, 0.0), (0.5, 1.5)] {
            let m = ModelParams::new(p, q, 0.3).unwrap();
            let f = Window::new(-3, vec![1.0; 7]);
            for n in -2..=2 {
                assert_eq!(apply_delta(&f, n, &m), 0.0);
            }
        }
    }

    #[test]
    fn unit_bump() {
        let m = ModelParams::symmetric(1.0).unwrap();
        let f = Window::new(-1, vec![0.0, 1.0, 0.0]);
        assert_eq!(apply_delta(&f, 0, &m), -2.0);
        assert_eq!(apply_delta(&f, 1, &m), 1.0);
        assert_eq!(apply_delta(&f, 2, &m), 0.0);
    }

    #[test]
    fn basis_coefficients() {
        let m = ModelParams::new(0.7, 1.3, 0.0).unwrap();
        for width in 1..=7usize {
            for hot in 0..width {
                let mut v = vec![0.0; width];
                v[hot] = 1.0;
                let f = Window::new(-2, v);
                let at = -2 + hot as i64;
                for n in -4..=6 {
                    let expect = if n == at + 1 {
                        m.p()
                    } else if n == at - 1 {
                        m.q()
                    } else if n == at {
                        -2.0
                    } else {
                        0.0
                    };
                    assert_eq!(apply_delta(&f, n, &m), expect);
                }
            }
        }
    }

    #[test]
    fn one_sided_exponential() {
        let m = ModelParams::one_sided(0.0).unwrap();
        let z = c(0.8, 0.3);
        let f = Window::new(-2, (-2..=2).map(|n| z.powi(-n)).collect());
        let d = apply_delta(&f, 0, &m) * 0.5;
        assert!((d - (z - 1.0)).norm() < 1e-14);
    }

    #[test]
    fn f_special_values() {
        let m = ModelParams::new(0.4, 1.6, 1.0).unwrap();
        assert!((eval_f(c(1.0, 0.0), 3.0, 5, &m).unwrap() - 1.0).norm() < 1e-14);
        assert!((eval_f(c(2.0, 0.0), 0.0, 1, &m).unwrap() - 0.5).norm() < 1e-15);
        let one = ModelParams::one_sided(0.0).unwrap();
        let z = c(0.3, -1.1);
        let direct = eval_f(z, 2.0, 3, &one).unwrap();
        let expect = (2.0 * (z - 1.0)).exp() / z.powi(3);
        assert!((direct - expect).norm() < 1e-13 * expect.norm());
        assert!(eval_f(c(0.0, 0.0), 1.0, 0, &m).is_err());
    }

    #[test]
    fn f_solves_one_site_ode() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for _ in 0..20 {
            let p = rng.random_range(0.0..2.0);
            let m = ModelParams::new(p, 2.0 - p, 0.5).unwrap();
            let z = Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(-3.0..3.0));
            let t = rng.random_range(0.1..3.0);
            let n = rng.random_range(-5i64..=5);
            let fd = (eval_f(z, t + h, n, &m).unwrap() - eval_f(z, t - h, n, &m).unwrap()) / (2.0 * h);
            let f = Window::new(
                n - 1,
                (n - 1..=n + 1).map(|j| eval_f(z, t, j, &m).unwrap()).collect(),
            );
            let rhs = apply_delta(&f, n, &m) * 0.5;
            assert!((fd - rhs).norm() <= 1e-6 * rhs.norm().max(1e-300), "{fd} vs {rhs}");
        }
    }

    #[test]
    fn log_form_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = rng.random_range(0.0..2.0);
            let m = ModelParams::new(p, 2.0 - p, 0.5).unwrap();
            let z = Complex64::from_polar(rng.random_range(0.2..3.0), rng.random_range(-3.0..3.0));
            let t = rng.random_range(0.0..20.0);
            let n = rng.random_range(-10i64..=10);
            let direct = eval_f(z, t, n, &m).unwrap();
            let via_log = eval_f_log(z, t, n, &m).unwrap().to_complex();
            assert!((direct - via_log).norm() <= 1e-12 * direct.norm());
        }
        // large t stays finite in the log domain
        let m = ModelParams::symmetric(1.0).unwrap();
        let v = eval_f_log(c(3.0, 0.0), 2000.0, 0, &m).unwrap();
        assert!(v.log_abs.is_finite() && v.log_abs > 709.0);
    }
}
