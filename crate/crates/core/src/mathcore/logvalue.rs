use num_complex::Complex64;
use std::fmt;

/// A complex number stored as `exp(log_abs + i·arg)`; zero is `log_abs = -∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_abs: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: Self = Self {
        log_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub const ONE: Self = Self {
        log_abs: 0.0,
        arg: 0.0,
    };

    pub fn new(log_abs: f64, arg: f64) -> Self {
        Self { log_abs, arg }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self {
                log_abs: z.norm().ln(),
                arg: z.arg(),
            }
        }
    }

    /// `exp(w)` without ever forming it.
    pub fn exp_of(w: Complex64) -> Self {
        Self {
            log_abs: w.re,
            arg: w.im,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_abs == f64::NEG_INFINITY
    }

    /// Linear value; overflows to infinity when `log_abs > ~709`.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.log_abs.exp(), self.arg)
        }
    }

    /// The value divided by `e^{shift}`.
    pub fn scaled(&self, shift: f64) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar((self.log_abs - shift).exp(), self.arg)
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            log_abs: self.log_abs + other.log_abs,
            arg: self.arg + other.arg,
        }
    }

    /// `e^{shift} · z`.
    pub fn from_scaled(z: Complex64, shift: f64) -> Self {
        let mut v = Self::from_complex(z);
        if !v.is_zero() {
            v.log_abs += shift;
        }
        v
    }

    /// Sum of log-domain terms with the largest magnitude factored out.
    pub fn sum(terms: &[LogComplex]) -> Self {
        let shift = terms
            .iter()
            .map(|t| t.log_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if shift == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let s: Complex64 = terms.iter().map(|t| t.scaled(shift)).sum();
        Self::from_scaled(s, shift)
    }
}

impl fmt::Display for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({:.6e} + {:.6}i)", self.log_abs, self.arg)
    }
}

/// Which independent route produced a moment value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Quadrature,
    Ode,
    MonteCarlo,
    Partition,
    PinnedWalk,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Quadrature => "quadrature",
            Route::Ode => "ode",
            Route::MonteCarlo => "mc",
            Route::Partition => "partition",
            Route::PinnedWalk => "pinned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "quadrature" => Some(Route::Quadrature),
            "ode" => Some(Route::Ode),
            "mc" => Some(Route::MonteCarlo),
            "partition" => Some(Route::Partition),
            "pinned" => Some(Route::PinnedWalk),
            _ => None,
        }
    }
}

/// A real moment in log-magnitude + sign form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult {
    pub log_abs: f64,
    /// `+1`, `-1`, or `0` for an exactly vanishing value.
    pub sign: f64,
    pub route: Route,
    /// Relative error estimate (absolute standard error for Monte Carlo is
    /// converted to relative).
    pub rel_error: f64,
    /// Ratio `|Im| / |Re|` of the underlying complex integral, when relevant.
    pub imag_ratio: f64,
    /// Nodes per axis (quadrature), steps (ODE) or replicas (Monte Carlo).
    pub work: usize,
}

impl MomentResult {
    pub fn from_log(value: LogComplex, route: Route, rel_error: f64, work: usize) -> Self {
        let z = value.scaled(value.log_abs);
        let (sign, log_abs, imag_ratio) = if value.is_zero() || z.re == 0.0 {
            (0.0, f64::NEG_INFINITY, 0.0)
        } else {
            (
                z.re.signum(),
                value.log_abs + z.re.abs().ln(),
                z.im.abs() / z.re.abs(),
            )
        };
        Self {
            log_abs,
            sign,
            route,
            rel_error,
            imag_ratio,
            work,
        }
    }

    pub fn from_real(value: f64, route: Route, rel_error: f64, work: usize) -> Self {
        Self {
            log_abs: if value == 0.0 { f64::NEG_INFINITY } else { value.abs().ln() },
            sign: if value == 0.0 { 0.0 } else { value.signum() },
            route,
            rel_error,
            imag_ratio: 0.0,
            work,
        }
    }

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    /// Natural log of the (positive) value.
    pub fn ln(&self) -> f64 {
        self.log_abs
    }

    /// `|a - b| / max(|a|, |b|)` computed in the log domain.
    pub fn rel_diff(&self, other: &MomentResult) -> f64 {
        if self.sign == 0.0 && other.sign == 0.0 {
            return 0.0;
        }
        if self.sign != other.sign {
            return if self.sign == 0.0 || other.sign == 0.0 { 1.0 } else { 2.0 };
        }
        let (hi, lo) = if self.log_abs >= other.log_abs {
            (self.log_abs, other.log_abs)
        } else {
            (other.log_abs, self.log_abs)
        };
        -(lo - hi).exp_m1()
    }
}
