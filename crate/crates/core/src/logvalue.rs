//! Values stored as `(ln|w|, arg w)`.
//!
//! Sigma grows like `exp(c·|z|²)`, so products of sigma values overflow long
//! before anything interesting happens. Everything user-facing is carried in
//! this form and only converted back to a raw complex number on request.

use std::f64::consts::{PI, TAU};
use std::ops::{Div, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest log-magnitude accepted by [`LogValue::to_complex`].
pub const MAX_LOG_MAG: f64 = 700.0;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x - TAU * (x / TAU).round();
    if r <= -PI {
        r + TAU
    } else if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A complex number as natural log of its magnitude and its phase.
///
/// `log_mag = -inf` encodes zero (with phase `0`); `+inf` is used by
/// division by zero and means "pole".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    log_mag: f64,
    phase: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { log_mag: f64::NEG_INFINITY, phase: 0.0 };
    pub const ONE: LogValue = LogValue { log_mag: 0.0, phase: 0.0 };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag.is_infinite() {
            LogValue { log_mag, phase: 0.0 }
        } else {
            LogValue { log_mag, phase: wrap_phase(phase) }
        }
    }

    /// From a complex logarithm `ln|w| + i·arg w` (any branch).
    pub fn from_log(w: Complex64) -> Self {
        Self::new(w.re, w.im)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            Self::ZERO
        } else {
            Self::new(z.norm().ln(), z.arg())
        }
    }

    pub fn log_mag(&self) -> f64 {
        self.log_mag
    }

    /// Phase in `(-π, π]`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn is_pole(&self) -> bool {
        self.log_mag == f64::INFINITY
    }

    /// Principal complex logarithm.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.log_mag, self.phase)
    }

    pub fn to_complex(&self) -> Result<Complex64> {
        if self.log_mag > MAX_LOG_MAG {
            return Err(Error::Overflow(self.log_mag));
        }
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(Complex64::from_polar(self.log_mag.exp(), self.phase))
    }

    pub fn negated(self) -> Self {
        Self::new(self.log_mag, self.phase + PI)
    }

    pub fn recip(self) -> Self {
        Self::new(-self.log_mag, -self.phase)
    }

    /// `ln(self / other)` with the phase difference wrapped into `(-π, π]`.
    pub fn log_ratio(&self, other: &LogValue) -> Complex64 {
        Complex64::new(self.log_mag - other.log_mag, wrap_phase(self.phase - other.phase))
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        LogValue::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl Div for LogValue {
    type Output = LogValue;

    fn div(self, rhs: LogValue) -> LogValue {
        LogValue::new(self.log_mag - rhs.log_mag, self.phase - rhs.phase)
    }
}

/// Value of a meromorphic function at a point: finite, or a zero/pole of
/// the given order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointValue {
    Finite(LogValue),
    Zero(u32),
    Pole(u32),
}

impl PointValue {
    pub fn finite(&self) -> Option<LogValue> {
        match self {
            PointValue::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_edges() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert_eq!(wrap_phase(0.0), 0.0);
    }

    #[test]
    fn zero_and_pole() {
        let z = LogValue::from_complex(Complex64::new(0.0, 0.0));
        assert!(z.is_zero());
        assert_eq!(z.phase(), 0.0);
        let p = LogValue::ONE / z;
        assert!(p.is_pole());
        assert!(p.to_complex().is_err());
        assert_eq!(z.to_complex().unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn overflow_guard() {
        assert!(LogValue::new(700.5, 0.0).to_complex().is_err());
        assert!(LogValue::new(699.0, 0.0).to_complex().is_ok());
    }

    proptest! {
        #[test]
        fn phase_always_wrapped(m in -1e3f64..1e3, ph in -1e4f64..1e4) {
            let v = LogValue::new(m, ph);
            prop_assert!(v.phase() > -PI && v.phase() <= PI);
        }

        #[test]
        fn multiplication_matches_complex(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
            let x = Complex64::new(a, b);
            let y = Complex64::new(c, d);
            prop_assume!(x.norm() > 1e-3 && y.norm() > 1e-3);
            let p = (LogValue::from_complex(x) * LogValue::from_complex(y)).to_complex().unwrap();
            prop_assert!((p - x * y).norm() <= 1e-12 * (1.0 + (x * y).norm()));
            let q = (LogValue::from_complex(x) / LogValue::from_complex(y)).to_complex().unwrap();
            prop_assert!((q - x / y).norm() <= 1e-12 * (1.0 + (x / y).norm()));
        }
    }
}
