//! Signed log-magnitude representation.
//!
//! The potentials handled here reach values far beyond `f64::MAX` (the log of
//! the potential at the inner edge of a profile is routinely several hundred),
//! so every quantity that can blow up is carried as a sign together with the
//! natural log of its absolute value.  A plain `f64` view is offered whenever
//! the value happens to be representable.

/// A real number stored as `sign * exp(log_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogVal {
    /// -1, 0 or +1.
    pub sign: f64,
    /// ln |value|; `f64::NEG_INFINITY` when the value is exactly zero.
    pub log_abs: f64,
}

/// Threshold beyond which `exp` overflows an `f64`.
pub const LN_F64_MAX: f64 = 709.78;

impl LogVal {
    pub fn zero() -> Self {
        LogVal {
            sign: 0.0,
            log_abs: f64::NEG_INFINITY,
        }
    }

    /// Build from a finite `f64`.
    pub fn from_linear(x: f64) -> Self {
        if x == 0.0 {
            Self::zero()
        } else {
            LogVal {
                sign: x.signum(),
                log_abs: x.abs().ln(),
            }
        }
    }

    /// Build from a sign and a log-magnitude.
    pub fn new(sign: f64, log_abs: f64) -> Self {
        if sign == 0.0 {
            Self::zero()
        } else {
            LogVal {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    /// The value as an ordinary float, if representable without overflow.
    /// Underflow rounds to signed zero.
    pub fn linear(&self) -> Option<f64> {
        if self.sign == 0.0 {
            return Some(0.0);
        }
        if self.log_abs > LN_F64_MAX {
            None
        } else {
            Some(self.sign * self.log_abs.exp())
        }
    }

    /// Best-effort float: saturates to +-inf instead of returning `None`.
    pub fn linear_lossy(&self) -> f64 {
        self.linear().unwrap_or(self.sign * f64::INFINITY)
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_linear() {
        let v = LogVal::from_linear(-3.5);
        assert_eq!(v.sign, -1.0);
        assert!((v.linear().unwrap() + 3.5).abs() < 1e-15);
    }

    #[test]
    fn overflow_is_reported() {
        let v = LogVal::new(1.0, 800.0);
        assert!(v.linear().is_none());
        assert!(v.linear_lossy().is_infinite());
    }
}
