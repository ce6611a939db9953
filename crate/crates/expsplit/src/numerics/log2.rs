//! Logarithmic magnitudes.
//!
//! Norms, gains, and growth bounds are compared on a base-2 logarithmic
//! scale: quantities like ||A(m,n) P_n|| range over thousands of binades, so
//! tolerances are meaningful only in log space. A `LogMag` is log2 of a
//! nonnegative magnitude; -inf encodes an exactly zero magnitude, +inf is the
//! vacuous value of an infimum over an empty sample set.

use crate::numerics::scaled::ScaledF64;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

/// log2 of a nonnegative magnitude.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogMag(f64);

impl LogMag {
    /// Magnitude exactly zero.
    pub const ZERO_MAG: Self = Self(f64::NEG_INFINITY);
    /// Infimum over an empty set; no finite sample constrains it.
    pub const VACUOUS_INF: Self = Self(f64::INFINITY);
    pub const ONE_MAG: Self = Self(0.0);

    pub fn from_log2(l: f64) -> Self {
        assert!(!l.is_nan(), "log magnitude is NaN");
        Self(l)
    }

    /// log2 of |x|.
    pub fn from_scaled(x: ScaledF64) -> Self {
        Self(x.log2())
    }

    pub fn log2(self) -> f64 {
        self.0
    }

    /// The finite log2 value, or None for a zero or vacuous magnitude.
    pub fn finite_log2(self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }

    pub fn is_zero_mag(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_vacuous(self) -> bool {
        self.0 == f64::INFINITY
    }

    /// Magnitude ratio self / rhs as a log difference.
    pub fn ratio(self, rhs: Self) -> Self {
        assert!(
            !(self.0.is_infinite() && rhs.0 == self.0),
            "indeterminate ratio of equal infinite magnitudes"
        );
        assert!(!rhs.is_zero_mag(), "ratio with zero denominator");
        Self(self.0 - rhs.0)
    }

    /// Magnitude product as a log sum.
    pub fn scale(self, rhs: Self) -> Self {
        assert!(
            !(self.0.is_infinite() && rhs.0 == -self.0),
            "indeterminate product of zero and infinite magnitudes"
        );
        Self(self.0 + rhs.0)
    }

    /// self <= rhs up to an additive log-space tolerance.
    pub fn le_tol(self, rhs: Self, tol: f64) -> bool {
        if self.0.is_infinite() || rhs.0.is_infinite() {
            self.0 <= rhs.0
        } else {
            self.0 <= rhs.0 + tol
        }
    }

    pub fn approx_eq(self, rhs: Self, tol: f64) -> bool {
        if self.0.is_infinite() || rhs.0.is_infinite() {
            self.0 == rhs.0
        } else {
            (self.0 - rhs.0).abs() <= tol
        }
    }

    pub fn max(self, rhs: Self) -> Self {
        Self(self.0.max(rhs.0))
    }

    pub fn min(self, rhs: Self) -> Self {
        Self(self.0.min(rhs.0))
    }

    /// Decimal rendering of the magnitude itself, e.g. "1.234568e+120".
    ///
    /// Stable across runs: built from the log value with one fixed format.
    pub fn dec_string(self) -> String {
        if self.is_zero_mag() {
            return "0".to_owned();
        }
        if self.is_vacuous() {
            return "inf".to_owned();
        }
        let d = self.0 * LOG10_2;
        let mut e10 = d.floor();
        let mut mant = 10f64.powf(d - e10);
        // Guard the rounding boundary so the mantissa never prints as "10.".
        if mant >= 9.999_999_5 {
            mant = 1.0;
            e10 += 1.0;
        }
        format!("{mant:.6}e{e10:+}")
    }
}
