//! Extended-range scalar arithmetic.
//!
//! Norms along trajectories of x_{n+1} = A_n x_n grow or decay exponentially
//! in n, so entries of evolution products leave the f64 range long before the
//! window sizes of interest. A `ScaledF64` stores m * 2^e with the mantissa
//! kept in +-[1, 2) and the exponent in an i64, which extends the dynamic
//! range far beyond what any window scan can produce while keeping every
//! operation a single f64 rounding. For inputs and results inside the normal
//! f64 range, arithmetic here is bit-identical to plain f64 arithmetic.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exponent gap beyond which the smaller addend cannot move the rounded sum.
///
/// 108 > 2 * 53 significand bits, so the discarded term sits strictly below
/// half an ulp of the result and round-to-nearest returns the larger addend.
const SHIFT_CAP: i64 = 108;

const EXP_MASK: u64 = 0x7ff << 52;
const EXP_ONE: u64 = 1023 << 52;

/// 2^k as an exact f64, for k in [-1022, 1023].
fn pow2i(k: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((k + 1023) as u64) << 52)
}

/// A real number m * 2^e with |m| in [1, 2), or the canonical zero (0, 0).
///
/// Every constructor and operation restores this form, so derived equality
/// coincides with value equality and comparisons can work on (sign, e, |m|).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledF64 {
    mantissa: f64,
    exponent: i64,
}

impl ScaledF64 {
    pub const ZERO: Self = Self { mantissa: 0.0, exponent: 0 };
    pub const ONE: Self = Self { mantissa: 1.0, exponent: 0 };

    /// Normalizes an arbitrary finite mantissa into canonical form.
    pub fn new(mantissa: f64, exponent: i64) -> Self {
        assert!(mantissa.is_finite(), "non-finite mantissa");
        if mantissa == 0.0 {
            return Self::ZERO;
        }
        let bits = mantissa.to_bits();
        let raw = ((bits >> 52) & 0x7ff) as i64;
        if raw == 0 {
            // Subnormal: scale into the normal range first; the product by a
            // power of two is exact because the significand fits either way.
            return Self::new(mantissa * pow2i(64), exponent - 64);
        }
        Self {
            mantissa: f64::from_bits((bits & !EXP_MASK) | EXP_ONE),
            exponent: exponent + raw - 1023,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(x, 0)
    }

    /// Exact power of two.
    pub fn two_pow(e: i64) -> Self {
        Self { mantissa: 1.0, exponent: e }
    }

    /// 2^x for finite fractional x, with one rounding in the mantissa.
    pub fn exp2(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite exponent");
        assert!(x.abs() < 4.5e15, "exponent too large for exact floor split");
        let e = x.floor();
        // x - floor(x) is exact below 2^52, so the only rounding is in exp2.
        Self::new((x - e).exp2(), e as i64)
    }

    pub fn is_zero(self) -> bool {
        self.mantissa == 0.0
    }

    pub fn is_sign_negative(self) -> bool {
        self.mantissa < 0.0
    }

    pub fn mantissa(self) -> f64 {
        self.mantissa
    }

    pub fn exponent(self) -> i64 {
        self.exponent
    }

    pub fn abs(self) -> Self {
        Self { mantissa: self.mantissa.abs(), exponent: self.exponent }
    }

    /// Exact multiplication by 2^k.
    pub fn mul_pow2(self, k: i64) -> Self {
        if self.mantissa == 0.0 {
            return Self::ZERO;
        }
        Self { mantissa: self.mantissa, exponent: self.exponent + k }
    }

    pub fn sqrt(self) -> Self {
        assert!(self.mantissa >= 0.0, "sqrt of negative value");
        if self.mantissa == 0.0 {
            return Self::ZERO;
        }
        let q = self.exponent.div_euclid(2);
        let r = self.exponent.rem_euclid(2);
        // m * 2^r lies in [1, 4); its square root in [1, 2) after one rounding.
        Self::new((self.mantissa * pow2i(r as i32)).sqrt(), q)
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    /// log2 of the magnitude; -inf for zero.
    pub fn log2(self) -> f64 {
        if self.mantissa == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.exponent as f64 + self.mantissa.abs().log2()
        }
    }

    /// Rounds to f64, saturating to +-inf and flushing to signed zero outside
    /// the representable range.
    pub fn to_f64(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else if self.exponent > 1023 {
            f64::INFINITY.copysign(self.mantissa)
        } else if self.exponent >= -1022 {
            self.mantissa * pow2i(self.exponent as i32)
        } else if self.exponent >= -1130 {
            // Two exact power-of-two factors, then one rounding into the
            // subnormal range.
            (self.mantissa * pow2i((self.exponent + 600) as i32)) * pow2i(-600)
        } else {
            0.0f64.copysign(self.mantissa)
        }
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let sa = sign_class(self);
        let sb = sign_class(other);
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let mag = self
            .exponent
            .cmp(&other.exponent)
            .then_with(|| self.mantissa.abs().partial_cmp(&other.mantissa.abs()).unwrap());
        if sa > 0 {
            mag
        } else {
            mag.reverse()
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.cmp_value(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.cmp_value(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }
}

fn sign_class(x: &ScaledF64) -> i8 {
    if x.mantissa == 0.0 {
        0
    } else if x.mantissa < 0.0 {
        -1
    } else {
        1
    }
}

impl PartialOrd for ScaledF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl Add for ScaledF64 {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if self.mantissa == 0.0 {
            return rhs;
        }
        if rhs.mantissa == 0.0 {
            return self;
        }
        let (hi, lo) = if self.exponent >= rhs.exponent { (self, rhs) } else { (rhs, self) };
        let shift = hi.exponent - lo.exponent;
        if shift > SHIFT_CAP {
            return hi;
        }
        // Exact power-of-two alignment keeps the sum a single f64 rounding,
        // so results agree bitwise with plain f64 when both fit.
        let aligned = lo.mantissa * pow2i(-shift as i32);
        Self::new(hi.mantissa + aligned, hi.exponent)
    }
}

impl Sub for ScaledF64 {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for ScaledF64 {
    type Output = Self;

    fn neg(self) -> Self {
        if self.mantissa == 0.0 {
            return Self::ZERO;
        }
        Self { mantissa: -self.mantissa, exponent: self.exponent }
    }
}

impl Mul for ScaledF64 {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.mantissa == 0.0 || rhs.mantissa == 0.0 {
            return Self::ZERO;
        }
        Self::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Div for ScaledF64 {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        assert!(rhs.mantissa != 0.0, "division by zero");
        if self.mantissa == 0.0 {
            return Self::ZERO;
        }
        Self::new(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}
