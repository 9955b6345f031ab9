//! Exponent-scaled reals: an `f64` mantissa in `[0.5, 1)` paired with a base-2
//! exponent. Used where products of recurrence coefficients overflow `f64`
//! (Hermite and Charlier values beyond n ~ 150, determinants of large pencils).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtFloat {
    mant: f64,
    exp: i64,
}

/// Splits a finite nonzero `x` into `(m, e)` with `x = m * 2^e`, `0.5 <= |m| < 1`.
pub(crate) fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal
        let (m, e) = frexp(x * f64::powi(2.0, 64));
        return (m, e - 64);
    }
    let e = raw - 1022;
    let m = f64::from_bits((bits & !(0x7ff << 52)) | (1022 << 52));
    (m, e)
}

pub(crate) fn ldexp(m: f64, e: i64) -> f64 {
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let e = e.clamp(-2200, 2200) as i32;
    // split so that each factor stays representable
    let half = e / 2;
    m * f64::powi(2.0, half) * f64::powi(2.0, e - half)
}

impl ExtFloat {
    pub const ZERO: ExtFloat = ExtFloat { mant: 0.0, exp: 0 };
    pub const ONE: ExtFloat = ExtFloat { mant: 0.5, exp: 1 };

    pub fn new(x: f64) -> Self {
        let (mant, exp) = frexp(x);
        ExtFloat { mant, exp }
    }

    /// `m * 2^e` without going through an intermediate `f64` for the power.
    pub fn from_parts(m: f64, e: i64) -> Self {
        let (mm, me) = frexp(m);
        if mm == 0.0 || !mm.is_finite() {
            return ExtFloat { mant: mm, exp: 0 };
        }
        ExtFloat { mant: mm, exp: me + e }
    }

    /// `sign * exp(ln_abs)`.
    pub fn from_ln(sign: f64, ln_abs: f64) -> Self {
        if ln_abs == f64::NEG_INFINITY || sign == 0.0 {
            return Self::ZERO;
        }
        let l2 = ln_abs / std::f64::consts::LN_2;
        let e = l2.floor();
        let frac = l2 - e;
        Self::from_parts(sign.signum() * frac.exp2(), e as i64)
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    pub fn mantissa(self) -> f64 {
        self.mant
    }

    pub fn exponent(self) -> i64 {
        self.exp
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.mant.is_finite()
    }

    pub fn abs(self) -> Self {
        ExtFloat {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn signum(self) -> f64 {
        if self.mant == 0.0 {
            0.0
        } else {
            self.mant.signum()
        }
    }

    /// Natural log of the absolute value.
    pub fn ln_abs(self) -> f64 {
        if self.mant == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.mant.abs().ln() + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn scale_f64(self, s: f64) -> Self {
        self * ExtFloat::new(s)
    }

    /// `self / other` returned as an ordinary float (for relative errors).
    pub fn ratio(self, other: ExtFloat) -> f64 {
        (self / other).to_f64()
    }

    pub fn max_abs(self, other: ExtFloat) -> ExtFloat {
        if self.abs().cmp_abs(other.abs()) == Ordering::Less {
            other.abs()
        } else {
            self.abs()
        }
    }

    pub fn cmp_abs(self, other: ExtFloat) -> Ordering {
        match (self.mant == 0.0, other.mant == 0.0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        self.exp
            .cmp(&other.exp)
            .then_with(|| self.mant.abs().total_cmp(&other.mant.abs()))
    }
}

impl From<f64> for ExtFloat {
    fn from(x: f64) -> Self {
        ExtFloat::new(x)
    }
}

impl Mul for ExtFloat {
    type Output = ExtFloat;
    fn mul(self, rhs: ExtFloat) -> ExtFloat {
        ExtFloat::from_parts(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for ExtFloat {
    type Output = ExtFloat;
    fn div(self, rhs: ExtFloat) -> ExtFloat {
        ExtFloat::from_parts(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

impl Neg for ExtFloat {
    type Output = ExtFloat;
    fn neg(self) -> ExtFloat {
        ExtFloat {
            mant: -self.mant,
            exp: self.exp,
        }
    }
}

impl Add for ExtFloat {
    type Output = ExtFloat;
    fn add(self, rhs: ExtFloat) -> ExtFloat {
        if self.mant == 0.0 {
            return rhs;
        }
        if rhs.mant == 0.0 {
            return self;
        }
        let (big, small) = if self.exp >= rhs.exp {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let shift = big.exp - small.exp;
        if shift > 60 {
            return big;
        }
        ExtFloat::from_parts(big.mant + ldexp(small.mant, -shift), big.exp)
    }
}

impl Sub for ExtFloat {
    type Output = ExtFloat;
    fn sub(self, rhs: ExtFloat) -> ExtFloat {
        self + (-rhs)
    }
}

impl fmt::Display for ExtFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mant == 0.0 {
            return write!(f, "0");
        }
        let l10 = self.ln_abs() / std::f64::consts::LN_10;
        let e10 = l10.floor();
        let m10 = 10f64.powf(l10 - e10) * self.mant.signum();
        write!(f, "{m10:.12}e{e10}")
    }
}
