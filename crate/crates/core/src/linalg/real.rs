use std::fmt::Debug;
use std::ops::Neg;

use f256::f256;
use num_traits::Num;

/// Real field the dense eigenvalue kernels run over: `f64`, or the 237-bit
/// `f256` when double precision is not enough.
pub trait Real: Copy + PartialOrd + Num + Neg<Output = Self> + Debug + Send + Sync + 'static {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn copysign(self, sign: Self) -> Self;
    fn epsilon() -> Self;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn copysign(self, sign: Self) -> Self {
        f64::copysign(self, sign)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

impl Real for f256 {
    fn from_f64(x: f64) -> Self {
        f256::from(x)
    }
    fn to_f64(self) -> f64 {
        // the crate offers no narrowing conversion; its decimal output is exact
        // enough that parsing rounds correctly
        if self.eq_zero() {
            return 0.0;
        }
        if !self.is_finite() {
            return if self.is_nan() {
                f64::NAN
            } else if self.is_sign_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        format!("{self:e}").parse().unwrap_or(f64::NAN)
    }
    fn abs(self) -> Self {
        f256::abs(&self)
    }
    fn sqrt(self) -> Self {
        f256::sqrt(self)
    }
    fn copysign(self, sign: Self) -> Self {
        f256::copysign(self, sign)
    }
    fn epsilon() -> Self {
        f256::EPSILON
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f256_round_trips_doubles() {
        for x in [1.0, -0.1, 1e-300, 6.02e23, f64::MAX, 5e-324, 0.05] {
            assert_eq!(<f256 as Real>::from_f64(x).to_f64(), x);
        }
        let third = f256::from(1.0) / f256::from(3.0);
        assert_eq!(third.to_f64(), 1.0 / 3.0);
    }
}
