use num_complex::Complex64;
use num_traits::Num;
use std::fmt::Debug;
use std::ops::{Mul, Neg};

/// Field elements the evaluation routines run over: `f64` and `Complex64`.
pub trait Scalar:
    Copy + Num + Neg<Output = Self> + Mul<f64, Output = Self> + Debug + Send + Sync + 'static
{
    fn real(x: f64) -> Self;
    fn parts(self) -> (f64, f64);
    fn from_parts(re: f64, im: f64) -> Self;

    fn modulus(self) -> f64 {
        let (re, im) = self.parts();
        re.hypot(im)
    }

    fn finite(self) -> bool {
        let (re, im) = self.parts();
        re.is_finite() && im.is_finite()
    }
}

impl Scalar for f64 {
    fn real(x: f64) -> Self {
        x
    }
    fn parts(self) -> (f64, f64) {
        (self, 0.0)
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn parts(self) -> (f64, f64) {
        (self.re, self.im)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
}

/// Neumaier-compensated accumulator for a single real component.
#[derive(Clone, Copy, Debug, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }

    fn scale(&mut self, f: f64) {
        self.sum *= f;
        self.comp *= f;
    }
}

/// Compensated summation over a [`Scalar`], componentwise for complex values.
/// Also tracks the sum of moduli, which serves as the rounding-error scale.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: Neumaier,
    im: Neumaier,
    abs: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<T: Scalar>(&mut self, v: T) {
        let (re, im) = v.parts();
        self.re.add(re);
        self.im.add(im);
        self.abs += v.modulus();
    }

    pub fn value<T: Scalar>(&self) -> T {
        T::from_parts(self.re.value(), self.im.value())
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs
    }

    /// Multiplies the running sum by `f`; exact when `f` is a power of two.
    pub fn scale(&mut self, f: f64) {
        self.re.scale(f);
        self.im.scale(f);
        self.abs *= f;
    }
}
