use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Dense real polynomial in ascending-degree order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCoeffs {
    coeffs: Vec<f64>,
}

impl PolynomialCoeffs {
    /// Builds a polynomial, trimming exact-zero leading coefficients.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        PolynomialCoeffs { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval<T: Scalar>(&self, x: T) -> T {
        horner(&self.coeffs, x)
    }

    pub fn derivative(&self) -> PolynomialCoeffs {
        if self.coeffs.len() == 1 {
            return PolynomialCoeffs::new(vec![0.0]);
        }
        PolynomialCoeffs::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    /// `p(z)` and `p'(z)` together, plus `sum |c_k| |z|^k` as an error scale.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64, f64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        let az = z.norm();
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            scale = scale * az + c.abs();
        }
        (p, dp, scale)
    }
}

pub fn horner<T: Scalar>(coeffs: &[f64], x: T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::zero(), |acc, &c| acc * x + T::real(c))
}
