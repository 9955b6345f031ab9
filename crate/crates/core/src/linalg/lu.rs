use crate::error::{Error, Result};
use crate::ext::{frexp, ldexp, ExtFloat};

use super::{DenseMatrix, Real};

/// Determinant by LU with partial pivoting, accumulated in exponent-scaled form.
/// Rows and then columns are first scaled by powers of two to unit maximum.
pub fn lu_determinant(a: DenseMatrix) -> ExtFloat {
    lu_determinant_in::<f64>(a)
}

/// [`lu_determinant`] with the elimination carried out in `R`.
pub fn lu_determinant_in<R: Real>(mut a: DenseMatrix) -> ExtFloat {
    let n = a.dim();
    let mut det = ExtFloat::ONE;
    for i in 0..n {
        let big = (0..n).fold(0.0f64, |m, j| m.max(a.get(i, j).abs()));
        if big == 0.0 {
            return ExtFloat::ZERO;
        }
        let (_, e) = frexp(big);
        let s = ldexp(1.0, -e);
        for j in 0..n {
            a.set(i, j, a.get(i, j) * s);
        }
        det = det * ExtFloat::from_parts(1.0, e);
    }
    for j in 0..n {
        let big = (0..n).fold(0.0f64, |m, i| m.max(a.get(i, j).abs()));
        if big == 0.0 {
            return ExtFloat::ZERO;
        }
        let (_, e) = frexp(big);
        let s = ldexp(1.0, -e);
        for i in 0..n {
            a.set(i, j, a.get(i, j) * s);
        }
        det = det * ExtFloat::from_parts(1.0, e);
    }
    let mut a = a.map(R::from_f64);
    for k in 0..n {
        let mut piv = k;
        for i in k + 1..n {
            if a.get(i, k).abs() > a.get(piv, k).abs() {
                piv = i;
            }
        }
        let pv = a.get(piv, k);
        if pv == R::zero() {
            return ExtFloat::ZERO;
        }
        if piv != k {
            for j in 0..n {
                let tmp = a.get(k, j);
                a.set(k, j, a.get(piv, j));
                a.set(piv, j, tmp);
            }
            det = -det;
        }
        det = det * ExtFloat::new(pv.to_f64());
        for i in k + 1..n {
            let f = a.get(i, k) / pv;
            if f != R::zero() {
                for j in k + 1..n {
                    let v = a.get(i, j) - f * a.get(k, j);
                    a.set(i, j, v);
                }
            }
        }
    }
    det
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting. Returns the
/// solution and the relative residual `||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m.get(i, k).abs().total_cmp(&m.get(j, k).abs()))
            .unwrap();
        if m.get(piv, k) == 0.0 {
            return Err(Error::IllConditionedFit(f64::INFINITY));
        }
        if piv != k {
            for j in 0..n {
                let tmp = m.get(k, j);
                m.set(k, j, m.get(piv, j));
                m.set(piv, j, tmp);
            }
            rhs.swap(k, piv);
            perm.swap(k, piv);
        }
        let pv = m.get(k, k);
        for i in k + 1..n {
            let f = m.get(i, k) / pv;
            m.set(i, k, 0.0);
            for j in k + 1..n {
                let v = m.get(i, j) - f * m.get(k, j);
                m.set(i, j, v);
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m.get(i, j) * x[j]).sum();
        x[i] = (rhs[i] - s) / m.get(i, i);
    }
    let mut res: f64 = 0.0;
    let mut anorm: f64 = 0.0;
    for i in 0..n {
        let row: f64 = (0..n).map(|j| a.get(i, j) * x[j]).sum();
        res = res.max((row - b[i]).abs());
        anorm = anorm.max((0..n).map(|j| a.get(i, j).abs()).sum());
    }
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let denom = anorm * xn + bn;
    let rel = if denom > 0.0 { res / denom } else { 0.0 };
    Ok((x, rel))
}
