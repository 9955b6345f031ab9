use num_complex::{Complex, Complex64};

use super::real::Real;
use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<R = f64> {
    n: usize,
    data: Vec<R>,
}

impl<R: Real> DenseMatrix<R> {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![R::zero(); n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<R>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged matrix");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    fn at(&mut self, i: usize, j: usize) -> &mut R {
        &mut self.data[i * self.n + j]
    }

    pub fn transpose(&self) -> DenseMatrix<R> {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn to_rows(&self) -> Vec<Vec<R>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn max_abs(&self) -> R {
        self.data
            .iter()
            .fold(R::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    pub fn map<S: Real>(&self, f: impl Fn(R) -> S) -> DenseMatrix<S> {
        DenseMatrix {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Parlett-Reinsch balancing by powers of two. Preserves Hessenberg structure
/// and the spectrum exactly.
pub fn balance<R: Real>(a: &mut DenseMatrix<R>) {
    let radix = R::from_f64(2.0);
    let sqrdx = R::from_f64(4.0);
    let n = a.n;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 200 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut r = R::zero();
            let mut c = R::zero();
            for j in 0..n {
                if j != i {
                    c = c + a.get(j, i).abs();
                    r = r + a.get(i, j).abs();
                }
            }
            if c != R::zero() && r != R::zero() && (c + r).to_f64().is_finite() {
                let mut g = r / radix;
                let mut f = R::one();
                let s = c + r;
                while c < g {
                    f = f * radix;
                    c = c * sqrdx;
                }
                g = r * radix;
                while c > g {
                    f = f / radix;
                    c = c / sqrdx;
                }
                if (c + r) / f < R::from_f64(0.95) * s {
                    done = false;
                    let g = R::one() / f;
                    for j in 0..n {
                        *a.at(i, j) = a.get(i, j) * g;
                    }
                    for j in 0..n {
                        *a.at(j, i) = a.get(j, i) * f;
                    }
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis implicit
/// double-shift QR iteration in real arithmetic.
///
/// Complex eigenvalues are returned as exact conjugate pairs from the
/// trailing 2x2 blocks. At most `30 * n` sweeps are spent in total.
pub fn hessenberg_eigenvalues(a: DenseMatrix) -> Result<Vec<Complex64>> {
    Ok(hessenberg_eigenvalues_in(a)?
        .into_iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// [`hessenberg_eigenvalues`] over any [`Real`] field.
pub fn hessenberg_eigenvalues_in<R: Real>(mut a: DenseMatrix<R>) -> Result<Vec<Complex<R>>> {
    let n = a.n;
    let zero = R::zero();
    let half = R::from_f64(0.5);
    let mut wr = vec![zero; n];
    let mut wi = vec![zero; n];
    if n == 0 {
        return Ok(vec![]);
    }
    let eps = R::epsilon();
    let mut anorm = zero;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm = anorm + a.get(i, j).abs();
        }
    }
    let max_total = 30 * n.max(1);
    let mut total = 0usize;

    let mut nn = n as isize - 1;
    let mut t = zero;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nu;
            while l > 0 {
                let mut s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == zero {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() <= eps * s {
                    a.set(l, l - 1, zero);
                    break;
                }
                l -= 1;
            }
            let mut x = a.get(nu, nu);
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = zero;
                nn -= 1;
                break;
            }
            let mut y = a.get(nu - 1, nu - 1);
            let mut w = a.get(nu, nu - 1) * a.get(nu - 1, nu);
            if l + 1 == nu {
                let p = half * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x = x + t;
                if q >= zero {
                    z = p + z.copysign(p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != zero {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = zero;
                    wi[nu] = zero;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = z;
                    wi[nu] = -z;
                }
                nn -= 2;
                break;
            }
            if total >= max_total {
                return Err(Error::QrNoConvergence {
                    iterations: total,
                    low: l,
                    high: nu,
                });
            }
            if its > 0 && its.is_multiple_of(10) {
                // exceptional shift
                t = t + x;
                for i in 0..=nu {
                    *a.at(i, i) = a.get(i, i) - x;
                }
                let s = a.get(nu, nu - 1).abs() + a.get(nu - 1, nu - 2).abs();
                x = R::from_f64(0.75) * s;
                y = x;
                w = R::from_f64(-0.4375) * s * s;
            }
            its += 1;
            total += 1;

            // form shift and look for two consecutive small subdiagonals
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a.get(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a.get(m + 1, m) + a.get(m, m + 1);
                q = a.get(m + 1, m + 1) - z - rr - ss;
                r = a.get(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p = p / s;
                q = q / s;
                r = r / s;
                if m == l {
                    break;
                }
                let u = a.get(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a.get(m - 1, m - 1).abs() + z.abs() + a.get(m + 1, m + 1).abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nu - 1 {
                a.set(i + 2, i, zero);
                if i != m {
                    a.set(i + 2, i - 1, zero);
                }
            }
            // double QR step on rows l..nn and columns m..nn
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a.get(k, k - 1);
                    q = a.get(k + 1, k - 1);
                    r = zero;
                    if k + 1 != nu {
                        r = a.get(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != zero {
                        p = p / x;
                        q = q / x;
                        r = r / x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != zero {
                    if k == m {
                        if l != m {
                            let v = a.get(k, k - 1);
                            a.set(k, k - 1, -v);
                        }
                    } else {
                        a.set(k, k - 1, -s * x);
                    }
                    p = p + s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q = q / p;
                    r = r / p;
                    for j in k..=nu {
                        let mut pp = a.get(k, j) + q * a.get(k + 1, j);
                        if k + 1 != nu {
                            pp = pp + r * a.get(k + 2, j);
                            *a.at(k + 2, j) = a.get(k + 2, j) - pp * z;
                        }
                        *a.at(k + 1, j) = a.get(k + 1, j) - pp * y;
                        *a.at(k, j) = a.get(k, j) - pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a.get(i, k) + y * a.get(i, k + 1);
                        if k + 1 != nu {
                            pp = pp + z * a.get(i, k + 2);
                            *a.at(i, k + 2) = a.get(i, k + 2) - pp * r;
                        }
                        *a.at(i, k + 1) = a.get(i, k + 1) - pp * q;
                        *a.at(i, k) = a.get(i, k) - pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex::new(re, im))
        .collect())
}
