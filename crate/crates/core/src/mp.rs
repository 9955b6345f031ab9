//! `q_m` and `P_{m-1}` in 237-bit arithmetic, for zeros whose condition
//! number exceeds what double precision can resolve.

use f256::f256;
use num_complex::{Complex, Complex64};

use crate::error::{require_nonzero_t, Error, Result};
use crate::family::{FamilyKind, RecurrenceFamily};
use crate::linalg::{DenseMatrix, Real};

pub type C256 = Complex<f256>;

fn mp(x: f64) -> f256 {
    f256::from(x)
}

fn to_c64(z: C256) -> Complex64 {
    Complex64::new(z.re.to_f64(), z.im.to_f64())
}

fn norm(z: C256) -> f256 {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// Recurrence data of one family for indices `0..=m`, at fixed `t`.
#[derive(Clone, Debug)]
pub struct MpSum {
    m: usize,
    t: f256,
    a: Vec<f256>,
    b: Vec<f256>,
    c: Vec<f256>,
    /// `alpha_n / alpha_{n-1}`, entry 0 unused
    r: Vec<f256>,
}

/// `q_m(z)`, `q_m'(z)` and `sum |w_n|`.
#[derive(Clone, Copy, Debug)]
pub struct MpEval {
    pub value: C256,
    pub derivative: C256,
    pub abs_sum: f256,
}

impl MpSum {
    pub fn new(fam: &RecurrenceFamily, m: usize, t: f64) -> Result<Self> {
        require_nonzero_t(t)?;
        fam.require(m)?;
        let one = f256::from(1.0);
        let idx = |n: usize| f256::from(n as f64);
        let mut a = Vec::with_capacity(m + 1);
        let mut b = Vec::with_capacity(m + 1);
        let mut c = Vec::with_capacity(m + 1);
        let mut r = Vec::with_capacity(m + 1);
        for n in 0..=m {
            let (an, bn, cn, rn) = match fam.kind() {
                FamilyKind::Hermite => (mp(0.5), mp(0.0), idx(n), one / idx(n)),
                FamilyKind::Charlier { a } => (-mp(*a), idx(n) + mp(*a), -idx(n), one / idx(n)),
                FamilyKind::Lommel { nu } => {
                    let h = one / (mp(2.0) * (idx(n) + mp(*nu)));
                    (h, mp(0.0), h, one)
                }
                FamilyKind::Custom { table, .. } => {
                    let rn = if n == 0 {
                        one
                    } else {
                        mp(table.alpha[n]) / mp(table.alpha[n - 1])
                    };
                    (mp(table.a[n]), mp(table.b[n]), mp(table.c[n]), rn)
                }
            };
            a.push(an);
            b.push(bn);
            c.push(if n == 0 { mp(0.0) } else { cn });
            r.push(rn);
        }
        Ok(MpSum {
            m,
            t: mp(t),
            a,
            b,
            c,
            r,
        })
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn eval(&self, z: Complex64) -> MpEval {
        let z = C256::new(mp(z.re), mp(z.im));
        let zero = C256::new(mp(0.0), mp(0.0));
        let mut w_prev = zero;
        let mut w = C256::new(mp(1.0), mp(0.0));
        let mut d_prev = zero;
        let mut d = zero;
        let mut val = w;
        let mut der = zero;
        let mut abs_sum = mp(1.0);
        for n in 0..self.m {
            let lead = self.t * self.r[n + 1] / self.a[n];
            let xb = z - self.b[n];
            let mut next = xb * w;
            let mut dnext = w + xb * d;
            if n >= 1 {
                let k = self.c[n] * self.t * self.r[n];
                next -= w_prev * k;
                dnext -= d_prev * k;
            }
            w_prev = w;
            d_prev = d;
            w = next * lead;
            d = dnext * lead;
            val += w;
            der += d;
            abs_sum += norm(w);
        }
        MpEval {
            value: val,
            derivative: der,
            abs_sum,
        }
    }

    /// Newton correction `q/q'` at `z`, or `None` where `q'` vanishes.
    pub fn newton_step(&self, z: Complex64) -> Option<Complex64> {
        let e = self.eval(z);
        if e.value.re.eq_zero() && e.value.im.eq_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        let den = e.derivative.re * e.derivative.re + e.derivative.im * e.derivative.im;
        if den.eq_zero() {
            return None;
        }
        let step = to_c64(e.value * e.derivative.conj() / den);
        (step.re.is_finite() && step.im.is_finite()).then_some(step)
    }

    /// `|q/q'| / max(1, |z|)`.
    pub fn residual(&self, z: Complex64) -> f64 {
        match self.newton_step(z) {
            Some(s) => s.norm() / z.norm().max(1.0),
            None => f64::INFINITY,
        }
    }

    /// Newton iteration from `z`, keeping the best iterate by residual.
    pub fn polish(&self, z: Complex64, steps: usize) -> (Complex64, f64) {
        let mut best = z;
        let mut best_step = match self.newton_step(z) {
            Some(s) => s,
            None => return (z, f64::INFINITY),
        };
        for _ in 0..steps {
            if best_step == Complex64::new(0.0, 0.0) {
                break;
            }
            let cand = best - best_step;
            match self.newton_step(cand) {
                Some(s) if s.norm() < best_step.norm() => {
                    best = cand;
                    best_step = s;
                }
                _ => break,
            }
        }
        (best, best_step.norm() / best.norm().max(1.0))
    }

    /// Transpose of `P_{m-1}(t)`, upper Hessenberg, in 237-bit entries.
    pub fn companion_transpose(&self) -> Result<DenseMatrix<f256>> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be >= 1".into()));
        }
        let n = self.m - 1;
        let t = self.t;
        let mut h = DenseMatrix::zeros(n + 1);
        for i in 0..n {
            h.set(i, i, self.b[i]);
            h.set(i + 1, i, self.a[i] / t);
            if i >= 1 {
                h.set(i - 1, i, t * self.c[i]);
            }
        }
        let an_t = self.a[n] / t;
        let mut ratio = mp(1.0) / self.r[n + 1];
        for j in (0..=n).rev() {
            let mut v = -ratio * an_t;
            if j > 0 {
                ratio /= self.r[j];
            }
            if j + 1 == n {
                v += t * self.c[n];
            }
            if j == n {
                v += self.b[n];
            }
            h.set(j, n, v);
        }
        Ok(h)
    }
}

/// Real `q`, its partial derivatives in `x` and `t`, and `sum |w_n|`,
/// `sum |w_n'|`, all divided by `sum |w_n|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub q: f64,
    pub qx: f64,
    pub qxx: f64,
    pub qt: f64,
    pub qxt: f64,
    /// `sum |w_n'| / sum |w_n|`
    pub qx_scale: f64,
}

impl MpSum {
    /// Value and derivatives of `q_m` at real `x`.
    pub fn jet(&self, x: f64) -> Jet {
        let x = mp(x);
        let zero = mp(0.0);
        let (mut w_prev, mut w) = (zero, mp(1.0));
        let (mut d_prev, mut d) = (zero, zero);
        let (mut e_prev, mut e) = (zero, zero);
        let (mut q, mut qx, mut qxx, mut qt, mut qxt) = (w, zero, zero, zero, zero);
        let (mut sw, mut sd) = (mp(1.0), zero);
        for n in 0..self.m {
            let lead = self.t * self.r[n + 1] / self.a[n];
            let xb = x - self.b[n];
            let mut nw = xb * w;
            let mut nd = w + xb * d;
            let mut ne = d + d + xb * e;
            if n >= 1 {
                let k = self.c[n] * self.t * self.r[n];
                nw -= k * w_prev;
                nd -= k * d_prev;
                ne -= k * e_prev;
            }
            (w_prev, d_prev, e_prev) = (w, d, e);
            w = nw * lead;
            d = nd * lead;
            e = ne * lead;
            let k = mp((n + 1) as f64);
            q += w;
            qx += d;
            qxx += e;
            qt += k * w;
            qxt += k * d;
            sw += w.abs();
            sd += d.abs();
        }
        let f = |v: f256| (v / sw).to_f64();
        Jet {
            q: f(q),
            qx: f(qx),
            qxx: f(qxx),
            qt: f(qt / self.t),
            qxt: f(qxt / self.t),
            qx_scale: f(sd),
        }
    }
}

/// Real polynomial with 237-bit coefficients, ascending degree, trimmed.
#[derive(Clone, Debug)]
pub struct MpPoly {
    coeffs: Vec<f256>,
}

impl MpPoly {
    pub fn new(mut coeffs: Vec<f256>) -> Self {
        while coeffs.len() > 1 && coeffs.last().unwrap().eq_zero() {
            coeffs.pop();
        }
        MpPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[f256] {
        &self.coeffs
    }

    /// Coefficients rounded to double precision.
    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64()).collect()
    }

    pub fn eval(&self, z: Complex64) -> (C256, C256) {
        let z = C256::new(mp(z.re), mp(z.im));
        let zero = C256::new(mp(0.0), mp(0.0));
        let (mut p, mut dp) = (zero, zero);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Newton correction `p/p'` at `z`, or `None` where `p'` vanishes.
    pub fn newton_step(&self, z: Complex64) -> Option<Complex64> {
        let (p, dp) = self.eval(z);
        if p.re.eq_zero() && p.im.eq_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        let den = dp.re * dp.re + dp.im * dp.im;
        if den.eq_zero() {
            return None;
        }
        let step = to_c64(p * dp.conj() / den);
        (step.re.is_finite() && step.im.is_finite()).then_some(step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_double_evaluation_where_it_is_well_conditioned() {
        let fam = RecurrenceFamily::hermite();
        let s = MpSum::new(&fam, 6, 0.7).unwrap();
        for z in [Complex64::new(0.3, 0.0), Complex64::new(-1.2, 0.4)] {
            let e = s.eval(z);
            let want = fam.partial_sum_eval(6, z, 0.7).unwrap();
            assert!((to_c64(e.value) - want.value).norm() < 1e-13 * want.value_scale);
            assert!((to_c64(e.derivative) - want.derivative).norm() < 1e-13 * want.derivative_scale);
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let fam = RecurrenceFamily::charlier(3.0).unwrap();
        let (x, t, h) = (1.3, 0.8, 1e-6);
        // unnormalised (q, q_x)
        let raw = |x: f64, t: f64| {
            let j = MpSum::new(&fam, 7, t).unwrap().jet(x);
            let s: f64 = fam.summands(7, x, t).unwrap().iter().map(|v| v.abs()).sum();
            (j.q * s, j.qx * s, j)
        };
        let (q, qx, j) = raw(x, t);
        let s = q / j.q;
        assert!((q - fam.partial_sum_direct(7, x, t).unwrap()).abs() < 1e-12 * s);
        let cd = |f: &dyn Fn(f64) -> f64| (f(h) - f(-h)) / (2.0 * h);
        assert!((qx - cd(&|e| raw(x + e, t).0)).abs() < 1e-6 * s);
        assert!((j.qt * s - cd(&|e| raw(x, t + e).0)).abs() < 1e-6 * s);
        assert!((j.qxx * s - cd(&|e| raw(x + e, t).1)).abs() < 1e-6 * s);
        assert!((j.qxt * s - cd(&|e| raw(x, t + e).1)).abs() < 1e-6 * s);
    }

    #[test]
    fn mp_poly_trims_and_steps() {
        let p = MpPoly::new(vec![mp(-2.0), mp(0.0), mp(1.0), mp(0.0)]);
        assert_eq!(p.degree(), 2);
        let s = p.newton_step(Complex64::new(1.5, 0.0)).unwrap();
        assert!((s.re - (0.25 / 3.0)).abs() < 1e-16);
    }

    #[test]
    fn hermite_q2_zeros() {
        // q_2 = 1 + 2x + (4x^2 - 2)/2 = 2x(x + 1) at t = 1
        let s = MpSum::new(&RecurrenceFamily::hermite(), 2, 1.0).unwrap();
        let (z, res) = s.polish(Complex64::new(-0.9, 0.1), 8);
        assert!((z - Complex64::new(-1.0, 0.0)).norm() < 1e-15 && res < 1e-15, "{z} {res}");
    }
}
