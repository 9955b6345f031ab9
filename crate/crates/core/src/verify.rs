//! The identity suite behind `opsums verify`: every algebraic identity the
//! library relies on, checked numerically (or exactly) on a fixed grid.

use crate::asymptotics::{exp_genfun_residual, hermite_q_via_s_in};
use crate::error::Result;
use crate::family::{FamilyKind, RecurrenceFamily};
use crate::linalg::Real;
use crate::matrix_forms::{det_identity, factorization_residual, rs_identity_residual};
use crate::mp::MpSum;
use crate::zeros::fmt_f64;
use f256::f256;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

pub const T_GRID: [f64; 5] = [0.1, 0.316_227_766_016_837_94, 1.0, 3.162_277_660_168_379_5, 10.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub tolerance: f64,
    /// largest residual seen; 0 for exact checks that hold
    pub worst: f64,
    pub cases: usize,
    pub passed: bool,
    pub worst_case: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: String,
    pub max_m: usize,
    pub checks: Vec<IdentityCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `name,tolerance,worst,cases,passed,worst_case`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity,tolerance,worst,cases,passed,worst_case\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.name,
                fmt_f64(c.tolerance),
                fmt_f64(c.worst),
                c.cases,
                c.passed,
                c.worst_case
            );
        }
        out
    }
}

struct Tally {
    name: &'static str,
    tol: f64,
    worst: f64,
    cases: usize,
    at: String,
    failed: bool,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Tally {
            name,
            tol,
            worst: 0.0,
            cases: 0,
            at: String::new(),
            failed: false,
        }
    }

    fn record(&mut self, r: f64, at: impl FnOnce() -> String) {
        self.cases += 1;
        if !(r <= self.tol) {
            self.failed = true;
        }
        if r > self.worst || r.is_nan() {
            self.worst = r;
            self.at = at();
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            name: self.name.to_string(),
            tolerance: self.tol,
            worst: self.worst,
            cases: self.cases,
            passed: !self.failed,
            worst_case: self.at,
        }
    }
}

fn x_grid(fam: &RecurrenceFamily) -> [f64; 5] {
    match fam.kind() {
        FamilyKind::Hermite => [-2.1, -0.7, 0.05, 0.9, 2.4],
        FamilyKind::Charlier { .. } => [-0.5, 0.7, 2.5, 4.2, 7.9],
        _ => [-0.9, -0.3, 0.15, 0.6, 1.2],
    }
}

/// Runs every identity that applies to `fam` for degrees up to `max_m`
/// (capped by the table length of custom families).
pub fn verify_family(fam: &RecurrenceFamily, max_m: usize) -> Result<VerifyReport> {
    let max_m = match fam.max_index() {
        Some(k) => max_m.min(k),
        None => max_m,
    };
    let xs = x_grid(fam);
    let mut checks = vec![
        four_term(fam, max_m, &xs)?,
        factorization(fam, max_m)?,
        determinant(fam, max_m, &xs)?,
        rs_identity(fam, max_m, &xs)?,
    ];
    match fam.kind() {
        FamilyKind::Hermite => {
            checks.push(hermite_four_term(max_m, &xs)?);
            let (d, p) = hermite_exact(max_m);
            checks.push(d);
            checks.push(p);
            checks.push(q_via_s(max_m, &xs)?);
            checks.push(generating_function(fam, 0.4, 0.5, 0.3, 40, 1e-12)?);
            checks.push(exp_generating_function()?);
        }
        FamilyKind::Charlier { a } => {
            checks.push(charlier_lowering(fam, *a, max_m, &xs)?);
            checks.push(generating_function(fam, 2.0, 0.4, 0.25, 40, 1e-10)?);
        }
        _ => {}
    }
    Ok(VerifyReport {
        family: fam.label(),
        max_m,
        checks,
    })
}

/// Four-term recursion in `m` against the literal sum.
fn four_term(fam: &RecurrenceFamily, max_m: usize, xs: &[f64]) -> Result<IdentityCheck> {
    let mut tally = Tally::new("four_term_recursion", 1e-10);
    for &x in xs {
        for &t in &T_GRID {
            let rec = fam.partial_sum_recurrence_sequence(max_m, x, t)?;
            for (m, &r) in rec.iter().enumerate() {
                let d = fam.partial_sum_direct(m, x, t)?;
                tally.record((r - d).abs() / d.abs().max(1.0), || format!("m={m} x={x} t={t}"));
            }
        }
    }
    Ok(tally.finish())
}

fn factorization(fam: &RecurrenceFamily, max_m: usize) -> Result<IdentityCheck> {
    let mut tally = Tally::new("factorization_tPM_eq_L", 1e-12);
    for n in 0..max_m {
        for &t in &T_GRID {
            tally.record(factorization_residual(fam, n, t)?, || format!("N={n} t={t}"));
        }
    }
    Ok(tally.finish())
}

fn determinant(fam: &RecurrenceFamily, max_m: usize, xs: &[f64]) -> Result<IdentityCheck> {
    let mut tally = Tally::new("determinant_identity", 1e-10);
    for n in 0..max_m {
        for &x in xs {
            for &t in &T_GRID {
                tally.record(det_identity(fam, n, x, t)?.relative(), || format!("N={n} x={x} t={t}"));
            }
        }
    }
    Ok(tally.finish())
}

fn rs_identity(fam: &RecurrenceFamily, max_m: usize, xs: &[f64]) -> Result<IdentityCheck> {
    let mut tally = Tally::new("r_plus_s_identity", 1e-11);
    for n in 0..max_m {
        for &x in xs {
            for &t in &T_GRID {
                tally.record(rs_identity_residual(fam, n, x, t)?, || format!("N={n} x={x} t={t}"));
            }
        }
    }
    Ok(tally.finish())
}

/// `(m+1) q_{m+1} - (2xt + m + 1) q_m + 2(t^2 + t x) q_{m-1} - 2 t^2 q_{m-2} = 0`
/// relative to the largest of the four terms.
fn hermite_four_term(max_m: usize, xs: &[f64]) -> Result<IdentityCheck> {
    let h = RecurrenceFamily::hermite();
    let mut tally = Tally::new("hermite_four_term", 1e-10);
    for &x in xs {
        for &t in &T_GRID {
            let q: Vec<f64> = (0..=max_m + 1)
                .map(|m| h.partial_sum_direct(m, x, t))
                .collect::<Result<_>>()?;
            for m in 2..=max_m {
                let mf = m as f64;
                let terms = [
                    (mf + 1.0) * q[m + 1],
                    -(2.0 * x * t + mf + 1.0) * q[m],
                    2.0 * (t * t + t * x) * q[m - 1],
                    -2.0 * t * t * q[m - 2],
                ];
                let scale = terms.iter().fold(1.0f64, |a, v| a.max(v.abs()));
                let r = terms.iter().sum::<f64>().abs() / scale;
                tally.record(r, || format!("m={m} x={x} t={t}"));
            }
        }
    }
    Ok(tally.finish())
}

/// `q[n][k]`: coefficient of `t^n x^k` in Hermite `q_m(x; t)`, exact.
fn hermite_bivariate(m: usize) -> Vec<Vec<BigRational>> {
    let h = RecurrenceFamily::hermite();
    let exact = |v: f64| BigRational::from_float(v).expect("finite recurrence coefficient");
    let mut p: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    for n in 0..m {
        let (a, b, c) = (exact(h.a(n)), exact(h.b(n)), exact(h.c(n)));
        let mut next = vec![BigRational::zero(); n + 2];
        for (k, v) in p[n].iter().enumerate() {
            next[k + 1] += v;
            next[k] -= &b * v;
        }
        if n >= 1 {
            for (k, v) in p[n - 1].iter().enumerate() {
                next[k] -= &c * v;
            }
        }
        for v in &mut next {
            *v = &*v / &a;
        }
        p.push(next);
    }
    let mut fact = BigInt::one();
    let mut out = Vec::with_capacity(m + 1);
    for (n, pn) in p.into_iter().enumerate() {
        if n > 0 {
            fact *= BigInt::from(n);
        }
        let inv = BigRational::new(BigInt::one(), fact.clone());
        let mut row: Vec<BigRational> = pn.into_iter().map(|v| v * &inv).collect();
        row.resize(m + 1, BigRational::zero());
        out.push(row);
    }
    out
}

/// `d/dx q_m = 2t q_{m-1}` and `t d/dt q_m = x d/dx q_m - 1/2 d^2/dx^2 q_m`
/// on exact coefficient arrays.
fn hermite_exact(max_m: usize) -> (IdentityCheck, IdentityCheck) {
    let mut deriv = Tally::new("hermite_x_derivative_exact", 0.0);
    let mut pde = Tally::new("hermite_pde_exact", 0.0);
    let q = hermite_bivariate(max_m);
    let two = BigRational::from_integer(BigInt::from(2));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let at = |n: usize, k: usize| -> BigRational { q.get(n).and_then(|r| r.get(k)).cloned().unwrap_or_default() };
    let kr = |k: usize| BigRational::from_integer(BigInt::from(k));
    for m in 1..=max_m {
        // rows n <= m of the full array are exactly q_m
        let mut ok_d = true;
        let mut ok_p = true;
        for n in 0..=m {
            for k in 0..=m {
                let dx = kr(k + 1) * at(n, k + 1);
                let rhs = if n >= 1 { &two * at(n - 1, k) } else { BigRational::zero() };
                ok_d &= dx == rhs;
                let lhs = kr(n) * at(n, k);
                let rhs = kr(k) * at(n, k) - &half * kr(k + 2) * kr(k + 1) * at(n, k + 2);
                ok_p &= lhs == rhs;
            }
        }
        deriv.record(if ok_d { 0.0 } else { 1.0 }, || format!("m={m}"));
        pde.record(if ok_p { 0.0 } else { 1.0 }, || format!("m={m}"));
    }
    (deriv.finish(), pde.finish())
}

/// The expansion in exponential partial sums against the direct sum, both in
/// 237-bit arithmetic.
fn q_via_s(max_m: usize, xs: &[f64]) -> Result<IdentityCheck> {
    let h = RecurrenceFamily::hermite();
    let mut tally = Tally::new("hermite_q_via_exp_sums", 1e-11);
    for &t in &T_GRID {
        for m in 0..=max_m {
            let mp = MpSum::new(&h, m, t)?;
            for &x in xs {
                let direct = mp.eval(Complex64::new(x, 0.0)).value.re.to_f64();
                let via = hermite_q_via_s_in::<f256>(m, x, t).to_f64();
                tally.record((via - direct).abs() / direct.abs().max(1.0), || format!("m={m} x={x} t={t}"));
            }
        }
    }
    Ok(tally.finish())
}

/// `q_m(x+1; t) - q_m(x; t) = -(t/a) q_{m-1}(x; t)`.
fn charlier_lowering(fam: &RecurrenceFamily, a: f64, max_m: usize, xs: &[f64]) -> Result<IdentityCheck> {
    let mut tally = Tally::new("charlier_lowering", 1e-10);
    for &x in xs {
        for &t in &T_GRID {
            for m in 1..=max_m {
                let up = fam.partial_sum_direct(m, x + 1.0, t)?;
                let here = fam.partial_sum_direct(m, x, t)?;
                let low = fam.partial_sum_direct(m - 1, x, t)?;
                let scale = up.abs().max(here.abs()).max(1.0);
                let r = (up - here + t / a * low).abs() / scale;
                tally.record(r, || format!("m={m} x={x} t={t}"));
            }
        }
    }
    Ok(tally.finish())
}

fn generating_function(fam: &RecurrenceFamily, x: f64, t: f64, y: f64, terms: usize, tol: f64) -> Result<IdentityCheck> {
    let mut tally = Tally::new("generating_function", tol);
    let (f, radius) = fam.generating_function().expect("closed form known for this family");
    for yy in [0.0, -y, y] {
        let r = fam.genfun_residual(&f, radius, x, t, yy, terms)?;
        tally.record(r, || format!("x={x} t={t} y={yy} M={terms}"));
    }
    Ok(tally.finish())
}

/// `sum_m S_m(t) y^m = e^{t y} / (1 - y)` for `|y| <= 0.3`, 50 terms.
fn exp_generating_function() -> Result<IdentityCheck> {
    let mut tally = Tally::new("exp_sum_generating_function", 1e-12);
    for y in [-0.3, -0.15, 0.0, 0.15, 0.3] {
        for t in [-2.0, -0.5, 0.5, 1.0, 2.0] {
            tally.record(exp_genfun_residual(t, y, 50)?, || format!("t={t} y={y}"));
        }
    }
    Ok(tally.finish())
}
