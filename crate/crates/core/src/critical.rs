//! The threshold `t_crit(m)` above which every zero of `q_m(.; t)` is real:
//! bisection on the realness predicate for any family, and the double-zero
//! scan over Hermite zeros for rescaled Hermite sums.

use std::cell::Cell;
use std::fmt::Write as _;

use f256::f256;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::RecurrenceFamily;
use crate::matrix_forms::double_zero_criterion_scaled;
use crate::mp::{MpPoly, MpSum};
use crate::zeros::{classify_real, fmt_f64, is_real, poly_roots_certified, zeros_eig, ZeroSet, DEFAULT_SEED, DEFAULT_TOL_IM};

pub const DEFAULT_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 64;
const PROBE_POINTS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalMethod {
    Bisect,
    HermiteDoubleZero,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// the realness predicate flipped more than once on the coarse scan
    pub non_monotone: bool,
    /// midpoints of the scan cells where the predicate flipped
    pub flips: Vec<f64>,
    /// `(x, t)` solving `q = q_x = 0` near the reported point
    pub double_zero: Option<(f64, f64)>,
    /// real counts at both bracket ends were checked against `m`
    pub bracket_checked: bool,
    /// Hermite zeros scanned, and how many of their root sets stayed uncertified
    pub scanned: usize,
    pub uncertified: usize,
    pub zero_solves: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    pub family: String,
    pub m: usize,
    pub t_crit: f64,
    /// `real_count(bracket.1) = m > real_count(bracket.0)`
    pub bracket: (f64, f64),
    pub x0: Option<f64>,
    pub method: CriticalMethod,
    pub rescaled: bool,
    pub diagnostics: Diagnostics,
}

impl CriticalResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn scale(m: usize, rescale: bool) -> f64 {
    if rescale {
        (m as f64).sqrt()
    } else {
        1.0
    }
}

/// `q_m(sqrt(m) x; sqrt(m) t)` for the Hermite family.
pub fn rescaled_hermite_q(m: usize, x: f64, t: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let s = (m as f64).sqrt();
    RecurrenceFamily::hermite().partial_sum_direct(m, s * x, s * t)
}

/// Zeros in the reported coordinates: those of `q_m(.; sqrt(m) t) / sqrt(m)`
/// when rescaled.
pub fn zeros_at(fam: &RecurrenceFamily, m: usize, t: f64, rescale: bool) -> Result<ZeroSet> {
    let s = scale(m, rescale);
    let zs = zeros_eig(fam, m, s * t)?;
    if rescale {
        let mut zs = zs.divided_by(s);
        zs.t = t;
        classify_real(zs, DEFAULT_TOL_IM)
    } else {
        Ok(zs)
    }
}

pub fn count_real(fam: &RecurrenceFamily, m: usize, t: f64, tol_im: f64, rescale: bool) -> Result<usize> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be > 0")));
    }
    Ok(classify_real(zeros_at(fam, m, t, rescale)?, tol_im)?.real_count)
}

/// 1 when rescaled, `1/m` otherwise.
pub fn default_seed(m: usize, rescale: bool) -> f64 {
    if rescale {
        1.0
    } else {
        1.0 / m.max(1) as f64
    }
}

/// Smallest `t` with all zeros real, to within `tol`, by doubling or halving
/// from `t_seed` and bisecting. The upper bracket end is reported.
pub fn t_crit_bisect(fam: &RecurrenceFamily, m: usize, t_seed: f64, tol: f64, rescale: bool) -> Result<CriticalResult> {
    if m < 2 {
        return Err(Error::DegenerateParameter(format!("m = {m}: t_crit needs m >= 2")));
    }
    if !(t_seed > 0.0 && t_seed.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_seed = {t_seed} must be > 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol} must be > 0")));
    }
    let mut diag = Diagnostics::default();
    let solves = Cell::new(0);
    let real = |t: f64| -> Result<bool> {
        solves.set(solves.get() + 1);
        Ok(count_real(fam, m, t, DEFAULT_TOL_IM, rescale)? == m)
    };
    let (mut lo, mut hi);
    if real(t_seed)? {
        hi = t_seed;
        lo = t_seed / 2.0;
        let floor = t_seed * (-40f64).exp2();
        while real(lo)? {
            hi = lo;
            lo /= 2.0;
            if lo < floor {
                return Err(Error::NoLowerBracket { floor });
            }
        }
    } else {
        lo = t_seed;
        hi = 2.0 * t_seed;
        let cap = t_seed * 40f64.exp2();
        while !real(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > cap {
                return Err(Error::NoUpperBracket { cap });
            }
        }
    }

    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let flags = grid[1..SCAN_POINTS - 1]
        .par_iter()
        .map(|&t| Ok(count_real(fam, m, t, DEFAULT_TOL_IM, rescale)? == m))
        .collect::<Result<Vec<bool>>>()?;
    solves.set(solves.get() + flags.len());
    let flags: Vec<bool> = std::iter::once(false).chain(flags).chain(std::iter::once(true)).collect();
    let mut last = 0;
    for i in 0..SCAN_POINTS - 1 {
        if flags[i] != flags[i + 1] {
            diag.flips.push(0.5 * (grid[i] + grid[i + 1]));
            if !flags[i] {
                last = i;
            }
        }
    }
    diag.non_monotone = diag.flips.len() > 1;
    lo = grid[last];
    hi = grid[last + 1];

    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if real(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    diag.bracket_checked = true;

    let zs = zeros_at(fam, m, hi, rescale)?;
    solves.set(solves.get() + 1);
    let xs = zs.real_zeros();
    let mid = xs
        .windows(2)
        .min_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])))
        .map(|w| 0.5 * (w[0] + w[1]));
    let mut x0 = mid;
    if let Some(xm) = mid {
        if let Some((x, t)) = refine_double_zero(fam, m, xm, hi, rescale) {
            let near = (t - hi).abs() <= 1e-6_f64.max(100.0 * tol) && (x - xm).abs() <= 1e-3 * xm.abs().max(1.0);
            if near {
                diag.double_zero = Some((x, t));
                x0 = Some(x);
            }
        }
    }
    diag.zero_solves = solves.get();
    Ok(CriticalResult {
        family: fam.label(),
        m,
        t_crit: hi,
        bracket: (lo, hi),
        x0,
        method: CriticalMethod::Bisect,
        rescaled: rescale,
        diagnostics: diag,
    })
}

/// Newton's method on `q_m = d/dx q_m = 0` in `(x, t)`, from `(x, t)` in the
/// reported coordinates.
pub fn refine_double_zero(fam: &RecurrenceFamily, m: usize, x: f64, t: f64, rescale: bool) -> Option<(f64, f64)> {
    let s = scale(m, rescale);
    let (mut x, mut t) = (x * s, t * s);
    for _ in 0..40 {
        let j = MpSum::new(fam, m, t).ok()?.jet(x);
        // [qx qt; qxx qxt] (dx, dt) = (q, qx)
        let det = j.qx * j.qxt - j.qt * j.qxx;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (j.q * j.qxt - j.qt * j.qx) / det;
        let dt = (j.qx * j.qx - j.qxx * j.q) / det;
        x -= dx;
        t -= dt;
        if !(t > 0.0) || !x.is_finite() {
            return None;
        }
        if dx.abs() <= 1e-15 * x.abs().max(1.0) && dt.abs() <= 1e-15 * t {
            return Some((x / s, t / s));
        }
    }
    None
}

/// `H_n(x) / n!` for `n < m`: the coefficients in `t` of `q_{m-1}(x; t)`.
pub fn hermite_t_poly(x: f64, m: usize) -> MpPoly {
    let two_x = f256::from(2.0 * x);
    let mut u = vec![f256::from(1.0)];
    if m >= 2 {
        u.push(two_x);
    }
    for n in 1..m.saturating_sub(1) {
        let next = (two_x * u[n] - f256::from(2.0) * u[n - 1]) / f256::from((n + 1) as f64);
        u.push(next);
    }
    MpPoly::new(u)
}

/// Largest positive `t` with a double zero of the rescaled Hermite sum.
///
/// A double zero of `q_m(.; T)` sits at a zero `X` of `H_m`, and since
/// `q_m = q_{m-1} + T^m H_m / m!` and `d/dx q_m = 2T q_{m-1}`, it occurs exactly
/// at the positive real roots `T` of `q_{m-1}(X; .)`.
pub fn t_crit_hermite_double_zero(m: usize) -> Result<CriticalResult> {
    if m < 2 {
        return Err(Error::DegenerateParameter(format!("m = {m}: t_crit needs m >= 2")));
    }
    let fam = RecurrenceFamily::hermite();
    let s = (m as f64).sqrt();
    let xs = fam.p_zeros(m)?;
    let per_zero = xs
        .par_iter()
        .map(|&x| {
            let roots = poly_roots_certified(&hermite_t_poly(x, m), DEFAULT_SEED);
            let mut best: Option<f64> = None;
            for z in &roots.roots {
                let real = if roots.certified { z.im == 0.0 } else { is_real(*z, DEFAULT_TOL_IM) };
                if !real || z.re <= 0.0 {
                    continue;
                }
                let e = MpSum::new(&fam, m, z.re)?.eval(num_complex::Complex64::new(x, 0.0));
                let q = (e.value.re / e.abs_sum).abs();
                if q > f256::from(1e-8) {
                    continue;
                }
                best = Some(best.map_or(z.re, |b: f64| b.max(z.re)));
            }
            Ok((x, best, roots.certified))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut diag = Diagnostics {
        scanned: xs.len(),
        uncertified: per_zero.iter().filter(|p| !p.2).count(),
        ..Default::default()
    };
    let (x, big_t) = per_zero
        .iter()
        .filter_map(|&(x, t, _)| t.map(|t| (x, t)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::NoDoubleZeroFound(m))?;
    let (x0, t_crit) = (x / s, big_t / s);
    diag.double_zero = Some((x0, t_crit));
    let width = 1e-9 * t_crit;
    let (lo, hi) = (t_crit - width, t_crit + width);
    diag.bracket_checked =
        count_real(&fam, m, hi, DEFAULT_TOL_IM, true)? == m && count_real(&fam, m, lo, DEFAULT_TOL_IM, true)? < m;
    diag.zero_solves = 2;
    Ok(CriticalResult {
        family: fam.label(),
        m,
        t_crit,
        bracket: (lo, hi),
        x0: Some(x0),
        method: CriticalMethod::HermiteDoubleZero,
        rescaled: true,
        diagnostics: diag,
    })
}

/// Residuals of the double-zero conditions at a reported collision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    /// collision point in the reported coordinates
    pub x0: f64,
    pub t: f64,
    /// `|q_m| / sum |w_n|`
    pub q_scaled: f64,
    /// `|q_m'| / sum |w_n'|`
    pub qx_scaled: f64,
    /// `|r_m + s_m|` over its scale
    pub rs_relative: f64,
    /// Hermite only: `|H_m(X) / H_m'(X)| / max(1, |X|)` at `X = sqrt(m) x0`
    pub hermite_ratio: Option<f64>,
    /// distance from `x0` to the nearest zero of `p_m`, same coordinates
    pub min_dist_family_zero: f64,
    pub violations: Vec<String>,
}

impl CollisionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn collision_report(fam: &RecurrenceFamily, r: &CriticalResult) -> Result<CollisionReport> {
    let x0 = r
        .x0
        .ok_or_else(|| Error::InvalidParameter("result carries no collision abscissa".into()))?;
    let m = r.m;
    let s = scale(m, r.rescaled);
    let (x, t) = (x0 * s, r.t_crit * s);
    let j = MpSum::new(fam, m, t)?.jet(x);
    let q_scaled = j.q.abs();
    let qx_scaled = if j.qx_scale > 0.0 { j.qx.abs() / j.qx_scale } else { j.qx.abs() };
    let rs_relative = double_zero_criterion_scaled(fam, m, x, t)?.relative();
    let hermite_ratio = if fam.is_hermite() {
        let h = fam.eval_p_ext(m, x)?;
        let dh = fam.eval_p_ext(m - 1, x)?.scale_f64(2.0 * m as f64);
        Some(h.abs().ratio(dh.abs()) / x.abs().max(1.0))
    } else {
        None
    };
    let min_dist_family_zero = fam
        .p_zeros(m)?
        .iter()
        .map(|z| (z / s - x0).abs())
        .fold(f64::INFINITY, f64::min);
    let mut violations = vec![];
    let mut check = |name: &str, v: f64, bound: f64| {
        if !(v <= bound) {
            violations.push(format!("{name} = {v:e} exceeds {bound:e}"));
        }
    };
    check("scaled |q_m|", q_scaled, 1e-7);
    check("scaled |q_m'|", qx_scaled, 1e-5);
    check("relative |r_m + s_m|", rs_relative, 1e-5);
    if let Some(h) = hermite_ratio {
        check("|H_m / H_m'|", h, 1e-6);
    }
    Ok(CollisionReport {
        x0,
        t: r.t_crit,
        q_scaled,
        qx_scaled,
        rs_relative,
        hermite_ratio,
        min_dist_family_zero,
        violations,
    })
}

/// [`collision_report`], failing if any bound is violated.
pub fn collision_verify(fam: &RecurrenceFamily, r: &CriticalResult) -> Result<CollisionReport> {
    let rep = collision_report(fam, r)?;
    if rep.passed() {
        Ok(rep)
    } else {
        Err(Error::VerificationFailed(rep.violations.join("; ")))
    }
}

/// Samples where the single-threshold picture fails.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// `t > t_crit` with a non-real zero
    pub above: Vec<f64>,
    /// `t < t_crit` with all zeros real
    pub below: Vec<f64>,
}

impl ProbeReport {
    pub fn consistent(&self) -> bool {
        self.above.is_empty() && self.below.is_empty()
    }
}

/// Realness on 32 geometric samples in `(t_crit + tol, 4 t_crit)` and 32 in
/// `(0.05 t_crit, t_crit - tol)`.
pub fn monotone_probe(fam: &RecurrenceFamily, r: &CriticalResult, tol: f64) -> Result<ProbeReport> {
    let geo = |a: f64, b: f64| -> Vec<f64> {
        (0..PROBE_POINTS)
            .map(|k| a * (b / a).powf(k as f64 / (PROBE_POINTS - 1) as f64))
            .collect()
    };
    let tc = r.t_crit;
    let above = geo(tc + 2.0 * tol, 4.0 * tc);
    let below = geo(0.05 * tc, tc - 2.0 * tol);
    let count = |t: &f64| count_real(fam, r.m, *t, DEFAULT_TOL_IM, r.rescaled).map(|c| (*t, c == r.m));
    let up = above.par_iter().map(count).collect::<Result<Vec<_>>>()?;
    let down = below.par_iter().map(count).collect::<Result<Vec<_>>>()?;
    Ok(ProbeReport {
        above: up.into_iter().filter(|p| !p.1).map(|p| p.0).collect(),
        below: down.into_iter().filter(|p| p.1).map(|p| p.0).collect(),
    })
}

/// `m,x0,t_crit` rows.
pub fn table_csv(rows: &[CriticalResult]) -> String {
    let mut out = String::from("m,x0,t_crit\n");
    for r in rows {
        let x0 = r.x0.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", r.m, x0, fmt_f64(r.t_crit));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescaled_examples() {
        let h = RecurrenceFamily::hermite();
        for t in [0.3, 1.7] {
            assert_eq!(rescaled_hermite_q(4, 0.0, t).unwrap(), h.partial_sum_direct(4, 0.0, 2.0 * t).unwrap());
        }
        assert_eq!(rescaled_hermite_q(9, 1.0, 1.0).unwrap(), h.partial_sum_direct(9, 3.0, 3.0).unwrap());
        let direct = zeros_eig(&h, 7, 0.9 * 7f64.sqrt()).unwrap();
        let scaled = zeros_at(&h, 7, 0.9, true).unwrap();
        for (a, b) in direct.zeros.iter().zip(&scaled.zeros) {
            assert!((a / 7f64.sqrt() - b).norm() < 1e-15);
        }
    }

    #[test]
    fn count_real_examples() {
        let h = RecurrenceFamily::hermite();
        assert_eq!(count_real(&h, 10, 6.0, DEFAULT_TOL_IM, true).unwrap(), 10);
        assert!(count_real(&h, 10, 0.1, DEFAULT_TOL_IM, true).unwrap() < 10);
        for fam in [h, RecurrenceFamily::charlier(3.0).unwrap(), RecurrenceFamily::lommel(3.0).unwrap()] {
            for t in [0.01, 1.0, 30.0] {
                assert_eq!(count_real(&fam, 1, t, DEFAULT_TOL_IM, false).unwrap(), 1);
            }
        }
    }

    #[test]
    fn hermite_t_poly_is_q_minus_one() {
        let h = RecurrenceFamily::hermite();
        let p = hermite_t_poly(0.7, 6);
        assert_eq!(p.degree(), 5);
        let coeffs = p.to_f64();
        let at = |t: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
        for t in [0.2, 1.1] {
            let want = h.partial_sum_direct(5, 0.7, t).unwrap();
            assert!((at(t) - want).abs() < 1e-13 * want.abs().max(1.0));
        }
    }

    #[test]
    fn small_m_methods_agree() {
        let h = RecurrenceFamily::hermite();
        for m in [2, 3, 6] {
            let b = t_crit_bisect(&h, m, 1.0, 1e-11, true).unwrap();
            let d = t_crit_hermite_double_zero(m).unwrap();
            assert!((b.t_crit - d.t_crit).abs() < 1e-9, "m={m}: {} vs {}", b.t_crit, d.t_crit);
            assert!((b.x0.unwrap() - d.x0.unwrap()).abs() < 1e-7, "m={m}");
            assert!(d.diagnostics.bracket_checked);
            collision_verify(&h, &b).unwrap();
            collision_verify(&h, &d).unwrap();
        }
    }

    #[test]
    fn q2_threshold_in_closed_form() {
        // q_2(x; t) = 2t^2 x^2 + 2t x + 1 - t^2 has discriminant 4t^2 (2t^2 - 1)
        let h = RecurrenceFamily::hermite();
        let r = t_crit_bisect(&h, 2, 0.1, 1e-12, false).unwrap();
        assert!((r.t_crit - 0.5f64.sqrt()).abs() < 2e-12, "{r:?}");
        // the double root -1/(2t) at t = 1/sqrt 2
        assert!((r.x0.unwrap() + 0.5f64.sqrt()).abs() < 1e-9, "{r:?}");
        assert!(r.bracket.1 - r.bracket.0 <= 1e-12);
        assert!(!r.diagnostics.non_monotone);
    }

    #[test]
    fn degenerate_inputs() {
        let h = RecurrenceFamily::hermite();
        assert_eq!(t_crit_bisect(&h, 1, 1.0, 1e-10, true).unwrap_err().kind(), "degenerate-parameter");
        assert_eq!(t_crit_bisect(&h, 4, -1.0, 1e-10, true).unwrap_err().kind(), "invalid-parameter");
        assert_eq!(t_crit_hermite_double_zero(1).unwrap_err().kind(), "degenerate-parameter");
    }

    #[test]
    fn json_round_trip() {
        let r = t_crit_hermite_double_zero(4).unwrap();
        assert_eq!(CriticalResult::from_json(&r.to_json().unwrap()).unwrap(), r);
        let csv = table_csv(std::slice::from_ref(&r));
        assert!(csv.starts_with("m,x0,t_crit\n4,"));
    }
}
