//! Zeros of `x -> q_m(x; t)`: eigenvalues of `P_{m-1}(t)` and, as an
//! independent route, simultaneous Aberth-Ehrlich iteration.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{require_nonzero_t, Error, Result};
use crate::ext::ExtFloat;
use crate::family::RecurrenceFamily;
use crate::linalg::{
    balance, greedy_assignment, hessenberg_eigenvalues, hessenberg_eigenvalues_in, optimal_assignment, DenseMatrix, Real,
};
use crate::mp::{MpPoly, MpSum};
use crate::poly::PolynomialCoeffs;

pub const DEFAULT_TOL_IM: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 0x5eed;
const PAIR_TOL: f64 = 1e-6;
const CERT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroMethod {
    Eigen,
    Aberth,
}

impl ZeroMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ZeroMethod::Eigen => "eigen",
            ZeroMethod::Aberth => "aberth",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSet {
    pub m: usize,
    pub t: f64,
    /// sorted by real part, then imaginary part
    pub zeros: Vec<Complex64>,
    pub real_count: usize,
    pub method: ZeroMethod,
    /// `|q_m(z) / q_m'(z)| / max(1, |z|)` per zero
    pub residuals: Vec<f64>,
    pub tol_im: f64,
    /// false when an iteration cap was hit or the zeros could not be
    /// separated by inclusion disks
    pub converged: bool,
}

impl ZeroSet {
    pub fn is_real_at(&self, i: usize) -> bool {
        is_real(self.zeros[i], self.tol_im)
    }

    /// Real parts of the zeros classified real, ascending.
    pub fn real_zeros(&self) -> Vec<f64> {
        (0..self.zeros.len())
            .filter(|&i| self.is_real_at(i))
            .map(|i| self.zeros[i].re)
            .collect()
    }

    pub fn all_real(&self) -> bool {
        self.real_count == self.m
    }

    pub fn max_modulus(&self) -> f64 {
        self.zeros.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &r| a.max(r))
    }

    /// Scales every zero by `1/s`; residuals are kept as computed.
    pub fn divided_by(mut self, s: f64) -> ZeroSet {
        for z in &mut self.zeros {
            *z /= s;
        }
        self
    }

    /// One row per zero: `m,t,index,re,im,is_real,residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,t,index,re,im,is_real,residual\n");
        for (i, z) in self.zeros.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                self.m,
                fmt_f64(self.t),
                i,
                fmt_f64(z.re),
                fmt_f64(z.im),
                self.is_real_at(i),
                fmt_f64(self.residuals[i])
            );
        }
        out
    }

    pub fn to_doc(&self) -> ZeroSetDoc {
        ZeroSetDoc {
            family: None,
            seed: None,
            m: self.m,
            t: self.t,
            method: self.method,
            real_count: self.real_count,
            tol_im: self.tol_im,
            converged: self.converged,
            zeros: self
                .zeros
                .iter()
                .enumerate()
                .map(|(i, z)| ZeroDoc {
                    index: i,
                    re: z.re,
                    im: z.im,
                    is_real: self.is_real_at(i),
                    residual: self.residuals[i],
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &ZeroSetDoc) -> ZeroSet {
        ZeroSet {
            m: doc.m,
            t: doc.t,
            zeros: doc.zeros.iter().map(|z| Complex64::new(z.re, z.im)).collect(),
            real_count: doc.real_count,
            method: doc.method,
            residuals: doc.zeros.iter().map(|z| z.residual).collect(),
            tol_im: doc.tol_im,
            converged: doc.converged,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<ZeroSet> {
        Ok(ZeroSet::from_doc(&serde_json::from_str(s)?))
    }

    /// Parses the output of [`ZeroSet::to_csv`].
    pub fn from_csv(s: &str, method: ZeroMethod, tol_im: f64) -> Result<ZeroSet> {
        let bad = |line: &str| Error::InvalidParameter(format!("malformed zero row `{line}`"));
        let mut m = 0;
        let mut t = f64::NAN;
        let mut zeros = vec![];
        let mut residuals = vec![];
        for line in s.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad(line));
            }
            let num = |k: usize| f[k].trim().parse::<f64>().map_err(|_| bad(line));
            m = f[0].trim().parse().map_err(|_| bad(line))?;
            t = num(1)?;
            zeros.push(Complex64::new(num(3)?, num(4)?));
            residuals.push(num(6)?);
        }
        let real_count = zeros.iter().filter(|z| is_real(**z, tol_im)).count();
        Ok(ZeroSet {
            m,
            t,
            zeros,
            real_count,
            method,
            residuals,
            tol_im,
            converged: true,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroDoc {
    pub index: usize,
    pub re: f64,
    pub im: f64,
    pub is_real: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Aberth start perturbation seed, when that method produced the zeros
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub m: usize,
    pub t: f64,
    pub method: ZeroMethod,
    pub real_count: usize,
    pub tol_im: f64,
    pub converged: bool,
    pub zeros: Vec<ZeroDoc>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn is_real(z: Complex64, tol_im: f64) -> bool {
    z.im.abs() <= tol_im * z.re.abs().max(1.0)
}

fn sort_zeros(z: &mut [Complex64]) {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// `|q/q'| / max(1, |z|)` evaluated without overflow.
pub fn scaled_residual(fam: &RecurrenceFamily, m: usize, t: f64, z: Complex64) -> Result<f64> {
    let (ev, _) = fam.partial_sum_eval_scaled(m, z, t)?;
    if ev.value == Complex64::new(0.0, 0.0) {
        return Ok(0.0);
    }
    Ok((ev.value / ev.derivative).norm() / z.norm().max(1.0))
}

fn newton_polish(fam: &RecurrenceFamily, m: usize, t: f64, z: Complex64, steps: usize) -> Result<(Complex64, f64)> {
    let mut best = z;
    let mut best_res = scaled_residual(fam, m, t, z)?;
    let mut cur = z;
    for _ in 0..steps {
        if best_res == 0.0 {
            break;
        }
        let (ev, _) = fam.partial_sum_eval_scaled(m, cur, t)?;
        let step = ev.value / ev.derivative;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        cur -= step;
        let res = scaled_residual(fam, m, t, cur)?;
        if res < best_res {
            best = cur;
            best_res = res;
        } else {
            break;
        }
    }
    Ok((best, best_res))
}

/// `P_{m-1}(t)` after the diagonal similarity that makes its tridiagonal part
/// symmetric, assembled in log space so the dense last row cannot overflow.
///
/// When the zeros are large the matrix is further conjugated by
/// `diag(sigma^i)` and divided by `sigma`; the eigenvalues of the returned
/// matrix times the returned `sigma` are the zeros.
pub fn scaled_companion(fam: &RecurrenceFamily, m: usize, t: f64) -> Result<(DenseMatrix, f64)> {
    require_nonzero_t(t)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let n = m - 1;
    fam.require(n + 1)?;
    // ld[i] = ln d_i with (d_i / d_{i-1})^2 = t^2 c_i / a_{i-1}
    let mut ld = vec![0.0f64; n + 1];
    for i in 1..=n {
        ld[i] = ld[i - 1] + 0.5 * (t * t * fam.c(i) / fam.a(i - 1)).ln();
    }
    // ln |alpha_j| and its sign, relative to alpha_0 = 1
    let mut la = vec![0.0f64; n + 2];
    let mut sa = vec![1.0f64; n + 2];
    for j in 1..=n + 1 {
        let r = fam.alpha_ratio(j);
        la[j] = la[j - 1] + r.abs().ln();
        sa[j] = sa[j - 1] * r.signum();
    }
    let an_t = fam.a(n) / t;
    let row: Vec<f64> = (0..=n)
        .map(|j| la[j] - la[n + 1] + an_t.abs().ln() + ld[j] - ld[n])
        .collect();
    // root-size bound from the dense row, in the spirit of Fujiwara's
    let ls = if row.iter().any(|&l| l > 300.0) {
        row.iter()
            .enumerate()
            .map(|(j, &l)| l / (n + 1 - j) as f64)
            .fold(0.0f64, f64::max)
    } else {
        0.0
    };
    let sc = |i: usize, j: usize| ((j as f64 - i as f64 - 1.0) * ls).exp();
    let mut a = DenseMatrix::zeros(n + 1);
    for i in 0..n {
        a.set(i, i, fam.b(i) * sc(i, i));
        a.set(i, i + 1, fam.a(i) / t * (ld[i + 1] - ld[i]).exp());
        if i >= 1 {
            a.set(i, i - 1, t * fam.c(i) * (ld[i - 1] - ld[i] - 2.0 * ls).exp());
        }
    }
    for j in 0..=n {
        let sign = -sa[j] * sa[n + 1] * an_t.signum();
        let mut v = sign * (row[j] + (j as f64 - n as f64 - 1.0) * ls).exp();
        if j + 1 == n {
            v += t * fam.c(n) * (ld[n - 1] - ld[n] - 2.0 * ls).exp();
        }
        if j == n {
            v += fam.b(n) * sc(n, n);
        }
        a.set(n, j, v);
    }
    Ok((a, ls.exp()))
}

/// Zeros of `q_m(.; t)` as eigenvalues of `P_{m-1}(t)`.
///
/// Eigenvalues are Newton-polished and accepted once their inclusion disks
/// are small and disjoint. Failing that, polishing is redone with 237-bit
/// evaluation, and as a last resort the eigenvalues themselves are recomputed
/// in 237-bit arithmetic.
pub fn zeros_eig(fam: &RecurrenceFamily, m: usize, t: f64) -> Result<ZeroSet> {
    let (c, sigma) = scaled_companion(fam, m, t)?;
    let first = if c.to_rows().iter().flatten().all(|v| v.is_finite()) {
        let mut h = c.transpose();
        balance(&mut h);
        match hessenberg_eigenvalues(h) {
            Ok(z) => Some(z),
            Err(Error::QrNoConvergence { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    if let Some(raw) = first {
        let z = raw
            .into_iter()
            .map(|z| newton_polish(fam, m, t, z * sigma, 3).map(|p| p.0))
            .collect::<Result<Vec<_>>>()?;
        let inc = inclusion_f64(fam, m, t, &z)?;
        if inc.certified {
            return finish(fam, m, t, z, &inc, None, ZeroMethod::Eigen, true);
        }
        let mp = MpSum::new(fam, m, t)?;
        let z: Vec<_> = z.into_iter().map(|z| mp.polish(z, 8).0).collect();
        let inc = inclusion_mp(&mp, &z);
        if inc.certified {
            return finish(fam, m, t, z, &inc, Some(&mp), ZeroMethod::Eigen, true);
        }
    }
    let mp = MpSum::new(fam, m, t)?;
    let mut h = mp.companion_transpose()?;
    balance(&mut h);
    let z: Vec<_> = hessenberg_eigenvalues_in(h)?
        .into_iter()
        .map(|z| mp.polish(Complex64::new(z.re.to_f64(), z.im.to_f64()), 4).0)
        .collect();
    let inc = inclusion_mp(&mp, &z);
    let ok = inc.certified;
    finish(fam, m, t, z, &inc, Some(&mp), ZeroMethod::Eigen, ok)
}

/// Disks `|x - z_i| <= radii[i]`, each known to contain a zero of `q_m`.
struct Inclusion {
    radii: Vec<f64>,
    /// all radii below `CERT_TOL max(1, |z_i|)` and the disks pairwise
    /// disjoint, so each holds exactly one zero
    certified: bool,
}

fn inclusion_from(z: &[Complex64], radii: Vec<f64>) -> Inclusion {
    let small = z
        .iter()
        .zip(&radii)
        .all(|(z, r)| r.is_finite() && *r <= CERT_TOL * z.norm().max(1.0));
    let disjoint = small
        && (0..z.len()).all(|i| ((i + 1)..z.len()).all(|j| (z[i] - z[j]).norm() > radii[i] + radii[j]));
    Inclusion {
        radii,
        certified: disjoint,
    }
}

/// Radius `m |q/q'|`, widened by the rounding noise of the double evaluation.
fn inclusion_f64(fam: &RecurrenceFamily, m: usize, t: f64, z: &[Complex64]) -> Result<Inclusion> {
    let noise = 8.0 * m as f64 * f64::EPSILON;
    let mut radii = Vec::with_capacity(z.len());
    for &zi in z {
        let (ev, _) = fam.partial_sum_eval_scaled(m, zi, t)?;
        let dn = ev.derivative.norm();
        radii.push(m as f64 * (ev.value.norm() + noise * ev.value_scale) / dn);
    }
    Ok(inclusion_from(z, radii))
}

fn inclusion_mp(mp: &MpSum, z: &[Complex64]) -> Inclusion {
    let m = mp.degree() as f64;
    let radii = z
        .iter()
        .map(|&zi| mp.newton_step(zi).map_or(f64::INFINITY, |s| m * s.norm() * (1.0 + 1e-12)))
        .collect();
    inclusion_from(z, radii)
}

/// Sorts, makes certified zeros exactly conjugate-symmetric, computes
/// residuals and classifies.
#[allow(clippy::too_many_arguments)]
fn finish(
    fam: &RecurrenceFamily,
    m: usize,
    t: f64,
    mut zeros: Vec<Complex64>,
    inc: &Inclusion,
    mp: Option<&MpSum>,
    method: ZeroMethod,
    converged: bool,
) -> Result<ZeroSet> {
    if inc.certified {
        // a disk meeting the real axis is its own mirror image, so the one
        // zero inside it is real
        for (z, &r) in zeros.iter_mut().zip(&inc.radii) {
            if z.im.abs() <= r {
                z.im = 0.0;
            }
        }
    }
    zeros = conjugate_symmetrize(zeros, DEFAULT_TOL_IM);
    sort_zeros(&mut zeros);
    let residuals = match mp {
        Some(mp) => zeros.iter().map(|&z| mp.residual(z)).collect(),
        None => zeros
            .iter()
            .map(|&z| scaled_residual(fam, m, t, z))
            .collect::<Result<Vec<_>>>()?,
    };
    let zs = ZeroSet {
        m,
        t,
        zeros,
        real_count: 0,
        method,
        residuals,
        tol_im: DEFAULT_TOL_IM,
        converged,
    };
    classify_real(zs, DEFAULT_TOL_IM)
}

/// Marks zeros real by `|Im z| <= tol_im max(1, |Re z|)` and checks that the
/// remaining ones pair up into conjugates.
pub fn classify_real(mut zs: ZeroSet, tol_im: f64) -> Result<ZeroSet> {
    if !(tol_im > 0.0) {
        return Err(Error::InvalidParameter(format!("tol_im = {tol_im} must be > 0")));
    }
    let mut upper = vec![];
    let mut lower = vec![];
    let mut real_count = 0;
    for (i, z) in zs.zeros.iter().enumerate() {
        if is_real(*z, tol_im) {
            real_count += 1;
        } else if z.im > 0.0 {
            upper.push(i);
        } else {
            lower.push(i);
        }
    }
    let mut taken = vec![false; lower.len()];
    for &u in &upper {
        let zu = zs.zeros[u];
        let best = lower
            .iter()
            .enumerate()
            .filter(|(k, _)| !taken[*k])
            .map(|(k, &l)| (k, (zs.zeros[l].conj() - zu).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((k, d)) if d <= PAIR_TOL * zu.norm().max(1.0) => taken[k] = true,
            _ => {
                return Err(Error::ClassificationInconsistency(format!(
                    "zero {zu} has no conjugate partner"
                )))
            }
        }
    }
    if taken.iter().any(|t| !t) {
        let l = lower[taken.iter().position(|t| !t).unwrap()];
        return Err(Error::ClassificationInconsistency(format!(
            "zero {} has no conjugate partner",
            zs.zeros[l]
        )));
    }
    zs.real_count = real_count;
    zs.tol_im = tol_im;
    Ok(zs)
}

/// Outcome of a simultaneous iteration.
#[derive(Clone, Debug)]
pub struct AberthOutcome {
    pub roots: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Initial guesses from the upper convex hull of `(k, ln|c_k|)`: each hull
/// edge of width `w` contributes `w` points on the circle of the matching
/// radius.
fn newton_polygon_start(log_mag: &[f64], rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let deg = log_mag.len() - 1;
    let pts: Vec<(usize, f64)> = log_mag
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(k, &v)| (k, v))
        .collect();
    let mut hull: Vec<(usize, f64)> = vec![];
    for p in pts {
        while hull.len() >= 2 {
            let (k1, y1) = hull[hull.len() - 2];
            let (k2, y2) = hull[hull.len() - 1];
            let cross = (k2 as f64 - k1 as f64) * (p.1 - y1) - (y2 - y1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let sigma: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    let mut out = Vec::with_capacity(deg);
    // vanishing low-order coefficients: roots at the origin
    let k0 = hull.first().map_or(deg, |p| p.0);
    let r0 = if hull.len() >= 2 {
        1e-3 * ((hull[0].1 - hull[1].1) / (hull[1].0 - hull[0].0) as f64).exp()
    } else {
        1e-3
    };
    for l in 0..k0 {
        out.push(Complex64::from_polar(r0, std::f64::consts::TAU * l as f64 / k0 as f64 + sigma));
    }
    for w in hull.windows(2) {
        let (k1, y1) = w[0];
        let (k2, y2) = w[1];
        let cnt = k2 - k1;
        let r = ((y1 - y2) / cnt as f64).exp();
        for l in 0..cnt {
            let jitter = (rng.random::<f64>() - 0.5) * 0.2 / cnt as f64;
            let theta = std::f64::consts::TAU * (l as f64 / cnt as f64 + k2 as f64 / deg as f64) + sigma + jitter;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

/// One Aberth evaluation: the Newton correction `p/p'`, and whether `p(z)`
/// is already at its rounding-noise floor.
pub type AberthEval = (Complex64, bool);

/// Aberth-Ehrlich iteration in Gauss-Seidel order from Newton-polygon
/// starting points. A root is frozen once `eval` reports the noise floor or
/// its update drops below `1e-13 (1 + |z|)`.
pub fn aberth<F>(eval: F, log_mag: &[f64], seed: u64, max_iter: usize) -> AberthOutcome
where
    F: Fn(Complex64) -> AberthEval,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = newton_polygon_start(log_mag, &mut rng);
    aberth_from(eval, start, &mut rng, max_iter)
}

fn aberth_from<F>(eval: F, mut z: Vec<Complex64>, rng: &mut ChaCha8Rng, max_iter: usize) -> AberthOutcome
where
    F: Fn(Complex64) -> AberthEval,
{
    let deg = z.len();
    let mut done = vec![false; deg];
    let mut iterations = 0;
    while iterations < max_iter && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..deg {
            if done[i] {
                continue;
            }
            let (ratio, at_floor) = eval(z[i]);
            if at_floor {
                done[i] = true;
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    s += 1.0 / (z[i] - zj);
                }
            }
            let mut w = ratio / (1.0 - ratio * s);
            if !w.re.is_finite() || !w.im.is_finite() {
                w = Complex64::from_polar(1e-8 * z[i].norm().max(1.0), rng.random::<f64>() * 6.3);
            }
            z[i] -= w;
            if w.norm() < 1e-13 * (1.0 + z[i].norm()) {
                done[i] = true;
            }
        }
    }
    AberthOutcome {
        converged: done.iter().all(|d| *d),
        roots: z,
        iterations,
    }
}

/// Correction and noise test from `(p, p', s)`, `s` bounding the rounding
/// noise of `p` up to a factor `deg * eps`.
fn f64_step(p: Complex64, dp: Complex64, scale: f64, deg: usize) -> AberthEval {
    (p / dp, p.norm() <= 4.0 * deg as f64 * f64::EPSILON * scale)
}

/// Roots of a coefficient polynomial by Aberth iteration with Horner evaluation.
pub fn poly_roots_aberth(p: &PolynomialCoeffs, seed: u64) -> AberthOutcome {
    if p.degree() == 0 {
        return AberthOutcome {
            roots: vec![],
            converged: true,
            iterations: 0,
        };
    }
    let log_mag: Vec<f64> = p.coeffs().iter().map(|c| c.abs().ln()).collect();
    let deg = p.degree();
    aberth(
        |z| {
            let (v, d, s) = p.eval_with_derivative(z);
            f64_step(v, d, s, deg)
        },
        &log_mag,
        seed,
        500,
    )
}

/// Roots with inclusion radii; see [`poly_roots_certified`].
#[derive(Clone, Debug)]
pub struct CertifiedRoots {
    pub roots: Vec<Complex64>,
    pub radii: Vec<f64>,
    /// disks small and pairwise disjoint
    pub certified: bool,
}

/// Roots of a polynomial with 237-bit coefficients: double-precision Aberth,
/// then Aberth again from those roots with 237-bit evaluation. Roots whose
/// certified disk meets the real axis are returned real.
pub fn poly_roots_certified(p: &MpPoly, seed: u64) -> CertifiedRoots {
    let deg = p.degree();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = poly_roots_aberth(&PolynomialCoeffs::new(p.to_f64()), seed);
    let start = if first.roots.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        first.roots
    } else {
        let log_mag: Vec<f64> = p.to_f64().iter().map(|c| c.abs().ln()).collect();
        newton_polygon_start(&log_mag, &mut rng)
    };
    let out = aberth_from(
        |z| (p.newton_step(z).unwrap_or(Complex64::new(f64::NAN, 0.0)), false),
        start,
        &mut rng,
        500,
    );
    let mut roots = out.roots;
    let radii = roots
        .iter()
        .map(|&z| p.newton_step(z).map_or(f64::INFINITY, |s| deg as f64 * s.norm() * (1.0 + 1e-12)))
        .collect();
    let inc = inclusion_from(&roots, radii);
    if inc.certified {
        for (z, &r) in roots.iter_mut().zip(&inc.radii) {
            if z.im.abs() <= r {
                z.im = 0.0;
            }
        }
    }
    CertifiedRoots {
        roots,
        radii: inc.radii,
        certified: inc.certified && out.converged,
    }
}

/// `ln |coefficient of x^k in q_m(x; t)|`, accumulated in extended range.
pub fn log_coeff_magnitudes(fam: &RecurrenceFamily, m: usize, t: f64) -> Result<Vec<f64>> {
    fam.require(m)?;
    let mut prev: Vec<ExtFloat> = vec![];
    let mut cur = vec![ExtFloat::ONE];
    let mut total = vec![ExtFloat::ZERO; m + 1];
    total[0] = ExtFloat::ONE;
    for n in 0..m {
        let lead = t * fam.alpha_ratio(n + 1) / fam.a(n);
        let mut next = vec![ExtFloat::ZERO; n + 2];
        for (k, &c) in cur.iter().enumerate() {
            next[k + 1] = next[k + 1] + c;
            next[k] = next[k] - c.scale_f64(fam.b(n));
        }
        if n >= 1 {
            let kk = fam.c(n) * t * fam.alpha_ratio(n);
            for (k, &c) in prev.iter().enumerate() {
                next[k] = next[k] - c.scale_f64(kk);
            }
        }
        for v in &mut next {
            *v = v.scale_f64(lead);
        }
        for (k, &v) in next.iter().enumerate() {
            total[k] = total[k] + v;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(total.iter().map(|c| c.ln_abs()).collect())
}

/// Zeros of `q_m(.; t)` by Aberth iteration; `q_m` and `q_m'` come from the
/// three-term recurrence rather than from monomial coefficients. Escalates
/// to 237-bit evaluation when the double-precision result cannot be
/// certified, as in [`zeros_eig`].
pub fn zeros_aberth(fam: &RecurrenceFamily, m: usize, t: f64) -> Result<ZeroSet> {
    zeros_aberth_seeded(fam, m, t, DEFAULT_SEED)
}

pub fn zeros_aberth_seeded(fam: &RecurrenceFamily, m: usize, t: f64, seed: u64) -> Result<ZeroSet> {
    require_nonzero_t(t)?;
    if m == 0 {
        return Err(Error::InvalidParameter("m must be >= 1".into()));
    }
    let log_mag = log_coeff_magnitudes(fam, m, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = newton_polygon_start(&log_mag, &mut rng);
    let out = aberth_from(
        |z| match fam.partial_sum_eval_scaled(m, z, t) {
            Ok((ev, _)) => f64_step(ev.value, ev.derivative, ev.value_scale, m),
            Err(_) => (Complex64::new(f64::NAN, 0.0), false),
        },
        start.clone(),
        &mut rng,
        500,
    );
    let inc = inclusion_f64(fam, m, t, &out.roots)?;
    if inc.certified && out.converged {
        return finish(fam, m, t, out.roots, &inc, None, ZeroMethod::Aberth, true);
    }
    let mp = MpSum::new(fam, m, t)?;
    let restart = if out.roots.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        out.roots
    } else {
        start
    };
    let out = aberth_from(
        |z| (mp.newton_step(z).unwrap_or(Complex64::new(f64::NAN, 0.0)), false),
        restart,
        &mut rng,
        500,
    );
    let inc = inclusion_mp(&mp, &out.roots);
    let ok = inc.certified && out.converged;
    finish(fam, m, t, out.roots, &inc, Some(&mp), ZeroMethod::Aberth, ok)
}

/// Averages each non-real root with the conjugate of its partner, pairing
/// upper and lower half-plane roots by optimal assignment. Pairs further
/// apart than the pairing tolerance are left alone.
fn conjugate_symmetrize(mut z: Vec<Complex64>, tol_im: f64) -> Vec<Complex64> {
    let upper: Vec<usize> = (0..z.len()).filter(|&i| !is_real(z[i], tol_im) && z[i].im > 0.0).collect();
    let lower: Vec<usize> = (0..z.len()).filter(|&i| !is_real(z[i], tol_im) && z[i].im < 0.0).collect();
    if upper.is_empty() || upper.len() != lower.len() {
        return z;
    }
    let cost: Vec<Vec<f64>> = upper
        .iter()
        .map(|&u| lower.iter().map(|&l| (z[l].conj() - z[u]).norm()).collect())
        .collect();
    for (k, j) in optimal_assignment(&cost).into_iter().enumerate() {
        let (u, l) = (upper[k], lower[j]);
        if cost[k][j] <= PAIR_TOL * z[u].norm().max(1.0) {
            let avg = 0.5 * (z[u] + z[l].conj());
            z[u] = avg;
            z[l] = avg.conj();
        }
    }
    z
}

/// True iff `outer_1 < inner_1 < outer_2 < ... < inner_n < outer_{n+1}`.
pub fn check_interlacing(inner: &[f64], outer: &[f64]) -> Result<bool> {
    if outer.len() != inner.len() + 1 {
        return Err(Error::LengthMismatch {
            expected: inner.len() + 1,
            got: outer.len(),
        });
    }
    Ok(inner
        .iter()
        .enumerate()
        .all(|(i, &x)| outer[i] < x && x < outer[i + 1]))
}

/// Whether every zero lies in the family's support hull widened by `slack`.
pub fn hull_check(fam: &RecurrenceFamily, zs: &ZeroSet, slack: f64) -> Result<bool> {
    let hull = fam
        .support_hull()
        .ok_or_else(|| Error::NoHullDeclared(fam.label()))?;
    if !zs.all_real() {
        return Err(Error::InvalidParameter(format!(
            "hull check needs all-real zeros, got {} of {}",
            zs.real_count, zs.m
        )));
    }
    Ok(zs.zeros.iter().all(|z| hull.contains(z.re, slack)))
}

/// Largest pair distance of the optimal assignment between two multisets of
/// equal size (greedy above 200 points).
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let assign = if a.len() > 200 {
        greedy_assignment(&cost)
    } else {
        optimal_assignment(&cost)
    };
    Ok(assign
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, &j)| acc.max(cost[i][j])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eig_examples() {
        let h = RecurrenceFamily::hermite();
        let z = zeros_eig(&h, 2, 1.0).unwrap();
        assert!((z.zeros[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(z.zeros[1].norm() < 1e-14);
        assert_eq!(z.real_count, 2);
        let z = zeros_eig(&h, 1, 2.0).unwrap();
        assert!((z.zeros[0] - c(-0.25, 0.0)).norm() < 1e-15);
        let ch = RecurrenceFamily::charlier(3.0).unwrap();
        let z = zeros_eig(&ch, 1, 2.0).unwrap();
        assert!((z.zeros[0] - c(4.5, 0.0)).norm() < 1e-14);
        assert_eq!(zeros_eig(&h, 3, 0.0).unwrap_err().kind(), "degenerate-parameter");
    }

    #[test]
    fn aberth_examples() {
        let h = RecurrenceFamily::hermite();
        let z = zeros_aberth(&h, 2, 1.0).unwrap();
        assert!((z.zeros[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(z.zeros[1].norm() < 1e-12);
        let z = zeros_aberth(&h, 3, 50.0).unwrap();
        assert_eq!(z.real_count, 3);
        for (got, want) in z.zeros.iter().zip([-1.5f64.sqrt(), 0.0, 1.5f64.sqrt()]) {
            assert!((got.re - want).abs() < 1e-3 * 30.0, "{got}");
        }
        for fam in [h.clone(), RecurrenceFamily::charlier(3.0).unwrap(), RecurrenceFamily::lommel(2.0).unwrap()] {
            for t in [0.3, -2.0] {
                let want = fam.b(0) - fam.a(0) / (fam.alpha(1) * t);
                let z = zeros_aberth(&fam, 1, t).unwrap();
                assert!((z.zeros[0] - c(want, 0.0)).norm() <= 1e-13 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn large_t_hermite_near_h3() {
        // q_3(x; t) / t^3 -> alpha_3 H_3(x) as t grows
        let z = zeros_eig(&RecurrenceFamily::hermite(), 3, 50.0).unwrap();
        for (got, want) in z.zeros.iter().zip([-1.5f64.sqrt(), 0.0, 1.5f64.sqrt()]) {
            assert!((got.re - want).abs() < 0.05, "{got}");
        }
    }

    #[test]
    fn classify_examples() {
        let mk = |zeros: Vec<Complex64>| ZeroSet {
            m: zeros.len(),
            t: 1.0,
            residuals: vec![0.0; zeros.len()],
            zeros,
            real_count: 0,
            method: ZeroMethod::Eigen,
            tol_im: DEFAULT_TOL_IM,
            converged: true,
        };
        let z = classify_real(mk(vec![c(1.0, 1e-15), c(2.0, 0.0)]), 1e-9).unwrap();
        assert_eq!(z.real_count, 2);
        let z = classify_real(mk(vec![c(1.0, -1.0), c(1.0, 1.0)]), 1e-9).unwrap();
        assert_eq!(z.real_count, 0);
        let e = classify_real(mk(vec![c(1.0, 1e-4)]), 1e-9).unwrap_err();
        assert_eq!(e.kind(), "classification-inconsistency");
    }

    #[test]
    fn interlacing_examples() {
        assert!(check_interlacing(&[0.0], &[-1.0, 1.0]).unwrap());
        assert!(check_interlacing(&[-1.0, 1.0], &[-2.0, 0.0, 2.0]).unwrap());
        assert!(!check_interlacing(&[0.0, 1.0], &[0.5, 2.0, 3.0]).unwrap());
        assert_eq!(
            check_interlacing(&[0.0], &[1.0]).unwrap_err().kind(),
            "length-mismatch"
        );
    }

    #[test]
    fn hull_examples() {
        let ch = RecurrenceFamily::charlier(3.0).unwrap();
        let z = zeros_eig(&ch, 10, 20.0).unwrap();
        assert!(z.all_real());
        assert!(hull_check(&ch, &z, 1e-6).unwrap());
        let mut fake = z.clone();
        fake.zeros[0] = c(-0.5, 0.0);
        assert!(!hull_check(&ch, &fake, 1e-6).unwrap());
        let h = RecurrenceFamily::hermite();
        assert!(hull_check(&h, &zeros_eig(&h, 5, 20.0).unwrap(), 0.0).unwrap());
        let l = RecurrenceFamily::lommel(2.0).unwrap();
        let zl = zeros_eig(&l, 3, 20.0).unwrap();
        assert_eq!(hull_check(&l, &zl, 0.0).unwrap_err().kind(), "no-hull-declared");
    }

    #[test]
    fn conjugate_pairs_are_exact_for_eig() {
        let z = zeros_eig(&RecurrenceFamily::hermite(), 9, 0.05).unwrap();
        assert!(z.real_count < 9);
        for w in &z.zeros {
            assert!(z.zeros.iter().any(|v| *v == w.conj()));
        }
    }

    #[test]
    fn methods_agree_small() {
        for fam in [RecurrenceFamily::hermite(), RecurrenceFamily::charlier(3.0).unwrap(), RecurrenceFamily::lommel(3.0).unwrap()] {
            for m in [2, 5, 17, 40] {
                for t in [0.05, 0.5, 5.0, 50.0] {
                    let e = zeros_eig(&fam, m, t).unwrap();
                    let a = zeros_aberth(&fam, m, t).unwrap();
                    let d = matching_distance(&e.zeros, &a.zeros).unwrap();
                    assert!(d <= 1e-6 * (1.0 + e.max_modulus()), "{} m={m} t={t}: {d:e}", fam.name());
                }
            }
        }
    }

    #[test]
    fn serialization_round_trip() {
        let z = zeros_eig(&RecurrenceFamily::hermite(), 7, 0.3).unwrap();
        let back = ZeroSet::from_json(&z.to_json().unwrap()).unwrap();
        assert_eq!(back, z);
        let back = ZeroSet::from_csv(&z.to_csv(), ZeroMethod::Eigen, DEFAULT_TOL_IM).unwrap();
        assert_eq!(back, z);
    }

    #[test]
    fn horner_aberth_on_known_poly() {
        // (x - 1)(x + 2)(x^2 + 1)
        let p = PolynomialCoeffs::new(vec![-2.0, 1.0, -1.0, 1.0, 1.0]);
        let out = poly_roots_aberth(&p, 7);
        assert!(out.converged);
        let mut r = out.roots;
        sort_zeros(&mut r);
        let want = [c(-2.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).norm() < 1e-12, "{r:?}");
        }
    }
}
