//! Matrix forms of the four-term recursion: the banded pencil `L(t) - x t M`,
//! the almost-tridiagonal `P_N(t) = t^{-1} L_N(t) M_N^{-1}` whose eigenvalues
//! are the zeros of `q_{N+1}`, the partial inverse `B_N(x; t)` of the Jacobi
//! part, and the quantities `r_{N+1}`, `s_{N+1}` whose sum vanishes exactly at
//! zeros of higher multiplicity.

use f256::f256;

use crate::error::{require_nonzero_t, Error, Result};
use crate::ext::ExtFloat;
use crate::family::RecurrenceFamily;
use crate::linalg::{lu_determinant, lu_determinant_in, solve_dense, DenseMatrix};

/// `(N+1) x (N+1)` matrix with nonzero diagonals at offsets +1, 0, -1, -2.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedLowerHessenberg {
    /// `(i, i+1)` for `i < N`
    pub sup: Vec<f64>,
    pub diag: Vec<f64>,
    /// `(i, i-1)` for `i >= 1`, stored at `i - 1`
    pub sub1: Vec<f64>,
    /// `(i, i-2)` for `i >= 2`, stored at `i - 2`
    pub sub2: Vec<f64>,
}

impl BandedLowerHessenberg {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j == i + 1 {
            self.sup[i]
        } else if j == i {
            self.diag[i]
        } else if j + 1 == i {
            self.sub1[j]
        } else if j + 2 == i {
            self.sub2[j]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        dense_from(self.dim(), |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.sup
            .iter()
            .chain(&self.diag)
            .chain(&self.sub1)
            .chain(&self.sub2)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Lower bidiagonal `M_N`: diagonal `1/alpha_m`, subdiagonal `-1/alpha_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBidiagonal {
    pub diag: Vec<f64>,
    /// `(m, m-1)` stored at `m - 1`
    pub sub: Vec<f64>,
}

impl LowerBidiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[j]
        } else {
            0.0
        }
    }

    pub fn determinant(&self) -> ExtFloat {
        self.diag
            .iter()
            .fold(ExtFloat::ONE, |acc, &d| acc.scale_f64(d))
    }

    pub fn to_dense(&self) -> DenseMatrix {
        dense_from(self.dim(), |i, j| self.get(i, j))
    }
}

/// `P_N(t)`: tridiagonal `(t c_i, b_i, a_i / t)` except for a dense last row.
#[derive(Clone, Debug, PartialEq)]
pub struct HessenbergPlusRow {
    /// `(i, i-1)` for `1 <= i < N`, stored at `i - 1`
    pub sub: Vec<f64>,
    /// `(i, i)` for `i < N`
    pub diag: Vec<f64>,
    /// `(i, i+1)` for `i < N`
    pub sup: Vec<f64>,
    /// row `N`, all `N + 1` columns
    pub last_row: Vec<f64>,
}

impl HessenbergPlusRow {
    pub fn dim(&self) -> usize {
        self.last_row.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.dim() - 1;
        if i == n {
            return self.last_row[j];
        }
        if j == i + 1 {
            self.sup[i]
        } else if j == i {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[j]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        dense_from(self.dim(), |i, j| self.get(i, j))
    }
}

fn dense_from(n: usize, f: impl Fn(usize, usize) -> f64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i.saturating_sub(2)..n.min(i + 2) {
            m.set(i, j, f(i, j));
        }
    }
    if n > 0 {
        for j in 0..n {
            m.set(n - 1, j, f(n - 1, j));
        }
    }
    m
}

fn l_entries(fam: &RecurrenceFamily, n: usize, t: f64) -> BandedLowerHessenberg {
    let al = |k: usize| fam.alpha(k);
    let sup = (0..n).map(|m| fam.a(m) / al(m + 1)).collect();
    let diag = (0..=n)
        .map(|m| (t * al(m + 1) * fam.b(m) - fam.a(m) * al(m)) / (al(m) * al(m + 1)))
        .collect();
    let sub1 = (1..=n)
        .map(|m| t * (t * fam.c(m) * al(m) - al(m - 1) * fam.b(m)) / (al(m - 1) * al(m)))
        .collect();
    let sub2 = (2..=n).map(|m| -t * t * fam.c(m) / al(m - 1)).collect();
    BandedLowerHessenberg {
        sup,
        diag,
        sub1,
        sub2,
    }
}

/// The truncation `L_N(t)`.
pub fn build_l(fam: &RecurrenceFamily, n: usize, t: f64) -> Result<BandedLowerHessenberg> {
    require_nonzero_t(t)?;
    fam.require(n)?;
    Ok(l_entries(fam, n, t))
}

/// The truncation `M_N`.
pub fn build_m(fam: &RecurrenceFamily, n: usize) -> Result<LowerBidiagonal> {
    fam.require(n)?;
    Ok(LowerBidiagonal {
        diag: (0..=n).map(|m| 1.0 / fam.alpha(m)).collect(),
        sub: (1..=n).map(|m| -1.0 / fam.alpha(m)).collect(),
    })
}

/// The pencil `L_N(t) - x t M_N`. Defined for every real `t`, including 0.
pub fn pencil(fam: &RecurrenceFamily, n: usize, x: f64, t: f64) -> Result<BandedLowerHessenberg> {
    fam.require(n)?;
    let mut l = l_entries(fam, n, t);
    for m in 0..=n {
        l.diag[m] -= x * t / fam.alpha(m);
    }
    for m in 1..=n {
        l.sub1[m - 1] += x * t / fam.alpha(m);
    }
    Ok(l)
}

/// `P_N(t)` from its explicit entries (no inversion of `M_N`).
pub fn build_p(fam: &RecurrenceFamily, n: usize, t: f64) -> Result<HessenbergPlusRow> {
    require_nonzero_t(t)?;
    fam.require(n)?;
    let sub = (1..n).map(|i| t * fam.c(i)).collect();
    let diag = (0..n).map(|i| fam.b(i)).collect();
    let sup = (0..n).map(|i| fam.a(i) / t).collect();
    let an = fam.a(n);
    // alpha_j / alpha_{N+1} through the ratios, so factorial normalisations
    // stay finite as long as the entries themselves are
    let mut last_row = vec![0.0; n + 1];
    let mut ratio = 1.0 / fam.alpha_ratio(n + 1);
    for j in (0..=n).rev() {
        last_row[j] = -ratio * an / t;
        if j > 0 {
            ratio /= fam.alpha_ratio(j);
        }
    }
    if n >= 1 {
        last_row[n - 1] += t * fam.c(n);
    }
    last_row[n] += fam.b(n);
    Ok(HessenbergPlusRow {
        sub,
        diag,
        sup,
        last_row,
    })
}

/// `max |t P_N M_N - L_N|` over `max |L_N|`.
pub fn factorization_residual(fam: &RecurrenceFamily, n: usize, t: f64) -> Result<f64> {
    let p = build_p(fam, n, t)?;
    let m = build_m(fam, n)?;
    let l = build_l(fam, n, t)?;
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            // M is lower bidiagonal: (P M)_{ij} = P_{ij} M_{jj} + P_{i,j+1} M_{j+1,j}
            let mut v = p.get(i, j) * m.get(j, j);
            if j < n {
                v += p.get(i, j + 1) * m.get(j + 1, j);
            }
            worst = worst.max((t * v - l.get(i, j)).abs());
        }
    }
    Ok(worst / l.max_abs())
}

/// Both sides of the determinant representation of `q_{N+1}`.
#[derive(Clone, Copy, Debug)]
pub struct DetIdentity {
    pub q: f64,
    /// `(-1)^{N+1} prod_k (alpha_{k+1}/a_k) det(L_N - x t M_N)`
    pub via_pencil: ExtFloat,
    /// `(-t)^{N+1} alpha_{N+1} prod_k a_k^{-1} det(P_N - x)`
    pub via_p: ExtFloat,
}

impl DetIdentity {
    pub fn residual(&self) -> f64 {
        (ExtFloat::new(self.q) - self.via_pencil).abs().to_f64()
    }

    pub fn residual_p(&self) -> f64 {
        (ExtFloat::new(self.q) - self.via_p).abs().to_f64()
    }

    /// Worst of both residuals relative to `max(1, |q|)`.
    pub fn relative(&self) -> f64 {
        self.residual().max(self.residual_p()) / self.q.abs().max(1.0)
    }
}

pub fn det_identity(fam: &RecurrenceFamily, n: usize, x: f64, t: f64) -> Result<DetIdentity> {
    require_nonzero_t(t)?;
    let q = fam.partial_sum_direct(n + 1, x, t)?;
    let det_pencil = lu_determinant_in::<f256>(pencil(fam, n, x, t)?.to_dense());
    let mut pref = if (n + 1).is_multiple_of(2) {
        ExtFloat::ONE
    } else {
        -ExtFloat::ONE
    };
    for k in 0..=n {
        pref = pref * fam.alpha_ext(k + 1) / ExtFloat::new(fam.a(k));
    }
    let via_pencil = pref * det_pencil;

    let mut shifted = build_p(fam, n, t)?.to_dense();
    for i in 0..=n {
        shifted.set(i, i, shifted.get(i, i) - x);
    }
    let det_p = lu_determinant_in::<f256>(shifted);
    let mut pref_p = fam.alpha_ext(n + 1);
    for k in 0..=n {
        pref_p = pref_p.scale_f64(-t / fam.a(k));
    }
    Ok(DetIdentity {
        q,
        via_pencil,
        via_p: pref_p * det_p,
    })
}

/// `|q_{N+1} - (-1)^{N+1} prod (alpha_{k+1}/a_k) det(L_N(t) - x t M_N)|`.
pub fn det_identity_residual(fam: &RecurrenceFamily, n: usize, x: f64, t: f64) -> Result<f64> {
    Ok(det_identity(fam, n, x, t)?.residual())
}

/// Row residuals of `L_N q_N + (a_N/alpha_{N+1}) q_{N+1} e_N = x t M_N q_N`,
/// each relative to the sum of moduli of its terms; returns the worst row.
pub fn generalized_eigen_residual(fam: &RecurrenceFamily, n: usize, x: f64, t: f64) -> Result<f64> {
    let l = build_l(fam, n, t)?;
    let m = build_m(fam, n)?;
    let q = fam.partial_sum_recurrence_sequence(n + 1, x, t)?;
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        let mut terms: Vec<f64> = Vec::with_capacity(6);
        for j in i.saturating_sub(2)..=(i + 1).min(n) {
            terms.push(l.get(i, j) * q[j]);
        }
        for j in i.saturating_sub(1)..=i {
            terms.push(-x * t * m.get(i, j) * q[j]);
        }
        if i == n {
            terms.push(fam.a(n) / fam.alpha(n + 1) * q[n + 1]);
        }
        let sum: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|v| v.abs()).sum();
        if scale > 0.0 {
            worst = worst.max(sum.abs() / scale);
        }
    }
    Ok(worst)
}

/// `B_N(x; t)_{ij} = t^{i-j} / a_j p^{(j+1)}_{i-j-1}(x)` for `i > j`, else 0.
pub fn build_b(fam: &RecurrenceFamily, n: usize, x: f64, t: f64) -> Result<DenseMatrix> {
    require_nonzero_t(t)?;
    fam.require(n + 1)?;
    let mut b = DenseMatrix::zeros(n + 1);
    for j in 0..n {
        let assoc = fam.p_sequence_ext(j + 1, n - j - 1, x)?;
        for i in j + 1..=n {
            let v = assoc[i - j - 1].to_f64() * t.powi((i - j) as i32) / fam.a(j);
            b.set(i, j, v);
        }
    }
    Ok(b)
}

/// `max |(J_N(t) - x) B_N(x; t) - E|` where `E` is the identity on rows
/// `< N` and carries `-t^{N-j} a_N / a_j p^{(j+1)}_{N-j}(x)` on row `N`;
/// measured relative to the largest entry of `E`.
pub fn partial_inverse_residual(fam: &RecurrenceFamily, n: usize, x: f64, t: f64) -> Result<f64> {
    let b = build_b(fam, n, x, t)?;
    let jm = |i: usize, k: usize| -> f64 {
        if k == i {
            fam.b(i) - x
        } else if k == i + 1 && i < n {
            fam.a(i) / t
        } else if k + 1 == i {
            fam.c(i) * t
        } else {
            0.0
        }
    };
    let mut expected = DenseMatrix::zeros(n + 1);
    for i in 0..n {
        expected.set(i, i, 1.0);
    }
    for j in 0..n {
        let assoc = fam.eval_p_assoc(j + 1, n - j, x)?;
        expected.set(n, j, -t.powi((n - j) as i32) * fam.a(n) / fam.a(j) * assoc);
    }
    let scale = expected.max_abs().max(1.0);
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        for j in 0..=n {
            let mut v = 0.0;
            for k in i.saturating_sub(1)..=(i + 1).min(n) {
                v += jm(i, k) * b.get(k, j);
            }
            worst = worst.max((v - expected.get(i, j)).abs());
        }
    }
    Ok(worst / scale)
}

/// A sum with the largest modulus among its terms, for scaled comparisons.
#[derive(Clone, Copy, Debug)]
pub struct ScaledValue {
    pub value: ExtFloat,
    pub scale: ExtFloat,
}

impl ScaledValue {
    pub fn relative(&self) -> f64 {
        if self.scale.is_zero() {
            return self.value.abs().to_f64();
        }
        self.value.abs().ratio(self.scale)
    }
}

struct Accum {
    value: ExtFloat,
    scale: ExtFloat,
}

impl Accum {
    fn new() -> Self {
        Accum {
            value: ExtFloat::ZERO,
            scale: ExtFloat::ZERO,
        }
    }
    fn add(&mut self, v: ExtFloat) {
        self.value = self.value + v;
        self.scale = self.scale.max_abs(v);
    }
    fn finish(self) -> ScaledValue {
        ScaledValue {
            value: self.value,
            scale: self.scale,
        }
    }
}

fn t_powers(t: f64, n: usize) -> Vec<ExtFloat> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = ExtFloat::ONE;
    for _ in 0..=n {
        out.push(acc);
        acc = acc.scale_f64(t);
    }
    out
}

/// `r_{N+1}(x;t) = -t^N sum_j (a_N/a_j) p^{(j+1)}_{N-j}(x) p_j(x)`.
pub fn r_scaled(fam: &RecurrenceFamily, n_plus_1: usize, x: f64, t: f64) -> Result<ScaledValue> {
    if n_plus_1 == 0 {
        return Err(Error::InvalidParameter("r_{N+1} needs N + 1 >= 1".into()));
    }
    let n = n_plus_1 - 1;
    fam.require(n + 1)?;
    let p = fam.p_sequence_ext(0, n, x)?;
    let tn = t_powers(t, n)[n];
    let mut acc = Accum::new();
    for j in 0..=n {
        let assoc = fam.p_sequence_ext(j + 1, n - j, x)?[n - j];
        let term = -(tn * assoc * p[j]).scale_f64(fam.a(n) / fam.a(j));
        acc.add(term);
    }
    Ok(acc.finish())
}

/// `s_{N+1}(x;t)`: the last-row correction `(R_N B_N p_N)_N` contributed by
/// the dense row of `P_N`,
/// `-(a_N/alpha_{N+1}) sum_{k=1}^{N} alpha_k t^{k-1} sum_{j<k} p^{(j+1)}_{k-1-j}(x) p_j(x) / a_j`.
pub fn s_scaled(fam: &RecurrenceFamily, n_plus_1: usize, x: f64, t: f64) -> Result<ScaledValue> {
    if n_plus_1 == 0 {
        return Err(Error::InvalidParameter("s_{N+1} needs N + 1 >= 1".into()));
    }
    let n = n_plus_1 - 1;
    fam.require(n + 1)?;
    let p = fam.p_sequence_ext(0, n, x)?;
    let tp = t_powers(t, n);
    // inner[k] = sum_{j<k} p^{(j+1)}_{k-1-j} p_j / a_j, built column by column
    let mut inner: Vec<Accum> = (0..=n).map(|_| Accum::new()).collect();
    for j in 0..n {
        let assoc = fam.p_sequence_ext(j + 1, n - 1 - j, x)?;
        for k in j + 1..=n {
            inner[k].add((assoc[k - 1 - j] * p[j]).scale_f64(1.0 / fam.a(j)));
        }
    }
    let alpha_n1 = fam.alpha_ext(n + 1);
    let mut alpha_k = ExtFloat::ONE;
    let mut acc = Accum::new();
    for (k, sum) in inner.into_iter().enumerate().skip(1) {
        alpha_k = alpha_k.scale_f64(fam.alpha_ratio(k));
        let pre = (alpha_k * tp[k - 1] / alpha_n1).scale_f64(-fam.a(n));
        acc.add(pre * sum.value);
        acc.scale = acc.scale.max_abs(pre * sum.scale);
    }
    Ok(acc.finish())
}

pub fn r_value(fam: &RecurrenceFamily, n_plus_1: usize, x: f64, t: f64) -> Result<f64> {
    Ok(r_scaled(fam, n_plus_1, x, t)?.value.to_f64())
}

pub fn s_value(fam: &RecurrenceFamily, n_plus_1: usize, x: f64, t: f64) -> Result<f64> {
    Ok(s_scaled(fam, n_plus_1, x, t)?.value.to_f64())
}

/// `r_m + s_m`; at a zero of `q_m` it vanishes iff the zero is multiple.
pub fn double_zero_criterion_scaled(
    fam: &RecurrenceFamily,
    m: usize,
    x: f64,
    t: f64,
) -> Result<ScaledValue> {
    let r = r_scaled(fam, m, x, t)?;
    let s = s_scaled(fam, m, x, t)?;
    Ok(ScaledValue {
        value: r.value + s.value,
        scale: r.scale.max_abs(s.scale),
    })
}

pub fn double_zero_criterion(fam: &RecurrenceFamily, m: usize, x: f64, t: f64) -> Result<f64> {
    Ok(double_zero_criterion_scaled(fam, m, x, t)?.value.to_f64())
}

/// Relative gap between `r_{N+1} + s_{N+1}` and
/// `(a_N/alpha_{N+1}) sum_{i=1}^{N+1} (alpha_i/a_{i-1}) r_i`.
pub fn rs_identity_residual(fam: &RecurrenceFamily, n: usize, x: f64, t: f64) -> Result<f64> {
    let lhs = double_zero_criterion_scaled(fam, n + 1, x, t)?;
    let mut acc = Accum::new();
    let pre = ExtFloat::new(fam.a(n)) / fam.alpha_ext(n + 1);
    for i in 1..=n + 1 {
        let ri = r_scaled(fam, i, x, t)?;
        let w = (pre * fam.alpha_ext(i)).scale_f64(1.0 / fam.a(i - 1));
        acc.add(w * ri.value);
        acc.scale = acc.scale.max_abs(w * ri.scale);
    }
    let rhs = acc.finish();
    let scale = lhs.scale.max_abs(rhs.scale);
    Ok((lhs.value - rhs.value).abs().ratio(scale))
}

/// Recovers `p_n(x)` from the `t^n` coefficient of `D(t) = det(L_{n-1}(t) - x t M_{n-1})`,
/// which is a polynomial of degree `n` in `t`. `D` is sampled at `n + 1`
/// Chebyshev nodes on `[-R, R]` and interpolated; the radius `R` is doubled
/// from 1 until the leading term dominates the fit.
pub fn extract_pn_from_det(fam: &RecurrenceFamily, n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("extraction needs n >= 1".into()));
    }
    fam.require(n)?;
    let nodes: Vec<f64> = (0..=n)
        .map(|k| (std::f64::consts::PI * (2 * k + 1) as f64 / (2 * (n + 1)) as f64).cos())
        .collect();
    let mut vander = DenseMatrix::zeros(n + 1);
    for (i, &s) in nodes.iter().enumerate() {
        let mut v = 1.0;
        for j in 0..=n {
            vander.set(i, j, v);
            v *= s;
        }
    }
    let mut prefactor = if n.is_multiple_of(2) {
        ExtFloat::ONE
    } else {
        -ExtFloat::ONE
    };
    for k in 0..n {
        prefactor = prefactor * fam.alpha_ext(k + 1) / ExtFloat::new(fam.a(k));
    }
    prefactor = prefactor / fam.alpha_ext(n);

    let mut result = None;
    for step in 0..=20 {
        let radius = f64::powi(2.0, step);
        let dets: Vec<ExtFloat> = nodes
            .iter()
            .map(|&s| pencil(fam, n - 1, x, radius * s).map(|p| lu_determinant(p.to_dense())))
            .collect::<Result<_>>()?;
        let top = dets
            .iter()
            .fold(ExtFloat::ZERO, |m, d| m.max_abs(*d));
        if top.is_zero() {
            return Ok(0.0);
        }
        let rhs: Vec<f64> = dets.iter().map(|d| d.ratio(top)).collect();
        let (coef, residual) = solve_dense(&vander, &rhs)?;
        if residual > 1e-6 {
            return Err(Error::IllConditionedFit(residual));
        }
        let lead = coef[n];
        let biggest = coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        // coefficient of t^n = lead * top / R^n
        let tn = ExtFloat::new(lead) * top * ExtFloat::from_parts(1.0, -(step as i64) * n as i64);
        result = Some(tn);
        if lead.abs() >= 0.5 * biggest {
            break;
        }
    }
    Ok((prefactor * result.unwrap()).to_f64())
}
