//! Orthogonal polynomial families given by a three-term recurrence
//! `x p_n = a_n p_{n+1} + b_n p_n + c_n p_{n-1}`, `p_{-1} = 0`, `p_0 = 1`,
//! together with a normalisation `alpha_n` for the partial sums
//! `q_m(x; t) = sum_{n <= m} t^n alpha_n p_n(x)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{require_nonzero_t, Error, Result};
use crate::ext::{frexp, ExtFloat};
use crate::linalg::symmetric_tridiagonal_eigenvalues;
use crate::poly::PolynomialCoeffs;
use crate::scalar::{CompensatedSum, Scalar};

/// Closed real interval; either end may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hull {
    pub lo: f64,
    pub hi: f64,
}

impl Hull {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lo - slack && x <= self.hi + slack
    }
}

/// Coefficient tables for a user-supplied family. `c[0]` is ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyKind {
    Hermite,
    Charlier { a: f64 },
    Lommel { nu: f64 },
    Custom { name: String, table: Tabulated },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceFamily {
    kind: FamilyKind,
    hull: Option<Hull>,
}

/// Family identifier plus named parameters, as given on the command line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl FamilySpec {
    pub fn new(name: &str) -> Self {
        FamilySpec {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Constructs one of the built-in families.
pub fn make_family(spec: &FamilySpec) -> Result<RecurrenceFamily> {
    let param = |key: &str, default: Option<f64>| -> Result<f64> {
        match spec.params.get(key).copied().or(default) {
            Some(v) if v.is_finite() => Ok(v),
            Some(v) => Err(Error::InvalidParameter(format!("{key} = {v} is not finite"))),
            None => Err(Error::InvalidParameter(format!(
                "family `{}` requires parameter `{key}`",
                spec.name
            ))),
        }
    };
    match spec.name.to_ascii_lowercase().as_str() {
        "hermite" => Ok(RecurrenceFamily::hermite()),
        "charlier" => RecurrenceFamily::charlier(param("a", None)?),
        "lommel" => RecurrenceFamily::lommel(param("nu", None)?),
        other => Err(Error::InvalidParameter(format!(
            "unknown family `{other}` (expected hermite, charlier, lommel or a JSON custom family)"
        ))),
    }
}

impl RecurrenceFamily {
    pub fn hermite() -> Self {
        RecurrenceFamily {
            kind: FamilyKind::Hermite,
            hull: Some(Hull {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            }),
        }
    }

    pub fn charlier(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Charlier parameter must satisfy a > 0 (got a = {a})"
            )));
        }
        Ok(RecurrenceFamily {
            kind: FamilyKind::Charlier { a },
            hull: Some(Hull {
                lo: 0.0,
                hi: f64::INFINITY,
            }),
        })
    }

    pub fn lommel(nu: f64) -> Result<Self> {
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lommel parameter must satisfy nu > 0 (got nu = {nu})"
            )));
        }
        Ok(RecurrenceFamily {
            kind: FamilyKind::Lommel { nu },
            hull: None,
        })
    }

    /// A family from coefficient tables. Invariants are checked lazily, up to
    /// the largest index an operation touches.
    pub fn custom(name: &str, table: Tabulated, hull: Option<Hull>) -> Result<Self> {
        if table.alpha.first() != Some(&1.0) {
            return Err(Error::InvariantViolated {
                family: name.to_string(),
                constraint: "alpha_0 = 1",
                index: 0,
            });
        }
        if table.a.is_empty() || table.b.is_empty() || table.c.is_empty() || table.alpha.len() < 2 {
            return Err(Error::InvalidParameter(
                "custom family tables need at least a_0, b_0, c_0 and alpha_0, alpha_1".into(),
            ));
        }
        let all = table
            .a
            .iter()
            .chain(&table.b)
            .chain(&table.c)
            .chain(&table.alpha)
            .all(|v| v.is_finite());
        if !all {
            return Err(Error::InvalidParameter("custom family tables must be finite".into()));
        }
        Ok(RecurrenceFamily {
            kind: FamilyKind::Custom {
                name: name.to_string(),
                table,
            },
            hull,
        })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            FamilyKind::Hermite => "hermite",
            FamilyKind::Charlier { .. } => "charlier",
            FamilyKind::Lommel { .. } => "lommel",
            FamilyKind::Custom { name, .. } => name,
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut p = BTreeMap::new();
        match self.kind {
            FamilyKind::Charlier { a } => {
                p.insert("a".to_string(), a);
            }
            FamilyKind::Lommel { nu } => {
                p.insert("nu".to_string(), nu);
            }
            _ => {}
        }
        p
    }

    /// Short label such as `charlier(a=3)`.
    pub fn label(&self) -> String {
        let params = self.params();
        if params.is_empty() {
            return self.name().to_string();
        }
        let inner: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name(), inner.join(","))
    }

    pub fn support_hull(&self) -> Option<Hull> {
        self.hull
    }

    pub fn is_hermite(&self) -> bool {
        matches!(self.kind, FamilyKind::Hermite)
    }

    // -- coefficients. Callers must have passed `require` for the index. --

    pub fn a(&self, n: usize) -> f64 {
        match &self.kind {
            FamilyKind::Hermite => 0.5,
            FamilyKind::Charlier { a } => -a,
            FamilyKind::Lommel { nu } => 0.5 / (n as f64 + nu),
            FamilyKind::Custom { table, .. } => table.a[n],
        }
    }

    pub fn b(&self, n: usize) -> f64 {
        match &self.kind {
            FamilyKind::Hermite | FamilyKind::Lommel { .. } => 0.0,
            FamilyKind::Charlier { a } => n as f64 + a,
            FamilyKind::Custom { table, .. } => table.b[n],
        }
    }

    /// `c_n`; zero at `n = 0` where it never multiplies anything.
    pub fn c(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match &self.kind {
            FamilyKind::Hermite => n as f64,
            FamilyKind::Charlier { .. } => -(n as f64),
            FamilyKind::Lommel { nu } => 0.5 / (n as f64 + nu),
            FamilyKind::Custom { table, .. } => table.c[n],
        }
    }

    /// `alpha_n / alpha_{n-1}` for `n >= 1`.
    pub fn alpha_ratio(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        match &self.kind {
            FamilyKind::Hermite | FamilyKind::Charlier { .. } => 1.0 / n as f64,
            FamilyKind::Lommel { .. } => 1.0,
            FamilyKind::Custom { table, .. } => table.alpha[n] / table.alpha[n - 1],
        }
    }

    /// `alpha_n` as a plain float; underflows for factorial normalisations
    /// beyond n ~ 170, see [`Self::alpha_ext`].
    pub fn alpha(&self, n: usize) -> f64 {
        match &self.kind {
            FamilyKind::Custom { table, .. } => table.alpha[n],
            _ => (1..=n).fold(1.0, |acc, k| acc * self.alpha_ratio(k)),
        }
    }

    pub fn alpha_ext(&self, n: usize) -> ExtFloat {
        match &self.kind {
            FamilyKind::Custom { table, .. } => ExtFloat::new(table.alpha[n]),
            _ => (1..=n).fold(ExtFloat::ONE, |acc, k| acc.scale_f64(self.alpha_ratio(k))),
        }
    }

    /// Largest `n` for which `a_k, b_k, c_k` (k <= n) and `alpha_k` (k <= n+1)
    /// are available. `None` means unbounded.
    pub fn max_index(&self) -> Option<usize> {
        match &self.kind {
            FamilyKind::Custom { table, .. } => {
                let coeff = table.a.len().min(table.b.len()).min(table.c.len()) - 1;
                Some(coeff.min(table.alpha.len() - 2))
            }
            _ => None,
        }
    }

    /// Checks that coefficients up to index `n` exist and satisfy the standing
    /// assumptions (`a_k != 0`, `alpha_k != 0`, `a_{k-1} c_k > 0`).
    pub fn require(&self, n: usize) -> Result<()> {
        let FamilyKind::Custom { name, table } = &self.kind else {
            return Ok(());
        };
        let max = self.max_index().unwrap();
        if n > max {
            return Err(Error::IndexOutOfRange {
                family: name.clone(),
                index: n,
                max,
            });
        }
        let fail = |constraint, index| Error::InvariantViolated {
            family: name.clone(),
            constraint,
            index,
        };
        for k in 0..=n {
            if table.a[k] == 0.0 {
                return Err(fail("a_n != 0", k));
            }
            if k >= 1 && !(table.a[k - 1] * table.c[k] > 0.0) {
                return Err(fail("a_{n-1} c_n > 0", k));
            }
        }
        for k in 0..=n + 1 {
            if table.alpha[k] == 0.0 {
                return Err(fail("alpha_n != 0", k));
            }
        }
        Ok(())
    }

    // -- evaluation --

    /// `p^{(shift)}_0(x), ..., p^{(shift)}_n(x)` in exponent-scaled form.
    pub fn p_sequence_ext(&self, shift: usize, n: usize, x: f64) -> Result<Vec<ExtFloat>> {
        self.require(n + shift)?;
        let mut out = Vec::with_capacity(n + 1);
        let mut prev = 0.0f64;
        let mut cur = 1.0f64;
        let mut exp = 0i64;
        out.push(ExtFloat::ONE);
        for k in 0..n {
            let j = k + shift;
            let next = ((x - self.b(j)) * cur - self.c(j) * prev) / self.a(j);
            prev = cur;
            cur = next;
            let (_, e) = frexp(cur);
            if cur != 0.0 && !(-512..=512).contains(&e) {
                let s = crate::ext::ldexp(1.0, -e);
                cur *= s;
                prev *= s;
                exp += e;
            }
            out.push(ExtFloat::from_parts(cur, exp));
        }
        Ok(out)
    }

    pub fn eval_p_ext(&self, n: usize, x: f64) -> Result<ExtFloat> {
        Ok(*self.p_sequence_ext(0, n, x)?.last().unwrap())
    }

    /// `p_n(x)` by forward recurrence. Overflow shows up as a non-finite value;
    /// use [`Self::eval_p_ext`] for the scaled representation.
    pub fn eval_p(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.eval_p_ext(n, x)?.to_f64())
    }

    /// The `k`-th associated polynomial `p^{(k)}_n(x)`.
    pub fn eval_p_assoc(&self, k: usize, n: usize, x: f64) -> Result<f64> {
        Ok(self.p_sequence_ext(k, n, x)?.last().unwrap().to_f64())
    }

    /// Zeros of `p_n`, as eigenvalues of the symmetrised Jacobi matrix.
    pub fn p_zeros(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Ok(vec![]);
        }
        self.require(n)?;
        let diag: Vec<f64> = (0..n).map(|k| self.b(k)).collect();
        let off: Vec<f64> = (1..n).map(|k| (self.a(k - 1) * self.c(k)).sqrt()).collect();
        symmetric_tridiagonal_eigenvalues(&diag, &off)
    }

    /// Summands `t^n alpha_n p_n(x)` for `n = 0..=m`, generated jointly so the
    /// normalisation and the polynomial never overflow separately.
    pub fn summands<T: Scalar>(&self, m: usize, x: T, t: f64) -> Result<Vec<T>> {
        self.require(m)?;
        let mut w = Vec::with_capacity(m + 1);
        w.push(T::one());
        for n in 0..m {
            let lead = t * self.alpha_ratio(n + 1) / self.a(n);
            let mut next = (x - T::real(self.b(n))) * w[n];
            if n >= 1 {
                next = next - w[n - 1] * (self.c(n) * t * self.alpha_ratio(n));
            }
            w.push(next * lead);
        }
        Ok(w)
    }

    /// `q_m(x; t)` as the literal compensated sum of its summands.
    pub fn partial_sum_direct<T: Scalar>(&self, m: usize, x: T, t: f64) -> Result<T> {
        let mut acc = CompensatedSum::new();
        for w in self.summands(m, x, t)? {
            acc.add(w);
        }
        Ok(acc.value())
    }

    /// Value, x-derivative and the sums of moduli of both, for residual scaling.
    pub fn partial_sum_eval<T: Scalar>(&self, m: usize, x: T, t: f64) -> Result<SumEval<T>> {
        let (ev, e) = self.partial_sum_eval_scaled(m, x, t)?;
        if e == 0 {
            return Ok(ev);
        }
        let s = crate::ext::ldexp(1.0, e);
        Ok(SumEval {
            value: ev.value * s,
            derivative: ev.derivative * s,
            value_scale: ev.value_scale * s,
            derivative_scale: ev.derivative_scale * s,
        })
    }

    /// As [`Self::partial_sum_eval`], but every field is to be multiplied by
    /// `2^e`; the summands are rescaled on the fly so nothing overflows.
    pub fn partial_sum_eval_scaled<T: Scalar>(
        &self,
        m: usize,
        x: T,
        t: f64,
    ) -> Result<(SumEval<T>, i64)> {
        self.require(m)?;
        let mut w_prev = T::zero();
        let mut w = T::one();
        let mut d_prev = T::zero();
        let mut d = T::zero();
        let mut val = CompensatedSum::new();
        let mut der = CompensatedSum::new();
        let mut exp = 0i64;
        val.add(w);
        for n in 0..m {
            let lead = t * self.alpha_ratio(n + 1) / self.a(n);
            let xb = x - T::real(self.b(n));
            let mut next = xb * w;
            let mut dnext = w + xb * d;
            if n >= 1 {
                let k = self.c(n) * t * self.alpha_ratio(n);
                next = next - w_prev * k;
                dnext = dnext - d_prev * k;
            }
            w_prev = w;
            d_prev = d;
            w = next * lead;
            d = dnext * lead;
            let big = w.modulus().max(d.modulus());
            if big > 1e150 {
                let (_, e) = frexp(big);
                let s = crate::ext::ldexp(1.0, -e);
                w = w * s;
                d = d * s;
                w_prev = w_prev * s;
                d_prev = d_prev * s;
                val.scale(s);
                der.scale(s);
                exp += e;
            }
            val.add(w);
            der.add(d);
        }
        Ok((
            SumEval {
                value: val.value(),
                derivative: der.value(),
                value_scale: val.abs_sum(),
                derivative_scale: der.abs_sum(),
            },
            exp,
        ))
    }

    /// `q_m(x; t)` through the four-term recursion in `m`.
    pub fn partial_sum_recurrence<T: Scalar>(&self, m: usize, x: T, t: f64) -> Result<T> {
        require_nonzero_t(t)?;
        Ok(*self.partial_sum_recurrence_sequence(m, x, t)?.last().unwrap())
    }

    /// `q_0, ..., q_m` from the four-term recursion.
    pub fn partial_sum_recurrence_sequence<T: Scalar>(
        &self,
        m: usize,
        x: T,
        t: f64,
    ) -> Result<Vec<T>> {
        require_nonzero_t(t)?;
        self.require(m)?;
        let mut q: Vec<T> = Vec::with_capacity(m + 1);
        q.push(T::one());
        for k in 0..m {
            let r1 = self.alpha_ratio(k + 1);
            let ak = self.a(k);
            let xb = x - T::real(self.b(k));
            // q_{k+1} = [1 + t r_{k+1}(x-b_k)/a_k] q_k
            //           - (t r_{k+1}/a_k) [t c_k r_k + (x - b_k)] q_{k-1}
            //           + (t^2 c_k r_{k+1} r_k / a_k) q_{k-2}
            let mut next = q[k] * (T::one() + xb * (t * r1 / ak));
            if k >= 1 {
                let rk = self.alpha_ratio(k);
                let ck = self.c(k);
                next = next - q[k - 1] * (xb + T::real(t * ck * rk)) * (t * r1 / ak);
                if k >= 2 {
                    next = next + q[k - 2] * (t * t * ck * r1 * rk / ak);
                }
            }
            q.push(next);
        }
        Ok(q)
    }

    /// Monomial coefficients of `p_n`.
    pub fn coeffs_p(&self, n: usize) -> Result<PolynomialCoeffs> {
        self.require(n)?;
        let mut prev: Vec<f64> = vec![];
        let mut cur = vec![1.0];
        for k in 0..n {
            let mut next = vec![0.0; cur.len() + 1];
            for (i, &c) in cur.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= self.b(k) * c;
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i] -= self.c(k) * c;
            }
            let inv = 1.0 / self.a(k);
            next.iter_mut().for_each(|v| *v *= inv);
            prev = cur;
            cur = next;
        }
        Ok(PolynomialCoeffs::new(cur))
    }

    /// Monomial coefficients of `x -> q_m(x; t)`.
    pub fn coeffs_q(&self, m: usize, t: f64) -> Result<PolynomialCoeffs> {
        self.require(m)?;
        let mut acc = vec![CompensatedSum::new(); m + 1];
        let mut prev: Vec<f64> = vec![];
        let mut cur = vec![1.0];
        acc[0].add(1.0);
        for n in 0..m {
            let lead = t * self.alpha_ratio(n + 1) / self.a(n);
            let mut next = vec![0.0; cur.len() + 1];
            for (i, &c) in cur.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= self.b(n) * c;
            }
            if n >= 1 {
                let k = self.c(n) * t * self.alpha_ratio(n);
                for (i, &c) in prev.iter().enumerate() {
                    next[i] -= k * c;
                }
            }
            next.iter_mut().for_each(|v| *v *= lead);
            for (i, &c) in next.iter().enumerate() {
                acc[i].add(c);
            }
            prev = cur;
            cur = next;
        }
        Ok(PolynomialCoeffs::new(acc.iter().map(|s| s.value()).collect()))
    }

    /// `t^m alpha_m prod_{k<m} a_k^{-1}`, the leading coefficient of `q_m`.
    pub fn leading_coeff_q(&self, m: usize, t: f64) -> Result<ExtFloat> {
        self.require(m)?;
        let mut lc = ExtFloat::ONE;
        for k in 0..m {
            lc = lc.scale_f64(t * self.alpha_ratio(k + 1) / self.a(k));
        }
        Ok(lc)
    }

    /// `|sum_{m<=M} q_m(x;t) y^m - f(x; t y)/(1 - y)|` for a closed-form
    /// generating function `f(x; s) = sum alpha_n p_n(x) s^n` converging for
    /// `|s| < radius`.
    pub fn genfun_residual(
        &self,
        closed_form: impl Fn(f64, f64) -> f64,
        radius: f64,
        x: f64,
        t: f64,
        y: f64,
        terms: usize,
    ) -> Result<f64> {
        if y.abs() >= 1.0 {
            return Err(Error::DivergentParameters(format!("|y| = {} >= 1", y.abs())));
        }
        if (t * y).abs() >= radius {
            return Err(Error::DivergentParameters(format!(
                "|t y| = {} outside the convergence radius {radius}",
                (t * y).abs()
            )));
        }
        let w = self.summands(terms, x, t)?;
        let mut q = CompensatedSum::new();
        let mut series = CompensatedSum::new();
        let mut ym = 1.0;
        for wm in w {
            q.add(wm);
            series.add(q.value::<f64>() * ym);
            ym *= y;
        }
        let closed = closed_form(x, t * y) / (1.0 - y);
        Ok((series.value::<f64>() - closed).abs())
    }

    /// The classical generating function `f(x; s)` with its radius, if known.
    pub fn generating_function(&self) -> Option<(Box<dyn Fn(f64, f64) -> f64 + Send + Sync>, f64)> {
        match self.kind {
            FamilyKind::Hermite => Some((Box::new(|x, s| (-s * (s - 2.0 * x)).exp()), f64::INFINITY)),
            FamilyKind::Charlier { a } => Some((
                Box::new(move |x, s| s.exp() * (1.0 - s / a).powf(x)),
                a,
            )),
            _ => None,
        }
    }

    pub fn to_doc(&self, max_validated_index: Option<usize>) -> Result<FamilyDoc> {
        if let Some(n) = max_validated_index {
            self.require(n)?;
        }
        let (table, name) = match &self.kind {
            FamilyKind::Custom { name, table } => (Some(table.clone()), name.clone()),
            _ => (None, self.name().to_string()),
        };
        Ok(FamilyDoc {
            name,
            params: self.params(),
            max_validated_index,
            table,
            support_hull: self.hull.map(|h| [finite(h.lo), finite(h.hi)]),
        })
    }

    pub fn from_doc(doc: &FamilyDoc) -> Result<Self> {
        let fam = match &doc.table {
            Some(table) => {
                let hull = doc.support_hull.map(|[lo, hi]| Hull {
                    lo: lo.unwrap_or(f64::NEG_INFINITY),
                    hi: hi.unwrap_or(f64::INFINITY),
                });
                RecurrenceFamily::custom(&doc.name, table.clone(), hull)?
            }
            None => make_family(&FamilySpec {
                name: doc.name.clone(),
                params: doc.params.clone(),
            })?,
        };
        if let Some(n) = doc.max_validated_index {
            fam.require(n)?;
        }
        Ok(fam)
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// JSON form of a family. Built-ins carry only `name` and `params`; custom
/// families add their coefficient tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub max_validated_index: Option<usize>,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Tabulated>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_hull: Option<[Option<f64>; 2]>,
}

#[derive(Clone, Copy, Debug)]
pub struct SumEval<T> {
    pub value: T,
    pub derivative: T,
    pub value_scale: f64,
    pub derivative_scale: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn charlier3() -> RecurrenceFamily {
        RecurrenceFamily::charlier(3.0).unwrap()
    }

    fn lommel(nu: f64) -> RecurrenceFamily {
        RecurrenceFamily::lommel(nu).unwrap()
    }

    #[test]
    fn builtin_coefficients() {
        let h = make_family(&FamilySpec::new("hermite")).unwrap();
        assert_eq!(h.a(5), 0.5);
        assert_eq!(h.c(5), 5.0);
        assert_relative_eq!(h.alpha(3), 1.0 / 6.0, max_relative = 1e-15);
        let c = make_family(&FamilySpec::new("charlier").with("a", 3.0)).unwrap();
        assert_eq!((c.b(2), c.a(2), c.c(2)), (5.0, -3.0, -2.0));
    }

    #[test]
    fn parameter_validation() {
        let err = make_family(&FamilySpec::new("lommel").with("nu", -1.0)).unwrap_err();
        assert_eq!(err.kind(), "invalid-parameter");
        assert!(err.to_string().contains("nu > 0"));
        assert!(RecurrenceFamily::charlier(0.0).is_err());
        assert!(make_family(&FamilySpec::new("charlier")).is_err());
        assert!(make_family(&FamilySpec::new("jacobi")).is_err());
    }

    #[test]
    fn eval_p_examples() {
        let h = RecurrenceFamily::hermite();
        assert_eq!(h.eval_p(0, 7.3).unwrap(), 1.0);
        assert_eq!(h.eval_p(3, 0.0).unwrap(), 0.0);
        assert_relative_eq!(charlier3().eval_p(4, 0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(lommel(1.0).eval_p(2, 1.0).unwrap(), 7.0, max_relative = 1e-14);
    }

    #[test]
    fn eval_p_assoc_examples() {
        let h = RecurrenceFamily::hermite();
        assert_eq!(h.eval_p_assoc(4, 0, 2.2).unwrap(), 1.0);
        assert_eq!(h.eval_p_assoc(2, 1, 1.0).unwrap(), 2.0);
        assert_eq!(h.eval_p_assoc(1, 1, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn large_degree_stays_scaled() {
        // H_300(3) is far outside f64 range but its scaled form is finite
        let h = RecurrenceFamily::hermite();
        let v = h.eval_p_ext(300, 3.0).unwrap();
        assert!(v.is_finite());
        assert!(v.ln_abs() > 709.0);
        assert!(!h.eval_p(300, 3.0).unwrap().is_finite());
    }

    #[test]
    fn partial_sum_examples() {
        let h = RecurrenceFamily::hermite();
        assert_eq!(h.partial_sum_direct(0, 9.0, 5.0).unwrap(), 1.0);
        assert_eq!(h.partial_sum_direct(1, 1.0, 1.0).unwrap(), 3.0);
        assert_eq!(h.partial_sum_direct(2, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(h.partial_sum_recurrence(2, 0.0, 1.0).unwrap(), 0.0);
        let d = h.partial_sum_direct(5, 0.3, 2.0).unwrap();
        let r = h.partial_sum_recurrence(5, 0.3, 2.0).unwrap();
        assert_relative_eq!(d, r, max_relative = 1e-10);
        assert_relative_eq!(charlier3().partial_sum_recurrence(1, 0.0, 2.0).unwrap(), 3.0);
    }

    #[test]
    fn recurrence_rejects_zero_t() {
        let err = RecurrenceFamily::hermite()
            .partial_sum_recurrence(3, 0.1, 0.0)
            .unwrap_err();
        assert_eq!(err.kind(), "degenerate-parameter");
    }

    #[test]
    fn complex_and_real_evaluation_agree_on_axis() {
        let h = RecurrenceFamily::hermite();
        let r = h.partial_sum_direct(12, 0.7, 1.3).unwrap();
        let c = h
            .partial_sum_direct(12, Complex64::new(0.7, 0.0), 1.3)
            .unwrap();
        assert_eq!(c.re, r);
        assert_eq!(c.im, 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = lommel(2.0);
        let x = Complex64::new(0.1, 0.05);
        let e = f.partial_sum_eval(9, x, 1.7).unwrap();
        let h = 1e-6;
        let fd = (f.partial_sum_direct(9, x + h, 1.7).unwrap()
            - f.partial_sum_direct(9, x - h, 1.7).unwrap())
            / (2.0 * h);
        assert!((fd - e.derivative).norm() <= 1e-6 * e.derivative.norm().max(1.0));
    }

    #[test]
    fn coefficient_examples() {
        let h = RecurrenceFamily::hermite();
        assert_eq!(h.coeffs_p(2).unwrap().coeffs(), &[-2.0, 0.0, 4.0]);
        assert_eq!(h.coeffs_p(0).unwrap().coeffs(), &[1.0]);
        let l = lommel(1.0).coeffs_p(2).unwrap();
        for (got, want) in l.coeffs().iter().zip([-1.0, 0.0, 8.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-14);
        }
        assert_eq!(h.coeffs_q(2, 1.0).unwrap().coeffs(), &[0.0, 2.0, 2.0]);
        assert_eq!(h.coeffs_q(1, 0.25).unwrap().coeffs(), &[1.0, 0.5]);
        assert_eq!(charlier3().coeffs_q(0, 4.0).unwrap().coeffs(), &[1.0]);
    }

    #[test]
    fn leading_coefficients() {
        for fam in [RecurrenceFamily::hermite(), charlier3(), lommel(3.0)] {
            for n in 0..25 {
                let p = fam.coeffs_p(n).unwrap();
                let want: f64 = (0..n).map(|k| 1.0 / fam.a(k)).product();
                assert_relative_eq!(p.leading(), want, max_relative = 1e-13);
                let q = fam.coeffs_q(n, 0.7).unwrap();
                let lc = fam.leading_coeff_q(n, 0.7).unwrap().to_f64();
                assert_relative_eq!(q.leading(), lc, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn genfun_residual_examples() {
        let h = RecurrenceFamily::hermite();
        let (f, r) = h.generating_function().unwrap();
        assert!(h.genfun_residual(&f, r, 0.4, 0.5, 0.3, 40).unwrap() < 1e-12);
        let c = charlier3();
        let (f, r) = c.generating_function().unwrap();
        assert!(c.genfun_residual(&f, r, 2.0, 0.4, 0.25, 40).unwrap() < 1e-10);
        assert_eq!(c.genfun_residual(&f, r, 2.0, 0.4, 0.0, 0).unwrap(), 0.0);
        let wrong = |x: f64, s: f64| s.exp() * (1.0 - s / 3.1).powf(x);
        assert!(c.genfun_residual(wrong, r, 2.0, 0.4, 0.25, 40).unwrap() > 1e-4);
        let err = h.genfun_residual(|_, _| 0.0, f64::INFINITY, 0.0, 1.0, 1.0, 5);
        assert_eq!(err.unwrap_err().kind(), "divergent-parameters");
    }

    #[test]
    fn custom_family_bounds_and_invariants() {
        // monic Chebyshev-like table with a Favard violation at n = 3
        let table = Tabulated {
            a: vec![1.0; 6],
            b: vec![0.0; 6],
            c: vec![0.0, 0.5, 0.25, -0.25, 0.25, 0.25],
            alpha: vec![1.0; 7],
        };
        let fam = RecurrenceFamily::custom("cheb", table, None).unwrap();
        assert_eq!(fam.max_index(), Some(5));
        assert!(fam.eval_p(2, 0.3).is_ok());
        assert_eq!(fam.eval_p(3, 0.3).unwrap_err().kind(), "invariant-violated");
        assert_eq!(fam.eval_p(9, 0.3).unwrap_err().kind(), "index-out-of-range");
    }

    #[test]
    fn family_doc_roundtrip() {
        let c = charlier3();
        let json = serde_json::to_string(&c.to_doc(Some(20)).unwrap()).unwrap();
        let back = RecurrenceFamily::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, c);

        let table = Tabulated {
            a: vec![1.0, 1.0, 1.0],
            b: vec![0.0, 0.1, 0.2],
            c: vec![0.0, 1.0, 2.0],
            alpha: vec![1.0, 0.5, 0.25, 0.125],
        };
        let fam = RecurrenceFamily::custom("mine", table, Some(Hull { lo: -2.0, hi: f64::INFINITY }))
            .unwrap();
        let json = serde_json::to_string(&fam.to_doc(Some(2)).unwrap()).unwrap();
        assert!(json.contains("\"alpha\""));
        let back = RecurrenceFamily::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn jacobi_zeros_are_zeros() {
        for fam in [RecurrenceFamily::hermite(), charlier3(), lommel(3.0)] {
            for z in fam.p_zeros(12).unwrap() {
                let v = fam.eval_p_ext(12, z).unwrap();
                let d = fam.coeffs_p(12).unwrap().derivative().eval(z);
                assert!((v.to_f64() / d).abs() < 1e-10 * z.abs().max(1.0), "{} {z}", fam.name());
            }
        }
    }
}
