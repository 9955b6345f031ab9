//! Exponential partial sums, the Szegő curve `|z e^{1-z}| = 1`, scaled zero
//! clouds and zero trajectories over a sweep in `t`.

use crate::critical::{refine_double_zero, zeros_at};
use crate::error::{Error, Result};
use crate::family::{FamilyKind, RecurrenceFamily};
use crate::linalg::{greedy_assignment, optimal_assignment, Real};
use crate::plot::Figure;
use crate::scalar::{CompensatedSum, Scalar};
use crate::zeros::{fmt_f64, is_real, DEFAULT_TOL_IM};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write;

pub const SZEGO_SAMPLES: usize = 720;
/// Extra bisection levels allowed per grid interval when pairing is unclear.
pub const MAX_REFINE: usize = 12;
/// Relative to the median inter-zero gap.
pub const COLLISION_GAP: f64 = 1e-4;

/// `S_0(t), ..., S_m(t)` with compensated accumulation.
pub fn exp_partial_sums<T: Scalar>(m: usize, t: T) -> Vec<T> {
    let mut out = Vec::with_capacity(m + 1);
    let mut acc = CompensatedSum::new();
    let mut term = T::one();
    for n in 0..=m {
        if n > 0 {
            term = term * t * (1.0 / n as f64);
        }
        acc.add(term);
        out.push(acc.value());
    }
    out
}

/// `S_m(t) = sum_{n<=m} t^n / n!`.
pub fn exp_partial_sum<T: Scalar>(m: usize, t: T) -> T {
    *exp_partial_sums(m, t).last().unwrap()
}

/// `|sum_{m<=M} S_m(t) y^m - e^{t y} / (1 - y)|`.
pub fn exp_genfun_residual(t: f64, y: f64, terms: usize) -> Result<f64> {
    if y.abs() >= 1.0 {
        return Err(Error::DivergentParameters(format!("|y| = {} >= 1", y.abs())));
    }
    let mut acc = CompensatedSum::new();
    let mut ym = 1.0;
    for s in exp_partial_sums(terms, t) {
        acc.add(s * ym);
        ym *= y;
    }
    Ok((acc.value::<f64>() - (t * y).exp() / (1.0 - y)).abs())
}

/// Hermite `q_m(x; t) = sum_k (-1)^k t^{2k} / k! S_{m-2k}(2 x t)`.
pub fn hermite_q_via_s<T: Scalar>(m: usize, x: T, t: f64) -> T {
    let s = exp_partial_sums(m, x * (2.0 * t));
    let mut acc = CompensatedSum::new();
    let mut c = 1.0;
    for k in 0..=m / 2 {
        if k > 0 {
            c *= -t * t / k as f64;
        }
        acc.add(s[m - 2 * k] * c);
    }
    acc.value()
}

/// [`hermite_q_via_s`] for real `x` in the arithmetic of `R`. The expansion
/// cancels heavily once `|x| t` is large, so 237-bit evaluation is what makes
/// it usable as a check there.
pub fn hermite_q_via_s_in<R: Real>(m: usize, x: f64, t: f64) -> R {
    let u = R::from_f64(2.0) * R::from_f64(x) * R::from_f64(t);
    let mut s = Vec::with_capacity(m + 1);
    let (mut term, mut acc) = (R::one(), R::zero());
    for n in 0..=m {
        if n > 0 {
            term = term * u / R::from_f64(n as f64);
        }
        acc = acc + term;
        s.push(acc);
    }
    let tt = R::from_f64(t) * R::from_f64(t);
    let (mut c, mut out) = (R::one(), R::zero());
    for k in 0..=m / 2 {
        if k > 0 {
            c = -(c * tt) / R::from_f64(k as f64);
        }
        out = out + c * s[m - 2 * k];
    }
    out
}

/// `log|z e^{1-z}|`: zero on the Szegő curve, negative inside the loop near
/// the origin, `-inf` at `z = 0`.
pub fn szego_residual(z: Complex64) -> f64 {
    if z == Complex64::new(0.0, 0.0) {
        return f64::NEG_INFINITY;
    }
    z.norm().ln() + 1.0 - z.re
}

/// Where the loop crosses the negative real axis, `-0.2784...`.
pub fn szego_negative_crossing() -> f64 {
    // u e^{1+u} = 1 with u = -z, increasing in u
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * (1.0 + mid).exp() < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    -0.5 * (lo + hi)
}

/// Radius of the loop at angle `theta`: the root in `(0, 1]` of
/// `ln r + 1 - r cos(theta)`.
fn loop_radius(theta: f64) -> f64 {
    let c = theta.cos();
    let f = |r: f64| r.ln() + 1.0 - r * c;
    if f(1.0) <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    for _ in 0..1100 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `samples` points of the closed Szegő loop at equally spaced angles.
pub fn szego_loop(samples: usize) -> Vec<Complex64> {
    (0..samples)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / samples as f64;
            Complex64::from_polar(loop_radius(theta), theta)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum ScalingRule {
    /// `z = 2 x t / m`
    Hermite,
    /// `z = -x t / (a m)`
    Charlier { a: f64 },
}

impl ScalingRule {
    pub fn for_family(fam: &RecurrenceFamily) -> Result<Self> {
        match fam.kind() {
            FamilyKind::Hermite => Ok(ScalingRule::Hermite),
            FamilyKind::Charlier { a } => Ok(ScalingRule::Charlier { a: *a }),
            _ => Err(Error::UnsupportedFamily(fam.label())),
        }
    }

    pub fn factor(&self, m: usize, t: f64) -> f64 {
        match *self {
            ScalingRule::Hermite => 2.0 * t / m as f64,
            ScalingRule::Charlier { a } => -t / (a * m as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledZeroCloud {
    pub family: String,
    pub m: usize,
    pub t: f64,
    pub rule: ScalingRule,
    pub points: Vec<Complex64>,
    /// `|log|z e^{1-z}||` per point
    pub residuals: Vec<f64>,
}

impl ScaledZeroCloud {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &r| a.max(r))
    }

    /// `index,re,im,residual`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re,im,residual\n");
        for (i, (z, r)) in self.points.iter().zip(&self.residuals).enumerate() {
            let _ = writeln!(out, "{i},{},{},{}", fmt_f64(z.re), fmt_f64(z.im), fmt_f64(*r));
        }
        out
    }

    pub fn to_svg(&self) -> String {
        Figure::new(&format!("{} m={} t={}", self.family, self.m, self.t))
            .points(&self.points)
            .overlay(szego_loop(SZEGO_SAMPLES))
            .render()
    }
}

/// Zeros mapped by the family's scaling rule, with their distance from the
/// Szegő curve.
pub fn scaled_cloud(fam: &RecurrenceFamily, zs: &crate::zeros::ZeroSet) -> Result<ScaledZeroCloud> {
    let rule = ScalingRule::for_family(fam)?;
    let f = rule.factor(zs.m, zs.t);
    let points: Vec<Complex64> = zs.zeros.iter().map(|z| z * f).collect();
    let residuals = points.iter().map(|&z| szego_residual(z).abs()).collect();
    Ok(ScaledZeroCloud {
        family: fam.label(),
        m: zs.m,
        t: zs.t,
        rule,
        points,
        residuals,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub t: f64,
    pub x: f64,
    /// distance between the colliding zeros at the nearest grid point
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBundle {
    pub family: String,
    pub m: usize,
    pub rescaled: bool,
    /// strictly decreasing; includes points inserted by refinement
    pub t_grid: Vec<f64>,
    /// `paths[i][k]` is zero `i` at `t_grid[k]`
    pub paths: Vec<Vec<Complex64>>,
    /// largest matching distance of each step, `t_grid.len() - 1` entries
    pub pairing_cost: Vec<f64>,
    pub collision_events: Vec<CollisionEvent>,
    /// paths whose pairing was committed with refinement exhausted
    pub ambiguous: Vec<bool>,
}

impl TrajectoryBundle {
    /// Zeros of every path at grid index `k`.
    pub fn frame(&self, k: usize) -> Vec<Complex64> {
        self.paths.iter().map(|p| p[k]).collect()
    }

    /// `t,path_id,re,im`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,path_id,re,im\n");
        for (k, t) in self.t_grid.iter().enumerate() {
            for (i, p) in self.paths.iter().enumerate() {
                let _ = writeln!(out, "{},{i},{},{}", fmt_f64(*t), fmt_f64(p[k].re), fmt_f64(p[k].im));
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_svg(&self, szego_overlay: bool) -> String {
        let title = format!(
            "{} m={} t={}..{}",
            self.family,
            self.m,
            self.t_grid[0],
            self.t_grid.last().unwrap()
        );
        let mut fig = Figure::new(&title);
        for p in &self.paths {
            fig = fig.path(p.clone());
        }
        if szego_overlay {
            fig = fig.overlay(szego_loop(SZEGO_SAMPLES));
        }
        fig.render()
    }
}

#[derive(Clone, Debug)]
struct Frame {
    t: f64,
    z: Vec<Complex64>,
}

fn min_gap(z: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            g = g.min((z[i] - z[j]).norm());
        }
    }
    g
}

fn median_gap(z: &[Complex64]) -> f64 {
    // nearest-neighbour distance of each zero
    let mut nn: Vec<f64> = (0..z.len())
        .map(|i| {
            (0..z.len())
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    if nn.is_empty() || !nn[0].is_finite() {
        return f64::INFINITY;
    }
    nn.sort_by(f64::total_cmp);
    nn[nn.len() / 2]
}

/// Reorders `next` to follow `prev`; returns the ordered points and the
/// per-path move distances.
fn pair(prev: &[Complex64], next: &[Complex64]) -> (Vec<Complex64>, Vec<f64>) {
    let cost: Vec<Vec<f64>> = prev.iter().map(|p| next.iter().map(|q| (p - q).norm()).collect()).collect();
    let assign = if prev.len() > 200 {
        greedy_assignment(&cost)
    } else {
        optimal_assignment(&cost)
    };
    let ordered = assign.iter().map(|&j| next[j]).collect();
    let moves = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    (ordered, moves)
}

struct Tracer<'a> {
    fam: &'a RecurrenceFamily,
    m: usize,
    rescale: bool,
    frames: Vec<Frame>,
    costs: Vec<f64>,
    ambiguous: Vec<bool>,
}

impl Tracer<'_> {
    fn solve(&self, t: f64) -> Result<Frame> {
        Ok(Frame {
            t,
            z: zeros_at(self.fam, self.m, t, self.rescale)?.zeros,
        })
    }

    fn advance(&mut self, target: Frame, depth: usize) -> Result<()> {
        let prev = self.frames.last().unwrap().clone();
        let (ordered, moves) = pair(&prev.z, &target.z);
        let worst = moves.iter().fold(0.0f64, |a, &b| a.max(b));
        let limit = 0.5 * min_gap(&prev.z);
        if worst > limit && depth < MAX_REFINE {
            let mid = self.solve((prev.t * target.t).sqrt())?;
            self.advance(mid, depth + 1)?;
            return self.advance(target, depth + 1);
        }
        if worst > limit {
            for (i, &d) in moves.iter().enumerate() {
                if d > limit {
                    self.ambiguous[i] = true;
                }
            }
        }
        self.costs.push(worst);
        self.frames.push(Frame { t: target.t, z: ordered });
        Ok(())
    }
}

/// Follows the zeros from `t_start` down to `t_end` over a geometric grid of
/// `steps` points, refining intervals where the pairing is unclear.
pub fn trace_trajectories(
    fam: &RecurrenceFamily,
    m: usize,
    t_start: f64,
    t_end: f64,
    steps: usize,
    rescale: bool,
) -> Result<TrajectoryBundle> {
    if m == 0 {
        return Err(Error::DegenerateParameter("m must be >= 1".into()));
    }
    if !(t_end > 0.0 && t_start > t_end && t_start.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need t_start > t_end > 0, got {t_start} and {t_end}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("steps = {steps} must be >= 2")));
    }
    let ratio = t_end / t_start;
    let grid: Vec<f64> = (0..steps)
        .map(|k| match k {
            0 => t_start,
            k if k == steps - 1 => t_end,
            k => t_start * ratio.powf(k as f64 / (steps - 1) as f64),
        })
        .collect();
    let mut tracer = Tracer {
        fam,
        m,
        rescale,
        frames: Vec::new(),
        costs: Vec::new(),
        ambiguous: vec![false; m],
    };
    let base: Vec<Frame> = grid.par_iter().map(|&t| tracer.solve(t)).collect::<Result<_>>()?;
    let mut base = base.into_iter();
    tracer.frames.push(base.next().unwrap());
    for f in base {
        tracer.advance(f, 0)?;
    }

    let events = collisions(fam, m, rescale, &tracer.frames);
    let n = tracer.frames.len();
    let paths = (0..m).map(|i| tracer.frames.iter().map(|f| f.z[i]).collect()).collect();
    debug_assert_eq!(tracer.costs.len(), n - 1);
    Ok(TrajectoryBundle {
        family: fam.label(),
        m,
        rescaled: rescale,
        t_grid: tracer.frames.iter().map(|f| f.t).collect(),
        paths,
        pairing_cost: tracer.costs,
        collision_events: events,
        ambiguous: tracer.ambiguous,
    })
}

/// Real zeros that pair off into the complex plane (or back) between two
/// consecutive frames, plus frames whose closest pair is unusually close.
fn collisions(fam: &RecurrenceFamily, m: usize, rescale: bool, frames: &[Frame]) -> Vec<CollisionEvent> {
    let mut events = Vec::new();
    let mut touched = vec![false; frames.len()];
    for k in 1..frames.len() {
        let (a, b) = (&frames[k - 1], &frames[k]);
        let flips: Vec<usize> = (0..m)
            .filter(|&i| is_real(a.z[i], DEFAULT_TOL_IM) != is_real(b.z[i], DEFAULT_TOL_IM))
            .collect();
        if flips.is_empty() {
            continue;
        }
        touched[k - 1] = true;
        touched[k] = true;
        for side in [a, b] {
            let mut xs: Vec<f64> = flips
                .iter()
                .filter(|&&i| is_real(side.z[i], DEFAULT_TOL_IM))
                .map(|&i| side.z[i].re)
                .collect();
            xs.sort_by(f64::total_cmp);
            let (lo, hi) = (b.t, a.t);
            for pr in xs.chunks_exact(2) {
                let xm = 0.5 * (pr[0] + pr[1]);
                let tm = (lo * hi).sqrt();
                let (x, t) = match refine_double_zero(fam, m, xm, tm, rescale) {
                    Some((x, t)) if t >= lo * (1.0 - 1e-6) && t <= hi * (1.0 + 1e-6) => (x, t),
                    _ => (xm, tm),
                };
                events.push(CollisionEvent {
                    t,
                    x,
                    gap: pr[1] - pr[0],
                });
            }
        }
    }
    for (k, f) in frames.iter().enumerate() {
        if touched[k] || m < 2 {
            continue;
        }
        let g = min_gap(&f.z);
        if g < COLLISION_GAP * median_gap(&f.z) {
            let mut best = (0, 1);
            for i in 0..m {
                for j in i + 1..m {
                    if (f.z[i] - f.z[j]).norm() < (f.z[best.0] - f.z[best.1]).norm() {
                        best = (i, j);
                    }
                }
            }
            events.push(CollisionEvent {
                t: f.t,
                x: 0.5 * (f.z[best.0].re + f.z[best.1].re),
                gap: g,
            });
        }
    }
    events.sort_by(|p, q| q.t.total_cmp(&p.t).then(p.x.total_cmp(&q.x)));
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::{matching_distance, poly_roots_certified, zeros_eig};
    use crate::mp::MpPoly;
    use f256::f256;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_partial_sum_examples() {
        assert_eq!(exp_partial_sum(0, 3.7), 1.0);
        assert_eq!(exp_partial_sum(1, -1.0), 0.0);
        let s2 = exp_partial_sum(2, c(-1.0, 1.0));
        assert!(s2.norm() < 1e-15);
        assert!(exp_partial_sum(2, c(-1.0, -1.0)).norm() < 1e-15);
        assert!((exp_partial_sum(60, 1.0) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn exp_generating_function() {
        for &y in &[-0.3, -0.1, 0.0, 0.2, 0.3] {
            for &t in &[-2.0, 0.5, 3.0] {
                assert!(exp_genfun_residual(t, y, 50).unwrap() <= 1e-12, "t={t} y={y}");
            }
        }
        assert_eq!(exp_genfun_residual(1.0, 0.0, 0).unwrap(), 0.0);
        assert!(exp_genfun_residual(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn q_via_s_examples() {
        let h = RecurrenceFamily::hermite();
        assert_eq!(hermite_q_via_s(0, 0.3, 2.0), 1.0);
        assert_eq!(hermite_q_via_s(2, 0.0, 1.0), 0.0);
        let want = h.partial_sum_direct(7, 0.3, 0.2).unwrap();
        assert!((hermite_q_via_s(7, 0.3, 0.2) - want).abs() <= 1e-12 * want.abs());
        assert!((hermite_q_via_s_in::<f256>(7, 0.3, 0.2).to_f64() - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn q_via_s_random_grid() {
        use crate::mp::MpSum;
        use rand::{Rng, SeedableRng};
        let h = RecurrenceFamily::hermite();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let m = rng.random_range(0..=60);
            let x: f64 = rng.random_range(-3.0..3.0);
            let t: f64 = rng.random_range(0.01..5.0);
            let direct = MpSum::new(&h, m, t).unwrap().eval(c(x, 0.0)).value.re.to_f64();
            let via = hermite_q_via_s_in::<f256>(m, x, t).to_f64();
            assert!((via - direct).abs() <= 1e-11 * direct.abs().max(1.0), "m={m} x={x} t={t}");
            // in double precision the error is bounded by the size of the terms
            let scale = (t * t).exp() * (2.0 * x.abs() * t).exp();
            let f = hermite_q_via_s(m, x, t);
            assert!((f - direct).abs() <= 1e-13 * scale.max(1.0), "m={m} x={x} t={t}");
        }
    }

    #[test]
    fn szego_examples() {
        assert_eq!(szego_residual(c(1.0, 0.0)), 0.0);
        assert_eq!(szego_residual(c(0.0, 0.0)), f64::NEG_INFINITY);
        assert_eq!(szego_residual(c(0.5, 0.0)), 0.5f64.ln() + 0.5);
        let u = szego_negative_crossing();
        assert!((u + 0.278464542761074).abs() < 1e-12);
        assert!(szego_residual(c(u, 0.0)).abs() <= 1e-8);
    }

    #[test]
    fn loop_points_lie_on_curve() {
        let pts = szego_loop(SZEGO_SAMPLES);
        assert_eq!(pts.len(), 720);
        assert_eq!(pts[0], c(1.0, 0.0));
        for z in &pts {
            assert!(z.norm() <= 1.0);
            assert!(szego_residual(*z).abs() < 1e-12, "{z}");
        }
        // crossing of the negative axis sits at theta = pi
        assert!((pts[360].re - szego_negative_crossing()).abs() < 1e-12);
    }

    fn exp_sum_roots(m: usize) -> Vec<Complex64> {
        let mut coef = vec![f256::from(1.0)];
        for n in 1..=m {
            let prev = coef[n - 1];
            coef.push(prev / f256::from(n as f64));
        }
        let r = poly_roots_certified(&MpPoly::new(coef), 7);
        assert!(r.certified);
        r.roots
    }

    #[test]
    fn hermite_cloud_tracks_exp_sum_roots() {
        // small t: q_m(x;t) ~ S_m(2xt), so the scaled zeros approach those of S_m(m z)
        let h = RecurrenceFamily::hermite();
        let m = 40;
        let t = 1e-5;
        let cloud = scaled_cloud(&h, &zeros_eig(&h, m, t).unwrap()).unwrap();
        let oracle: Vec<Complex64> = exp_sum_roots(m).iter().map(|w| w / m as f64).collect();
        assert!(matching_distance(&cloud.points, &oracle).unwrap() < 1e-6);
        let oracle_max = oracle.iter().map(|z| szego_residual(*z).abs()).fold(0.0, f64::max);
        assert!((cloud.max_residual() - oracle_max).abs() < 1e-6);
        assert!(cloud.max_residual() <= 0.2);
    }

    #[test]
    fn szego_trend_small_t() {
        let h = RecurrenceFamily::hermite();
        let mut last = f64::INFINITY;
        for m in [20, 40, 70] {
            let zs = zeros_eig(&h, m, 1e-5).unwrap();
            assert!(zs.converged);
            let r = scaled_cloud(&h, &zs).unwrap().max_residual();
            assert!(r < last, "m={m}: {r} vs {last}");
            last = r;
        }
        assert!(last <= 0.15);
    }

    #[test]
    fn charlier_cloud_and_unsupported_families() {
        let ch = RecurrenceFamily::charlier(3.0).unwrap();
        let zs = zeros_eig(&ch, 40, 1e-6).unwrap();
        let cloud = scaled_cloud(&ch, &zs).unwrap();
        assert_eq!(cloud.rule, ScalingRule::Charlier { a: 3.0 });
        let oracle: Vec<Complex64> = exp_sum_roots(40).iter().map(|w| w / 40.0).collect();
        assert!(matching_distance(&cloud.points, &oracle).unwrap() < 1e-3);
        assert!(cloud.max_residual() <= 0.25);
        let lo = RecurrenceFamily::lommel(3.0).unwrap();
        let zs = zeros_eig(&lo, 5, 0.5).unwrap();
        assert!(matches!(scaled_cloud(&lo, &zs), Err(Error::UnsupportedFamily(_))));
    }

    #[test]
    fn cloud_csv_has_header_and_rows() {
        let h = RecurrenceFamily::hermite();
        let cloud = scaled_cloud(&h, &zeros_eig(&h, 6, 0.01).unwrap()).unwrap();
        let csv = cloud.to_csv();
        assert!(csv.starts_with("index,re,im,residual\n"));
        assert_eq!(csv.lines().count(), 7);
        assert!(cloud.to_svg().contains("<polygon"));
    }

    #[test]
    fn single_zero_trajectory_is_straight() {
        let ch = RecurrenceFamily::charlier(3.0).unwrap();
        let b = trace_trajectories(&ch, 1, 4.0, 0.5, 9, false).unwrap();
        assert_eq!(b.t_grid.len(), 9);
        assert!(b.collision_events.is_empty());
        for (k, t) in b.t_grid.iter().enumerate() {
            let want = 3.0 + 3.0 / t;
            assert!((b.paths[0][k] - c(want, 0.0)).norm() < 1e-12 * want);
        }
    }

    #[test]
    fn rescaled_hermite_m10_collisions() {
        let h = RecurrenceFamily::hermite();
        let b = trace_trajectories(&h, 10, 6.0, 0.1, 60, true).unwrap();
        assert!(b.t_grid.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(b.pairing_cost.len(), b.t_grid.len() - 1);
        for p in &b.paths {
            assert_eq!(p.len(), b.t_grid.len());
        }
        let hz: Vec<f64> = h.p_zeros(10).unwrap().iter().map(|x| x / 10f64.sqrt()).collect();
        let start = b.frame(0);
        let mut real: Vec<f64> = start.iter().map(|z| z.re).collect();
        real.sort_by(f64::total_cmp);
        for (x, y) in real.iter().zip(&hz) {
            assert!((x - y).abs() < 1e-2);
        }
        let first = b.collision_events[0];
        assert!((first.t - 0.6926318429).abs() < 1e-6, "{first:?}");
        assert!((first.x - 0.800920079).abs() < 1e-6);
        for e in &b.collision_events {
            let d = hz.iter().map(|x| (x - e.x).abs()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-4, "{e:?}");
        }
        let frame = b.frame(b.t_grid.len() - 1);
        let direct = zeros_at(&h, 10, 0.1, true).unwrap().zeros;
        assert!(matching_distance(&frame, &direct).unwrap() < 1e-7);
        for k in 0..b.t_grid.len() {
            let f = b.frame(k);
            let conj: Vec<Complex64> = f.iter().map(|z| z.conj()).collect();
            assert!(matching_distance(&f, &conj).unwrap() < 1e-9);
        }
    }

    #[test]
    fn trajectory_json_round_trip() {
        let h = RecurrenceFamily::hermite();
        let b = trace_trajectories(&h, 3, 2.0, 0.5, 4, false).unwrap();
        let back = TrajectoryBundle::from_json(&b.to_json().unwrap()).unwrap();
        assert_eq!(b, back);
        let csv = b.to_csv();
        assert!(csv.starts_with("t,path_id,re,im\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * b.t_grid.len());
    }

    #[test]
    fn trajectory_rejects_bad_grids() {
        let h = RecurrenceFamily::hermite();
        assert!(trace_trajectories(&h, 3, 0.5, 2.0, 4, false).is_err());
        assert!(trace_trajectories(&h, 3, 2.0, 0.5, 1, false).is_err());
        assert!(trace_trajectories(&h, 0, 2.0, 0.5, 4, false).is_err());
    }
}
