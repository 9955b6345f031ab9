//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use num_complex::Complex64;
use opsums::asymptotics::scaled_cloud;
use opsums::critical::{t_crit_bisect, t_crit_hermite_double_zero};
use opsums::verify::verify_family;
use opsums::zeros::{check_interlacing, is_real, matching_distance, zeros_aberth, zeros_eig, DEFAULT_TOL_IM};
use opsums::RecurrenceFamily;
use rayon::prelude::*;
use serde::Deserialize;
use std::process::Command;
use std::time::{Duration, Instant};

// m, x0, t_crit
const CRITICAL_TABLE: [(usize, f64, f64); 4] = [
    (10, 0.800920079, 0.6926318429),
    (20, 1.029414690, 0.7190535658),
    (50, 1.205301838, 0.7334164664),
    (100, 1.282379975, 0.7360578398),
];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn from_failures(failures: Vec<String>, ok: String) -> Outcome {
        if failures.is_empty() {
            Outcome { pass: true, detail: ok }
        } else {
            Outcome {
                pass: false,
                detail: failures.join("; "),
            }
        }
    }
}

fn hermite() -> RecurrenceFamily {
    RecurrenceFamily::hermite()
}

fn charlier3() -> RecurrenceFamily {
    RecurrenceFamily::charlier(3.0).unwrap()
}

fn lommel3() -> RecurrenceFamily {
    RecurrenceFamily::lommel(3.0).unwrap()
}

fn within_time(failures: &mut Vec<String>, elapsed: Duration, limit: f64) {
    if elapsed.as_secs_f64() > limit {
        failures.push(format!("took {:.1}s, limit {limit}s", elapsed.as_secs_f64()));
    }
}

fn critical_table() -> Outcome {
    let start = Instant::now();
    let ms = CRITICAL_TABLE.map(|r| r.0.to_string()).join(",");
    let out = Command::new(env!("CARGO_BIN_EXE_opsums"))
        .args(["tcrit", "--family", "hermite", "--rescaled", "-m", &ms, "--format", "csv"])
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    let mut failures = vec![];
    if !out.status.success() {
        failures.push(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Vec<f64>> = stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    if rows.len() != CRITICAL_TABLE.len() {
        failures.push(format!("expected {} rows, got {}", CRITICAL_TABLE.len(), rows.len()));
    }
    let mut worst: f64 = 0.0;
    for (row, &(m, x0, tc)) in rows.iter().zip(&CRITICAL_TABLE) {
        let tol = if m >= 100 { 1e-5 } else { 1e-6 };
        let (dx, dt) = ((row[1] - x0).abs(), (row[2] - tc).abs());
        worst = worst.max(dx).max(dt);
        if row[0] as usize != m || !(dx <= tol && dt <= tol) {
            failures.push(format!("m={m}: got x0={} t={}, |dx|={dx:.1e} |dt|={dt:.1e}", row[1], row[2]));
        }
    }
    within_time(&mut failures, elapsed, 120.0);
    Outcome::from_failures(
        failures,
        format!("m=10,20,50,100 worst deviation {worst:.1e} in {:.1}s", elapsed.as_secs_f64()),
    )
}

fn method_agreement() -> Outcome {
    let fam = hermite();
    let mut failures = vec![];
    let mut worst: f64 = 0.0;
    for m in [10usize, 20, 50] {
        let s = (m as f64).sqrt();
        let b = t_crit_bisect(&fam, m, 1.0, 1e-10, true).unwrap();
        let d = t_crit_hermite_double_zero(m).unwrap();
        let dt = (b.t_crit - d.t_crit).abs();
        worst = worst.max(dt);
        if !(dt <= 1e-6) {
            failures.push(format!("m={m}: bisect {} vs double zero {}", b.t_crit, d.t_crit));
        }
        // second-largest zero of H_m, confirmed by a Newton step in the recurrence
        let mut xs = fam.p_zeros(m).unwrap();
        xs.sort_by(f64::total_cmp);
        let x2 = xs[m - 2];
        let step = fam.eval_p(m, x2).unwrap() / (2.0 * m as f64 * fam.eval_p(m - 1, x2).unwrap());
        if !(step.abs() <= 1e-12 * x2.abs().max(1.0)) {
            failures.push(format!("m={m}: H_m zero {x2} off by Newton step {step:e}"));
        }
        for (name, r) in [("bisect", &b), ("double zero", &d)] {
            match r.x0 {
                Some(x0) if (x0 - x2 / s).abs() <= 1e-6 => {}
                other => failures.push(format!("m={m} {name}: x0 {other:?} vs {}", x2 / s)),
            }
        }
    }
    Outcome::from_failures(failures, format!("m=10,20,50 max |dt| {worst:.1e}, x0 matches second-largest zero"))
}

fn identity_suite() -> Outcome {
    let start = Instant::now();
    let mut failures = vec![];
    let mut checks = 0;
    for fam in [hermite(), charlier3(), lommel3()] {
        let rep = verify_family(&fam, 30).unwrap();
        checks += rep.checks.len();
        for c in rep.checks.iter().filter(|c| !c.passed) {
            failures.push(format!("{} {}: {:e} > {:e}", fam.label(), c.name, c.worst, c.tolerance));
        }
    }
    let elapsed = start.elapsed();
    within_time(&mut failures, elapsed, 60.0);
    Outcome::from_failures(
        failures,
        format!("{checks} checks over three families, m<=30, in {:.1}s", elapsed.as_secs_f64()),
    )
}

fn sorted_real(fam: &RecurrenceFamily, m: usize, t: f64, failures: &mut Vec<String>) -> Vec<f64> {
    let zs = zeros_eig(fam, m, t).unwrap();
    if !zs.all_real() {
        failures.push(format!("{} m={m} t={t}: {} of {m} real", fam.label(), zs.real_count));
    }
    let mut r: Vec<f64> = zs.zeros.iter().map(|z| z.re).collect();
    r.sort_by(f64::total_cmp);
    r
}

fn min_gap(xs: &[f64]) -> f64 {
    xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

fn large_t_structure() -> Outcome {
    let fam = hermite();
    let t = 20.0;
    let mut failures = vec![];
    for m in [10usize, 50, 100] {
        let q_m = sorted_real(&fam, m, t, &mut failures);
        let q_m1 = sorted_real(&fam, m + 1, t, &mut failures);
        let mut p_m = fam.p_zeros(m).unwrap();
        let mut p_m1 = fam.p_zeros(m + 1).unwrap();
        p_m.sort_by(f64::total_cmp);
        p_m1.sort_by(f64::total_cmp);
        if !(min_gap(&q_m) > 1e-8) {
            failures.push(format!("m={m}: zeros not simple, gap {:e}", min_gap(&q_m)));
        }
        for (name, inner, outer) in [
            ("q_m/q_m+1", &q_m, &q_m1),
            ("q_m/p_m+1", &q_m, &p_m1),
            ("p_m/q_m+1", &p_m, &q_m1),
        ] {
            if !check_interlacing(inner, outer).unwrap_or(false) {
                failures.push(format!("m={m}: {name} do not interlace"));
            }
        }
        let half = 0.5 * min_gap(&p_m);
        let far = q_m.iter().zip(&p_m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if !(far < half) {
            failures.push(format!("m={m}: zero {far:e} from its p_m zero, half gap {half:e}"));
        }
    }
    let ch = zeros_eig(&charlier3(), 10, t).unwrap();
    let lowest = ch.zeros.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !ch.all_real() || !(lowest >= -1e-6) {
        failures.push(format!("charlier m=10: {} real, lowest {lowest}", ch.real_count));
    }
    Outcome::from_failures(
        failures,
        format!("hermite m=10,50,100 real, interlaced, near p_m zeros; charlier lowest zero {lowest:.3}"),
    )
}

fn complex_regime() -> Outcome {
    let (m, t) = (100, 1.69);
    let zs = zeros_eig(&hermite(), m, t).unwrap();
    let conj: Vec<Complex64> = zs.zeros.iter().map(|z| z.conj()).collect();
    let d = matching_distance(&zs.zeros, &conj).unwrap();
    let scale = 1.0 + zs.max_modulus();
    let unpaired = zs
        .zeros
        .iter()
        .filter(|z| !is_real(**z, DEFAULT_TOL_IM))
        .filter(|z| !zs.zeros.iter().any(|w| (w - z.conj()).norm() <= 1e-8 * scale))
        .count();
    let mut failures = vec![];
    if !(zs.real_count < m) {
        failures.push(format!("real_count {} not below {m}", zs.real_count));
    }
    if unpaired > 0 || !(d <= 1e-8 * scale) {
        failures.push(format!("{unpaired} unpaired, conjugate mismatch {d:e}"));
    }
    Outcome::from_failures(
        failures,
        format!("real_count {}, {} conjugate pairs", zs.real_count, (m - zs.real_count) / 2),
    )
}

#[derive(Deserialize)]
struct OracleCase {
    family: String,
    m: usize,
    t: f64,
    zeros: Vec<(f64, f64)>,
}

/// Exactly isolated reference zeros, where the fixture has the case.
fn oracle_zeros(family: &str, m: usize, t: f64) -> Option<Vec<Complex64>> {
    let cases: Vec<OracleCase> = serde_json::from_str(include_str!("data/oracle_zeros.json")).unwrap();
    cases
        .into_iter()
        .find(|c| c.family == family && c.m == m && c.t == t)
        .map(|c| c.zeros.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
}

fn szego_limit() -> Outcome {
    let start = Instant::now();
    let cases = [
        (hermite(), "hermite", 40usize, 1e-5, 0.2),
        (hermite(), "hermite", 70, 1e-5, 0.15),
        (charlier3(), "charlier", 40, 1e-6, 0.25),
    ];
    let mut failures = vec![];
    let mut maxima = vec![];
    for (fam, key, m, t, bound) in &cases {
        let zs = zeros_eig(fam, *m, *t).unwrap();
        let r = scaled_cloud(fam, &zs).unwrap().max_residual();
        maxima.push(r);
        if !(r <= *bound) {
            failures.push(format!("{key} m={m}: {r:.4} > {bound}"));
        }
        if let Some(want) = oracle_zeros(key, *m, *t) {
            let scale = 1.0 + want.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            let d = matching_distance(&zs.zeros, &want).unwrap();
            if !(d <= 1e-9 * scale) {
                failures.push(format!("{key} m={m}: zeros {d:e} from exact reference"));
            }
        }
    }
    if !(maxima[1] < maxima[0]) {
        failures.push(format!("m=70 max {:.4} not below m=40 max {:.4}", maxima[1], maxima[0]));
    }
    let elapsed = start.elapsed();
    within_time(&mut failures, elapsed, 30.0);
    Outcome::from_failures(
        failures,
        format!(
            "hermite m=40 {:.4}, m=70 {:.4}; charlier m=40 {:.4}; {:.1}s",
            maxima[0],
            maxima[1],
            maxima[2],
            elapsed.as_secs_f64()
        ),
    )
}

fn hurwitz_escape() -> Outcome {
    let ts = [1e-1, 1e-2, 1e-3];
    let mins: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let zs = zeros_eig(&hermite(), 10, t).unwrap();
            zs.zeros.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
        })
        .collect();
    let increasing = mins.windows(2).all(|w| w[1] > w[0]);
    let detail = format!("min |z| = {:.4}, {:.4}, {:.4}", mins[0], mins[1], mins[2]);
    if increasing {
        Outcome { pass: true, detail }
    } else {
        Outcome { pass: false, detail }
    }
}

fn cross_solver() -> Outcome {
    let fams = [hermite(), charlier3(), lommel3()];
    let ts = [0.05, 0.5, 5.0, 50.0];
    let cases: Vec<(usize, f64, usize)> = (0..fams.len())
        .flat_map(|f| ts.iter().flat_map(move |&t| (1..=100usize).map(move |m| (f, t, m))))
        .collect();
    let results: Vec<(usize, f64, usize, f64, bool)> = cases
        .par_iter()
        .map(|&(f, t, m)| {
            let a = zeros_eig(&fams[f], m, t).unwrap();
            let b = zeros_aberth(&fams[f], m, t).unwrap();
            let scale = 1.0 + a.max_modulus().max(b.max_modulus());
            let d = matching_distance(&a.zeros, &b.zeros).unwrap() / scale;
            (f, t, m, d, a.converged && b.converged)
        })
        .collect();
    let mut failures = vec![];
    for &(f, t, m, d, conv) in &results {
        if !(d <= 1e-6) || !conv {
            failures.push(format!("{} m={m} t={t}: {d:e} converged={conv}", fams[f].label()));
        }
    }
    let worst = results.iter().map(|r| r.3).fold(0.0, f64::max);
    Outcome::from_failures(
        failures,
        format!("{} cases, worst relative distance {worst:.1e}", results.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("critical thresholds of the rescaled Hermite sums", critical_table),
        ("bisection and double-zero agreement", method_agreement),
        ("identity suite", identity_suite),
        ("large-t real structure", large_t_structure),
        ("complex regime at t=1.69", complex_regime),
        ("Szego limit of scaled zeros", szego_limit),
        ("zeros escape as t decreases", hurwitz_escape),
        ("eigenvalue and Aberth solvers agree", cross_solver),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("{} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
