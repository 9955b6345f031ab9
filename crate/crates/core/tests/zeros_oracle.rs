//! Zero sets against reference zeros isolated in exact rational arithmetic
//! (see tools/oracle_zeros.py). These cases have condition numbers far past
//! double precision.

use num_complex::Complex64;
use opsums::zeros::{matching_distance, zeros_aberth, zeros_eig};
use opsums::{make_family, FamilySpec};
use serde::Deserialize;
use std::collections::BTreeMap;

#[derive(Deserialize)]
struct Case {
    family: String,
    params: BTreeMap<String, f64>,
    m: usize,
    t: f64,
    zeros: Vec<(f64, f64)>,
}

fn cases() -> Vec<Case> {
    serde_json::from_str(include_str!("data/oracle_zeros.json")).unwrap()
}

#[test]
fn both_methods_match_reference_zeros() {
    for c in cases() {
        let fam = make_family(&FamilySpec {
            name: c.family.clone(),
            params: c.params.clone(),
        })
        .unwrap();
        let want: Vec<Complex64> = c.zeros.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let scale = 1.0 + want.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let want_real = want.iter().filter(|z| opsums::zeros::is_real(**z, 1e-9)).count();
        for zs in [zeros_eig(&fam, c.m, c.t).unwrap(), zeros_aberth(&fam, c.m, c.t).unwrap()] {
            let d = matching_distance(&zs.zeros, &want).unwrap();
            assert!(d <= 1e-12 * scale, "{} m={} t={} {:?}: {d:e}", c.family, c.m, c.t, zs.method);
            assert!(zs.converged);
            assert_eq!(zs.real_count, want_real);
            assert!(zs.max_residual() <= 1e-8);
        }
    }
}
