use opsums::critical::CriticalResult;
use opsums::zeros::{matching_distance, ZeroSet};
use opsums::{zeros_eig, RecurrenceFamily};
use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opsums"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("error is JSON");
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["zeros", "-m", "12", "-t", "0.3", "--format", "json"][..],
        &["zeros", "--family", "charlier", "--a", "3", "-m", "15", "-t", "0.5", "--method", "aberth"],
        &["traj", "-m", "6", "-t", "2,0.2", "--steps", "40", "--format", "csv"],
        &["szego", "-m", "20", "-t", "1e-4", "--format", "svg"],
    ] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
}

#[test]
fn zeros_json_round_trips_to_library_result() {
    let text = stdout(&["zeros", "-m", "9", "-t", "0.4", "--format", "json"]);
    let cli = ZeroSet::from_json(&text).unwrap();
    let lib = zeros_eig(&RecurrenceFamily::hermite(), 9, 0.4).unwrap();
    assert_eq!(cli.zeros, lib.zeros);
    assert_eq!(cli.real_count, lib.real_count);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["family"], "hermite");
}

#[test]
fn csv_and_out_file_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    let args = ["zeros", "--family", "lommel", "--nu", "3", "-m", "7", "-t", "2", "--format", "csv"];
    let printed = stdout(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(stdout(&with_out), "");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    assert_eq!(printed.lines().count(), 8);
}

#[test]
fn tcrit_table_and_json() {
    let csv = stdout(&["tcrit", "--table", "-m", "10"]);
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 10.0);
    assert!((row[1] - 0.800920079).abs() < 1e-8);
    assert!((row[2] - 0.6926318429).abs() < 1e-9);

    let json = stdout(&["tcrit", "--rescaled", "-m", "10", "--method", "bisect", "--format", "json"]);
    let v: Value = serde_json::from_str(&json).unwrap();
    let first = if v.is_array() { v[0].clone() } else { v };
    let r: CriticalResult = serde_json::from_value(first).unwrap();
    assert!((r.t_crit - 0.6926318429).abs() < 1e-8);
    assert!(r.bracket.0 < r.t_crit && r.t_crit <= r.bracket.1);
}

#[test]
fn custom_family_file_matches_builtin() {
    let n = 16;
    let mut fact = 1.0;
    let alpha: Vec<f64> = (0..n)
        .map(|k| {
            if k > 0 {
                fact *= k as f64;
            }
            1.0 / fact
        })
        .collect();
    let doc = serde_json::json!({
        "name": "tabulated-hermite",
        "a": vec![0.5; n],
        "b": vec![0.0; n],
        "c": (0..n).map(|k| k as f64).collect::<Vec<_>>(),
        "alpha": alpha,
    });
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fam.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let custom = ZeroSet::from_json(&stdout(&[
        "zeros", "--family", path.to_str().unwrap(), "-m", "8", "-t", "0.7", "--format", "json",
    ]))
    .unwrap();
    let builtin = zeros_eig(&RecurrenceFamily::hermite(), 8, 0.7).unwrap();
    assert!(matching_distance(&custom.zeros, &builtin.zeros).unwrap() < 1e-12);

    let out = run(&["zeros", "--family", path.to_str().unwrap(), "-m", "40", "-t", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_reports_in_every_format() {
    let text = stdout(&["verify", "--family", "charlier", "--a", "2", "--max-m", "10", "--format", "json"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(text.contains("charlier_lowering"));
    assert!(!v.to_string().contains("\"passed\":false"));
    let csv = stdout(&["verify", "--family", "hermite", "--max-m", "10", "--format", "csv"]);
    assert!(csv.lines().count() > 5);
}

#[test]
fn svg_outputs_are_documents() {
    for args in [
        &["szego", "-m", "30", "-t", "1e-5", "--format", "svg"][..],
        &["traj", "-m", "5", "-t", "3,0.3", "--steps", "30", "--rescaled", "--format", "svg"],
    ] {
        let s = stdout(args);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"), "{args:?}");
    }
}

#[test]
fn errors_are_json_with_exit_codes() {
    let bad_family = run(&["zeros", "-m", "3", "-t", "1", "--family", "nope"]);
    assert_eq!(bad_family.status.code(), Some(2));
    assert_eq!(error_kind(&bad_family), "invalid-parameter");

    let missing = run(&["zeros", "-t", "1"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(error_kind(&missing), "usage");

    let lommel_szego = run(&["szego", "--family", "lommel", "--nu", "3", "-m", "10", "-t", "1e-3"]);
    assert_ne!(lommel_szego.status.code(), Some(0));
    error_kind(&lommel_szego);

    assert!(stdout(&["--help"]).contains("tcrit"));
}
