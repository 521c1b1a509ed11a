use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_foliation-lab"));
    cmd.env_remove("FOLIATION_LAB_SEED");
    cmd
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().unwrap();
    (
        status.code().unwrap(),
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

fn csv_column(text: &str, column: usize) -> Vec<f64> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}

const FLAT: &str = r#"{"constant": 1.0}"#;
const BUMP: &str = r#"{"constant": 2.0, "terms": [{"m": 0, "n": 1, "amp": 1.0}]}"#;
const TILTED: &str = r#"{"constant": 1.5, "terms": [{"m": 1, "n": 1, "amp": 0.4, "phase_t": 0.3}, {"m": 0, "n": 1, "amp": 0.2}]}"#;
const THETA_ONLY: &str = r#"{"constant": 1.0, "terms": [{"m": 1, "n": 0, "amp": 0.5}]}"#;

#[test]
fn flat_spectrum_is_the_integers_in_the_window() {
    let dir = TempDir::new().unwrap();
    let flat = write(dir.path(), "flat.json", FLAT);
    let (code, out, _) = run(bin()
        .args([
            "spectrum",
            "--model",
            "torus",
            "--grid",
            "64",
            "--window",
            "8",
            "--profile",
        ])
        .arg(&flat));
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("eigenvalue"));
    let values = csv_column(&out, 0);
    assert_eq!(values.len(), 17);
    for (v, k) in values.iter().zip(-8..=8) {
        assert!((v - f64::from(k)).abs() < 1e-10, "{v} vs {k}");
    }
}

#[test]
fn s3_bounds_row_matches_reference() {
    let (code, out, _) = run(bin().args([
        "bounds",
        "--model",
        "s3",
        "--r",
        "0.5",
        "--resolution",
        "1000",
    ]));
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("kind,r,value,reference_value,abs_error"));
    let esti: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(esti[0], "esti");
    let value: f64 = esti[2].parse().unwrap();
    let reference: f64 = esti[3].parse().unwrap();
    assert!((value - 1.75).abs() < 1e-6);
    assert_eq!(reference, 1.75);
    // 17 significant digits in exponent form
    assert_eq!(esti[2], "1.7500000000000000e0");
    let tags: Vec<&str> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(tags, ["esti", "estmflot", "minmax", "collapse"]);
}

#[test]
fn verify_all_emits_passing_bundle() {
    let dir = TempDir::new().unwrap();
    let p1 = write(dir.path(), "p1.json", BUMP);
    let p2 = write(dir.path(), "p2.json", TILTED);
    let (code, out, err) = run(bin()
        .args(["verify", "--all", "--grid", "128", "--profiles"])
        .arg(&p1)
        .arg(&p2));
    assert_eq!(code, 0, "{err}");
    let bundle: Value = serde_json::from_str(&out).unwrap();
    let reports = bundle["reports"].as_array().unwrap();
    assert!(reports.iter().all(|r| r["passed"] == true));
    let tags: Vec<&str> = reports.iter().map(|r| r["tag"].as_str().unwrap()).collect();
    for tag in ["inv", "scal", "schlich"] {
        assert!(tags.contains(&tag), "missing {tag}");
    }
    // the second profile has leafwise-varying mean curvature
    assert_eq!(bundle["skipped"].as_array().unwrap().len(), 1);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let p1 = write(dir.path(), "p1.json", BUMP);
    let p2 = write(dir.path(), "p2.json", TILTED);
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out_dir = dir.path().join(format!("run{i}"));
        let (code, _, err) = run(bin()
            .args(["verify", "--all", "--grid", "64", "--output-dir"])
            .arg(&out_dir)
            .arg("--profiles")
            .arg(&p1)
            .arg(&p2)
            .current_dir(dir.path()));
        assert_eq!(code, 0, "{err}");
        outputs.push(fs::read(out_dir.join("verify.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn malformed_profile_names_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"constant": 1.0, "terms": [{"m": 0, "n": 1, "amplitude": 0.2}]}"#,
    );
    let (code, _, err) = run(bin().arg("spectrum").arg("--profile").arg(&bad));
    assert_eq!(code, 2);
    assert!(err.contains("amplitude"), "{err}");

    let missing = write(dir.path(), "missing.json", r#"{"terms": []}"#);
    let (code, _, err) = run(bin().arg("spectrum").arg("--profile").arg(&missing));
    assert_eq!(code, 2);
    assert!(err.contains("constant"), "{err}");
}

#[test]
fn nonpositive_profile_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let neg = write(
        dir.path(),
        "neg.json",
        r#"{"constant": 1.0, "terms": [{"m": 0, "n": 1, "amp": 2.0}]}"#,
    );
    let (code, _, err) = run(bin().arg("spectrum").arg("--profile").arg(&neg));
    assert_eq!(code, 2);
    assert!(err.contains("not positive"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(
        run(bin().args(["spectrum", "--profile", "x.json", "--grid", "63"])).0,
        2
    );
    assert_eq!(
        run(bin().args([
            "spectrum",
            "--profile",
            "x.json",
            "--grid",
            "64",
            "--window",
            "12"
        ]))
        .0,
        2
    );
    assert_eq!(run(bin().args(["bounds", "--r", "-1"])).0, 2);
    assert_eq!(run(bin().args(["frobnicate"])).0, 2);
    assert_eq!(
        run(bin().args(["spectrum", "--profile", "does-not-exist.json"])).0,
        2
    );
}

#[test]
fn failed_verification_exits_with_one() {
    // identical leaf densities: Δ_b cannot tell the metrics apart
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "flat.json", FLAT);
    let b = write(dir.path(), "theta.json", THETA_ONLY);
    let (code, out, _) = run(bin()
        .args([
            "verify",
            "--check",
            "laplacian",
            "--grid",
            "64",
            "--profiles",
        ])
        .arg(&a)
        .arg(&b));
    assert_eq!(code, 1);
    let bundle: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(bundle["reports"][0]["residual"], "inf");
    assert!(bundle["reports"][0]["metadata"]["flag"].is_string());
}

#[test]
fn explicit_lichnerowicz_on_nonbasic_profile_is_rejected() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "tilted.json", TILTED);
    let (code, _, err) = run(bin()
        .args(["verify", "--check", "lichnerowicz", "--profiles"])
        .arg(&p));
    assert_eq!(code, 2);
    assert!(err.contains("basic"), "{err}");
}

#[test]
fn s3_sweep_writes_one_file_per_radius() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("sweep");
    let (code, _, err) = run(bin()
        .args([
            "sweep",
            "--model",
            "s3",
            "--r-log",
            "0.1",
            "10",
            "5",
            "--resolution",
            "200",
            "--output-dir",
        ])
        .arg(&out_dir));
    assert_eq!(code, 0, "{err}");
    for i in 0..5 {
        assert!(out_dir.join(format!("bounds_r{i:03}.csv")).exists());
    }
    let combined = fs::read_to_string(out_dir.join("bounds.csv")).unwrap();
    assert_eq!(combined.lines().count(), 1 + 5 * 4);
    let leftovers: Vec<_> = fs::read_dir(&out_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn torus_sweep_honors_seed_variable() {
    let dir = TempDir::new().unwrap();
    let flat = write(dir.path(), "flat.json", FLAT);
    let run_with_seed = |seed: &str, out: &str| {
        let out_dir = dir.path().join(out);
        let (code, _, err) = run(bin()
            .env("FOLIATION_LAB_SEED", seed)
            .args([
                "sweep",
                "--model",
                "torus",
                "--grids",
                "32",
                "64",
                "--random-pairs",
                "2",
                "--format",
                "json",
                "--output-dir",
            ])
            .arg(&out_dir)
            .arg("--profiles")
            .arg(&flat));
        assert_eq!(code, 0, "{err}");
        let bundle: Value =
            serde_json::from_slice(&fs::read(out_dir.join("random_pair_01_N64.json")).unwrap())
                .unwrap();
        assert!(out_dir.join("spectrum_00_flat_N32.json").exists());
        assert!(
            fs::read_to_string(out_dir.join("sweep_summary.csv"))
                .unwrap()
                .lines()
                .count()
                == 1 + 2 + 4
        );
        bundle
    };
    let a = run_with_seed("7", "a");
    let b = run_with_seed("8", "b");
    assert_eq!(a["environment"]["seed"], 7);
    assert_eq!(b["environment"]["seed"], 8);
    assert_ne!(
        a["reports"][0]["metadata"]["profiles"],
        b["reports"][0]["metadata"]["profiles"]
    );
}

#[test]
fn forms_squared_spectrum_uses_squared_window() {
    let dir = TempDir::new().unwrap();
    let bump = write(dir.path(), "bump.json", BUMP);
    let (code, out, _) = run(bin()
        .args([
            "spectrum",
            "--operator",
            "forms-squared",
            "--grid",
            "32",
            "--format",
            "json",
            "--profile",
        ])
        .arg(&bump));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["window"], 16.0);
    let eig: Vec<f64> = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    // 0 twice (constants and dt), each k² ≥ 1 four times
    assert_eq!(eig.len(), 2 + 4 * 4);
}
