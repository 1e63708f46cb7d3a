use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaudin-lab"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// Copy a shipped config into `dir` so outputs land in the temp directory.
fn stage(name: &str, dir: &Path) -> PathBuf {
    let dst = dir.join(name);
    fs::copy(configs().join(name), &dst).unwrap();
    dst
}

fn simulate(cfg: &Path) -> Output {
    bin().arg("simulate").arg(cfg).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sample_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = stage("rational_sl2_n3.json", dir.path());
    let out = simulate(&cfg);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let csv = fs::read_to_string(dir.path().join("out/rational_sl2_n3.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    // segment, 2 times, 2 complex Hamiltonians, 2 drift columns, 3 samples x 2 coefficients, seed
    assert_eq!(header.len(), 1 + 2 + 4 + 2 + 12 + 1);
    assert_eq!(&header[..5], &["segment", "t1", "t2", "H1_re", "H1_im"]);
    assert_eq!(*header.last().unwrap(), "seed");
    let rows: Vec<&str> = lines.collect();
    // three legs of 100, 50 and 100 steps plus the start
    assert_eq!(rows.len(), 251);
    assert!(rows.iter().all(|r| r.ends_with(",7")));

    let report = read_json(&dir.path().join("out/rational_sl2_n3.json"));
    assert_eq!(report["status"], "ok");
    assert_eq!(report["seed"], 7);
    let drift = report["diagnostics"]["hamiltonian_drift"].as_array().unwrap();
    assert!(drift.iter().all(|d| d.as_f64().unwrap() < 1e-8));
    assert_eq!(report["checks"][0]["suite"], "weierstrass");
    assert_eq!(report["checks"][0]["passed"], true);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = stage("rational_sl2_n3.json", dir.path());
    let read = || {
        assert_eq!(simulate(&cfg).status.code(), Some(0));
        (
            fs::read(dir.path().join("out/rational_sl2_n3.csv")).unwrap(),
            fs::read(dir.path().join("out/rational_sl2_n3.json")).unwrap(),
        )
    };
    assert_eq!(read(), read());
}

#[test]
fn coincident_points_are_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = read_json(&configs().join("rational_sl2_n3.json"));
    // first Hamiltonian point on the first marked point
    cfg["model"]["hamiltonians"][0]["point"] = cfg["model"]["marked_points"][0].clone();
    let path = dir.path().join("bad.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = simulate(&path);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("coincident points"), "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let base = read_json(&configs().join("rational_sl2_n3.json"));
    let cases: Vec<(&str, Box<dyn Fn(&mut Value)>)> = vec![
        ("unknown key", Box::new(|c| c["colour"] = Value::from("red"))),
        ("missing step", Box::new(|c| {
            c.as_object_mut().unwrap().remove("step");
        })),
        ("negative step", Box::new(|c| c["step"] = Value::from(-0.1))),
        ("diagonal curve leg", Box::new(|c| c["curve"] = serde_json::json!([[0.0, 0.0], [1.0, 1.0]]))),
        ("wrong curve dimension", Box::new(|c| c["curve"] = serde_json::json!([[0.0], [1.0]]))),
        ("unknown suite", Box::new(|c| c["checks"] = serde_json::json!(["bogus"]))),
        ("bad keyword", Box::new(|c| c["initial_state"] = Value::from("zero"))),
        ("z sample on a pole", Box::new(|c| c["z_samples"] = serde_json::json!([[1.0, 0.0]]))),
        ("seed not traceless", Box::new(|c| c["model"]["orbit_seeds"][0][0][0] = serde_json::json!([1.0, 0.0]))),
    ];
    for (label, edit) in cases {
        let mut cfg = base.clone();
        edit(&mut cfg);
        let path = dir.path().join("case.json");
        fs::write(&path, cfg.to_string()).unwrap();
        let out = simulate(&path);
        assert_eq!(out.status.code(), Some(2), "{label}: {}", stderr(&out));
    }
    let out = simulate(&dir.path().join("missing.json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explicit_state_off_the_constraint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = read_json(&configs().join("elliptic_pole.json"));
    // the diagonal parts no longer cancel
    cfg["model"]["orbit_seeds"][1] = cfg["model"]["orbit_seeds"][0].clone();
    let path = dir.path().join("c.json");
    fs::write(&path, cfg.to_string()).unwrap();
    assert_eq!(simulate(&path).status.code(), Some(2));
}

#[test]
fn pole_collision_aborts_with_last_good_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = stage("elliptic_pole.json", dir.path());
    let out = simulate(&cfg);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("resonant"));

    let report = read_json(&dir.path().join("out/elliptic_pole.json"));
    assert_eq!(report["status"], "aborted");
    assert!(report["abort"]["reason"].as_str().unwrap().contains("resonant"));
    // q reaches the resonance at t = 0.5, so the last completed step is at 0.49
    let t = report["abort"]["last_good_time"][0].as_f64().unwrap();
    assert!((t - 0.49).abs() < 1e-9, "{t}");
    // the partial trajectory is still written
    let csv = fs::read_to_string(dir.path().join("out/elliptic_pole.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 50);
}

#[test]
fn verify_weierstrass_passes() {
    let out = bin().args(["verify", "weierstrass"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], true);
    for check in report["checks"].as_array().unwrap() {
        for key in ["name", "identity", "tolerance", "measured", "passed"] {
            assert!(check.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .args(["verify", "rational", "--seed", "7", "--out"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        (fs::read(out_dir.join("verify_rational_seed7.json")).unwrap(), out.stdout)
    };
    let (a, sa) = run("a");
    let (b, sb) = run("b");
    assert_eq!(a, b);
    assert_eq!(sa, sb);
    assert_eq!(a, sa);
}

#[test]
fn unknown_suite_exits_2() {
    let out = bin().args(["verify", "hyperbolic"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown suite"));
}
