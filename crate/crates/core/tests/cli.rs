use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_mhd-blowup");

const SMALL: &str = r#"{
  "seed": 4,
  "simulate": {"n": 6, "dtau": 0.005, "tau_end": 0.2, "max_mode": 2, "output_every": 2},
  "fit": {"window": [0.02, 0.2]},
  "nash_moser": {"n": 6, "tau_end": 0.1, "schedule": {"m_max": 2}},
  "sweep": {"nu": [2.0, 5.0, 10.0], "a": [0.25]}
}"#;

fn run_cli(dir: &Path, args: &[&str], config: &str) -> (i32, String) {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(BIN).args(args).arg("--config").arg(&cfg).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_exact_exit_codes_follow_the_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pub");
    let (code, _) = run_cli(dir.path(), &["verify-exact", "--out", out.to_str().unwrap()], r#"{"verify_exact": {"random_sets": 3}}"#);
    let report = json(&out.join("certificate.json"));
    assert_eq!(code, 1);
    assert_eq!(report["status"], "nonzero residuals");
    assert_eq!(report["certificates"].as_array().unwrap().len(), 4);

    let out = dir.path().join("sf");
    let (code, _) = run_cli(
        dir.path(),
        &["verify-exact", "--out", out.to_str().unwrap()],
        r#"{"verify_exact": {"family": "swirl_free", "random_sets": 3}}"#,
    );
    assert_eq!(code, 0);
    assert_eq!(json(&out.join("certificate.json"))["status"], "all residuals zero");
}

#[test]
fn simulate_writes_csv_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let cfg = SMALL.replace(r#""output_every": 2}"#, r#""output_every": 2, "snapshot_every": 20}"#);
    let (code, err) = run_cli(dir.path(), &["simulate-linear", "--serial", "--out", out.to_str().unwrap()], &cfg);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(csv.starts_with("tau,l2_h,l2_q,h1_h,h1_q,h2_h,h2_q,dtau_h,dtau_q\n"));
    assert_eq!(csv.lines().count(), 1 + 21);
    let report = json(&out.join("simulate.json"));
    assert_eq!(report["steps"], 40);
    let snaps = report["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 3);
    let bytes = fs::read(out.join(snaps[2].as_str().unwrap())).unwrap();
    let snap = mhd_blowup::linsolver::Snapshot::read(&bytes[..]).unwrap();
    assert!((snap.tau - 0.2).abs() < 1e-12);
}

#[test]
fn fit_decay_reports_rate_window_goodness_and_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit");
    let (code, err) = run_cli(dir.path(), &["fit-decay", "--serial", "--out", out.to_str().unwrap()], SMALL);
    assert_eq!(code, 0, "{err}");
    let r = json(&out.join("fit.json"));
    assert!(r["rate"].as_f64().unwrap() > 0.0);
    assert_eq!(r["window"], serde_json::json!([0.02, 0.2]));
    assert!(r["goodness"].as_f64().unwrap() >= 0.95);
    assert_eq!(r["conditions"]["conditions"].as_array().unwrap().len(), 8);

    // Refit the stored series; the result must match the simulated fit.
    let sim = dir.path().join("sim");
    run_cli(dir.path(), &["simulate-linear", "--serial", "--out", sim.to_str().unwrap()], SMALL);
    let cfg = SMALL.replace(
        r#""fit": {"window": [0.02, 0.2]}"#,
        &format!(r#""fit": {{"window": [0.02, 0.2], "series": {:?}}}"#, sim.join("series.csv")),
    );
    let out2 = dir.path().join("refit");
    let (code, err) = run_cli(dir.path(), &["fit-decay", "--out", out2.to_str().unwrap()], &cfg);
    assert_eq!(code, 0, "{err}");
    let r2 = json(&out2.join("fit.json"));
    let (a, b) = (r["rate"].as_f64().unwrap(), r2["rate"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
}

#[test]
fn nash_moser_report_has_the_step_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nm");
    let (code, err) = run_cli(dir.path(), &["nash-moser", "--serial", "--out", out.to_str().unwrap()], SMALL);
    let r = json(&out.join("nash_moser.json"));
    assert_eq!(code, if r["passed"].as_bool().unwrap() { 0 } else { 1 }, "{err}");
    let steps = r["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 3);
    for key in ["m", "h_norm", "q_norm", "e1", "e2"] {
        assert!(steps[0].get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["floor"].as_f64(), Some(1e-8));
    assert!(r.get("superlinear_until").is_some());
}

#[test]
fn sweep_over_viscosity_is_nondecreasing_and_matches_direct_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let (code, err) = run_cli(dir.path(), &["sweep", "--out", out.to_str().unwrap()], SMALL);
    assert_eq!(code, 0, "{err}");
    let r = json(&out.join("sweep.json"));
    let rows = r["rows"].as_array().unwrap();
    let rates: Vec<f64> = rows.iter().map(|row| row["rate"].as_f64().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    assert_eq!(r["monotone_in_nu"], true);

    // A single-point sweep reproduces the direct fit bit for bit.
    let single = SMALL.replace(r#""nu": [2.0, 5.0, 10.0]"#, r#""nu": [5.0]"#);
    let out1 = dir.path().join("one");
    assert_eq!(run_cli(dir.path(), &["sweep", "--out", out1.to_str().unwrap()], &single).0, 0);
    let direct = single.replace(r#""seed": 4,"#, r#""seed": 4, "params": {"nu": 5.0, "mu": 5.0},"#);
    let out2 = dir.path().join("direct");
    assert_eq!(run_cli(dir.path(), &["fit-decay", "--out", out2.to_str().unwrap()], &direct).0, 0);
    let swept = json(&out1.join("sweep.json"))["rows"][0]["rate"].as_f64().unwrap();
    let fitted = json(&out2.join("fit.json"))["rate"].as_f64().unwrap();
    assert_eq!(swept.to_bits(), fitted.to_bits());
    assert_eq!(rates[1].to_bits(), fitted.to_bits());
}

#[test]
fn sweep_grid_rows_have_stable_order_and_empty_grid_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SMALL.replace(r#""sweep": {"nu": [2.0, 5.0, 10.0], "a": [0.25]}"#, r#""sweep": {"nu": [3.0, 6.0, 9.0], "a": [0.25, 0.5]}"#);
    let out = dir.path().join("grid");
    let (_, err) = run_cli(dir.path(), &["sweep", "--out", out.to_str().unwrap()], &cfg);
    let rows = json(&out.join("sweep.json"))["rows"].as_array().unwrap().clone();
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r["nu"].as_f64().unwrap(), r["a"].as_f64().unwrap())).collect();
    assert_eq!(keys, vec![(3.0, 0.25), (3.0, 0.5), (6.0, 0.25), (6.0, 0.5), (9.0, 0.25), (9.0, 0.5)], "{err}");

    let empty = SMALL.replace(r#""nu": [2.0, 5.0, 10.0]"#, r#""nu": []"#);
    let out = dir.path().join("empty");
    assert_eq!(run_cli(dir.path(), &["sweep", "--out", out.to_str().unwrap()], &empty).0, 0);
    assert_eq!(fs::read_to_string(out.join("sweep.csv")).unwrap(), "nu,mu,a,rate,goodness,error\n");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let (code, err) = run_cli(dir.path(), &["simulate-linear", "--out", out.to_str().unwrap()], r#"{"params": {"viscosty": 1}}"#);
    assert_eq!(code, 2);
    assert!(err.contains("params.viscosty"), "{err}");
    let (code, err) = run_cli(dir.path(), &["simulate-linear", "--out", out.to_str().unwrap()], r#"{"params": {"a": 0}}"#);
    assert_eq!(code, 2);
    assert!(err.contains("{0, -1/4}"), "{err}");
    let status = Command::new(BIN).args(["fit-decay", "--config", "/nonexistent.json"]).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = Command::new(BIN).arg("simulate").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let cfg = r#"{"simulate": {"n": 6, "dtau": 0.5, "tau_end": 1.0}}"#;
    let (code, err) = run_cli(dir.path(), &["simulate-linear", "--out", out.to_str().unwrap()], cfg);
    assert_eq!(code, 2);
    assert!(err.contains("advective bound"), "{err}");
}

#[test]
fn serial_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["simulate-linear", "fit-decay", "nash-moser", "sweep"] {
        let a = dir.path().join(format!("{sub}-a"));
        let b = dir.path().join(format!("{sub}-b"));
        run_cli(dir.path(), &[sub, "--serial", "--seed", "17", "--out", a.to_str().unwrap()], SMALL);
        run_cli(dir.path(), &[sub, "--serial", "--seed", "17", "--out", b.to_str().unwrap()], SMALL);
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{sub}: {n:?} differs");
        }
    }
}
