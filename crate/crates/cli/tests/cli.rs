use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn strip_euler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strip-euler")).args(args).output().unwrap()
}

fn json_stdout(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn kernel_check_small_grid() {
    let o = strip_euler(&["kernel-check", "--grid", "4", "--trunc", "100000"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "a,b,u1,u2,u1_lattice,u2_lattice,abs_err,tail_bound");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 16);
    for r in rows {
        assert!(r[6] <= r[7], "error {} above tail bound {}", r[6], r[7]);
    }
}

#[test]
fn energy_of_rectangle() {
    let p = data("rect_L2.json");
    let v = json_stdout(&strip_euler(&["energy", "--patch", p.to_str().unwrap(), "--L", "2"]));
    let f = v["F"].as_f64().unwrap();
    let exact = 4.0 * std::f64::consts::PI.powi(2) * (64.0 / 3.0 - 16.0 * 2f64.ln());
    assert!((f - exact).abs() <= 1e-4 * exact, "F = {f}");
}

#[test]
fn rearrange_two_blocks() {
    let p = data("two_blocks.json");
    let v = json_stdout(&strip_euler(&["rearrange", "--intervals", p.to_str().unwrap(), "--L", "1"]));
    assert!((v["total_delta_phi"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["trace"]["moves"].as_array().unwrap().len(), 1);
    assert_eq!(v["final"], serde_json::json!([[-1.0, 1.0]]));
}

#[test]
fn minimize_respects_bins() {
    let p = data("bins.json");
    let v = json_stdout(&strip_euler(&["minimize", "--bins", p.to_str().unwrap()]));
    let phi = v["phi"].as_f64().unwrap();
    let grid = v["phi_on_grid"].as_f64().unwrap();
    assert!(phi <= grid + 1e-12);
}

#[test]
fn constraint_violation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"delta": 0.5, "rho_plus": [0.7], "rho_minus": [0.1]}"#).unwrap();
    let o = strip_euler(&["minimize", "--bins", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(strip_euler(&["--bogus"]).status.code(), Some(64));
    assert_eq!(strip_euler(&["energy"]).status.code(), Some(64));
    assert_eq!(strip_euler(&["simulate"]).status.code(), Some(64));
    assert_eq!(strip_euler(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_is_deterministic_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("sim.json");
    let mut outputs = Vec::new();
    for (name, threads) in [("a.csv", "1"), ("b.csv", "2")] {
        let out = dir.path().join(name);
        let o = strip_euler(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "7",
            "--threads",
            threads,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let manifest: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.manifest.json"))).unwrap())
                .unwrap();
        assert_eq!(manifest["command"], "simulate");
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["config"]["sim"]["seed"], 7);
        let digest = manifest["outputs"][out.to_str().unwrap()].as_str().unwrap().to_string();
        outputs.push((std::fs::read(&out).unwrap(), digest));
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(text.starts_with("t,mass,com_x,F,xc_lo,xc_hi,W,tail_mu_0.1,tail_mu_0.5\n"));

    let series = dir.path().join("a.csv");
    let v = json_stdout(&strip_euler(&[
        "stability-report",
        "--series",
        series.to_str().unwrap(),
        "--L",
        "1",
        "--epsilon",
        "0.05",
    ]));
    assert_eq!(v["passes_1e-3"], true);
}

#[test]
fn certify_fast_criteria() {
    let o = strip_euler(&["certify", "--criteria", "2,3,6"]);
    let v = json_stdout(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 3);
    let again = strip_euler(&["certify", "--criteria", "2,3,6"]);
    assert_eq!(o.stdout, again.stdout);
    assert_eq!(strip_euler(&["certify", "--criteria", "12"]).status.code(), Some(64));
}
