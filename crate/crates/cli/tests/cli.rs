use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_qgamma");

fn qgamma(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("QGAMMA_PSD_TOL")
        .env_remove("QGAMMA_SOLVER_TOL")
        .output()
        .expect("spawn qgamma")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn classical(dir: &TempDir, name: &str, w: &[f64]) -> PathBuf {
    let blocks: Vec<String> = w.iter().map(|x| format!("[[[{x},0]]]")).collect();
    let shape = vec!["1"; w.len()].join(",");
    write(dir, name, &format!(r#"{{"shape":[{shape}],"blocks":[{}]}}"#, blocks.join(",")))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn value(o: &Output) -> f64 {
    stdout(o).trim().parse().unwrap()
}

#[test]
fn div_classical_pair_matches_scalar_oracle() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.5, 0.5]);
    let p = classical(&dir, "p.json", &[0.75, 0.25]);
    let o = qgamma(&["div", s(&w), s(&p), "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let oracle = 4.0 * (1.0 - 0.375f64.sqrt() - 0.125f64.sqrt());
    assert!((value(&o) - oracle).abs() < 1e-9);

    let o = qgamma(&["div", s(&w), s(&p), "--gamma", "0"]);
    let kl = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
    assert!((value(&o) - kl).abs() < 1e-9);
}

#[test]
fn div_identical_is_zero_and_support_violation_is_inf() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.3, 0.7]);
    assert_eq!(stdout(&qgamma(&["div", s(&w), s(&w), "--gamma", "0.4"])).trim(), "0");
    let e = classical(&dir, "e.json", &[1.0, 0.0]);
    let o = qgamma(&["div", s(&e), s(&w), "--gamma", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "inf");
}

#[test]
fn div_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.5, 0.5]);
    let x = classical(&dir, "x.json", &[0.2, 0.3, 0.5]);
    let junk = write(&dir, "junk.json", "{not json");
    let neg = classical(&dir, "neg.json", &[0.5, -0.5]);
    for args in [
        vec!["div", s(&w), s(&x), "--gamma", "0.5"],
        vec!["div", s(&w), s(&junk), "--gamma", "0.5"],
        vec!["div", s(&w), s(&neg), "--gamma", "0.5"],
        vec!["div", s(&w), s(&w), "--gamma", "1.5"],
        vec!["div", s(&w), "missing.json", "--gamma", "0.5"],
    ] {
        let o = qgamma(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn quasi_matches_div() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.5, 0.5]);
    let p = classical(&dir, "p.json", &[0.75, 0.25]);
    let q = qgamma(&["quasi", s(&w), s(&p), "--gamma", "0.3"]);
    let d = qgamma(&["div", s(&w), s(&p), "--gamma", "0.3"]);
    assert_eq!(q.status.code(), Some(0));
    assert!((value(&q) - value(&d)).abs() < 1e-8);
}

fn parse_csv(text: &str) -> Vec<(f64, f64)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,divergence"));
    lines
        .map(|l| {
            let (g, d) = l.split_once(',').unwrap();
            (g.parse().unwrap(), d.parse().unwrap())
        })
        .collect()
}

#[test]
fn sweep_grid_rows_and_index_symmetry() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.5, 0.5]);
    let p = classical(&dir, "p.json", &[0.75, 0.25]);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(qgamma(&["sweep", s(&w), s(&p), "--gamma", "0.01:0.99:0.01", "-o", s(&a)]).status.code(), Some(0));
    assert_eq!(qgamma(&["sweep", s(&p), s(&w), "--gamma", "0.01:0.99:0.01", "-o", s(&b)]).status.code(), Some(0));
    let ra = parse_csv(&fs::read_to_string(&a).unwrap());
    let rb = parse_csv(&fs::read_to_string(&b).unwrap());
    assert_eq!(ra.len(), 99);
    for (i, (g, d)) in ra.iter().enumerate() {
        let (g2, d2) = rb[98 - i];
        assert!((g + g2 - 1.0).abs() < 1e-9);
        // 9 significant digits on both sides
        assert!((d - d2).abs() <= 1e-8 * d.abs().max(1e-3));
    }
    // continuity: adjacent rows move by a bounded amount
    assert!(ra.windows(2).all(|r| (r[1].1 - r[0].1).abs() < 1e-2));
}

#[test]
fn sweep_endpoints_single_point_and_zero_curve() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.5, 0.5]);
    let p = classical(&dir, "p.json", &[0.75, 0.25]);
    let rows = parse_csv(&stdout(&qgamma(&["sweep", s(&w), s(&p), "--gamma", "0:1:0.25"])));
    assert_eq!(rows.len(), 5);
    let kl = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| y * (y / x).ln()).sum::<f64>();
    assert!((rows[0].1 - kl(&[0.5, 0.5], &[0.75, 0.25])).abs() < 1e-8);
    assert!((rows[4].1 - kl(&[0.75, 0.25], &[0.5, 0.5])).abs() < 1e-8);

    let one = parse_csv(&stdout(&qgamma(&["sweep", s(&w), s(&p), "--gamma", "0.3:0.3:0.1"])));
    assert_eq!(one.len(), 1);

    let zeros = parse_csv(&stdout(&qgamma(&["sweep", s(&w), s(&w), "--gamma", "0:1:0.1"])));
    assert_eq!(zeros.len(), 11);
    assert!(zeros.iter().all(|r| r.1 == 0.0));
}

#[test]
fn sweep_rejects_bad_range() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.5, 0.5]);
    for spec in ["0.9:0.1:0.1", "0:1.5:0.1", "0:1:0", "0:1", "a:b:c"] {
        assert_eq!(qgamma(&["sweep", s(&w), s(&w), "--gamma", spec]).status.code(), Some(2), "{spec}");
    }
}

fn classical_constraint(dir: &TempDir, gamma: f64) -> PathBuf {
    write(
        dir,
        "c.json",
        &format!(
            r#"{{"gamma":{gamma},"constraints":[{{"a":{{"shape":[1,1],"blocks":[[[[1,0]]],[[[-1,0]]]]}},"c":0}}]}}"#
        ),
    )
}

fn quantum_problem(dir: &TempDir) -> (PathBuf, PathBuf) {
    let psi = write(
        dir,
        "psi3.json",
        r#"{"shape":[3],"blocks":[[[[0.7,0],[0,0],[0,0]],[[0,0],[0.2,0],[0,0]],[[0,0],[0,0],[0.1,0]]]]}"#,
    );
    let c = write(
        dir,
        "c3.json",
        r#"{"gamma":0.3,"constraints":[{"a":{"shape":[3],"blocks":[[[[0,0],[1,0],[0,0]],[[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0]]]]},"c":0.5}]}"#,
    );
    (psi, c)
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn project_classical_example() {
    let dir = TempDir::new().unwrap();
    let psi = classical(&dir, "psi.json", &[0.8, 0.2]);
    let c = classical_constraint(&dir, 0.5);
    let out = dir.path().join("out.json");
    let o = qgamma(&["project", s(&psi), s(&c), "--gamma", "0.5", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&out);
    // minimiser of 2Σ(√x_i − √ψ_i)² on x₁ = x₂ = t is t = ((√.8 + √.2)/2)²
    let t = ((0.8f64.sqrt() + 0.2f64.sqrt()) / 2.0).powi(2);
    for i in 0..2 {
        let x = v["projected"]["blocks"][i][0][0][0].as_f64().unwrap();
        assert!((x - t).abs() < 1e-6);
    }
    assert!((v["divergence"].as_f64().unwrap() - 0.2).abs() < 1e-6);
    assert!(v["kkt_residual"].as_f64().unwrap() <= 1e-8);
    assert!(v["iterations"].is_u64());
    assert_eq!(v["converged"], serde_json::json!(true));
}

#[test]
fn project_feasible_psi_has_zero_divergence() {
    let dir = TempDir::new().unwrap();
    let psi = classical(&dir, "psi.json", &[0.4, 0.4]);
    let c = classical_constraint(&dir, 0.5);
    let v: serde_json::Value = serde_json::from_slice(&qgamma(&["project", s(&psi), s(&c)]).stdout).unwrap();
    assert!(v["divergence"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn project_exit_codes() {
    let dir = TempDir::new().unwrap();
    let psi = classical(&dir, "psi.json", &[0.8, 0.2]);
    let bad = write(
        &dir,
        "bad.json",
        r#"{"gamma":0.5,"constraints":[{"a":{"shape":[1,1],"blocks":[[[[1,0]]],[[[0,0]]]]},"c":1},{"a":{"shape":[1,1],"blocks":[[[[2,0]]],[[[0,0]]]]},"c":3}]}"#,
    );
    assert_eq!(qgamma(&["project", s(&psi), s(&bad)]).status.code(), Some(3));

    let c = classical_constraint(&dir, 0.5);
    assert_eq!(qgamma(&["project", s(&psi), s(&c), "--gamma", "0.3"]).status.code(), Some(2));

    let (psi3, c3) = quantum_problem(&dir);
    let out = dir.path().join("partial.json");
    let o = qgamma(&["project", s(&psi3), s(&c3), "--max-iter", "1", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    let v = read_json(&out);
    assert_eq!(v["converged"], serde_json::json!(false));
    assert!(v["projected"]["shape"].is_array());
}

#[test]
fn project_two_starts_agree() {
    let dir = TempDir::new().unwrap();
    let (psi, c) = quantum_problem(&dir);
    let a: serde_json::Value = serde_json::from_slice(&qgamma(&["project", s(&psi), s(&c)]).stdout).unwrap();
    let b: serde_json::Value =
        serde_json::from_slice(&qgamma(&["project", s(&psi), s(&c), "--seed", "7"]).stdout).unwrap();
    assert!((a["divergence"].as_f64().unwrap() - b["divergence"].as_f64().unwrap()).abs() < 1e-8);
}

#[test]
fn solver_tolerance_flag_beats_env() {
    let dir = TempDir::new().unwrap();
    let (psi, c) = quantum_problem(&dir);
    let run = |env: &str, flag: Option<&str>| {
        let mut cmd = Command::new(BIN);
        cmd.args(["project", s(&psi), s(&c)]).env("QGAMMA_SOLVER_TOL", env);
        if let Some(f) = flag {
            cmd.args(["--solver-tol", f]);
        }
        let v: serde_json::Value = serde_json::from_slice(&cmd.output().unwrap().stdout).unwrap();
        v["iterations"].as_u64().unwrap()
    };
    let loose = run("1e-2", None);
    let tight = run("1e-2", Some("1e-10"));
    assert!(loose < tight, "{loose} vs {tight}");

    let o = Command::new(BIN).args(["project", s(&psi), s(&c)]).env("QGAMMA_SOLVER_TOL", "-1").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audit_pass_fail_and_usage() {
    let o = qgamma(&["audit", "monotone", "--trials", "1000", "--dim", "4", "--gamma", "0.5", "--seed", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS monotone"));

    let o = qgamma(&["audit", "cosine", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0));

    for args in [
        vec!["audit", "cosine", "--trials", "0"],
        vec!["audit", "cosine", "--dim", "0"],
        vec!["audit", "nonsense"],
        vec!["audit", "quasi", "--gamma", "1.0"],
    ] {
        assert_eq!(qgamma(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn check_suite_subset_and_env_errors() {
    let o = qgamma(&["check", "--suite", "divergence"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("PASS ")).count(), 4);
    assert!(!text.contains("projection"));

    let o = Command::new(BIN).args(["check"]).env("QGAMMA_PSD_TOL", "-1").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(qgamma(&["check", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(qgamma(&["check", "--psd-tol", "-1"]).status.code(), Some(2));
}

#[test]
fn check_full_suite_passes() {
    let o = qgamma(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS: 12 criteria"));
}

#[test]
fn gen_outputs_parse_and_feed_div() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(qgamma(&["gen", "state", "--shape", "2,1", "--seed", "1", "-o", s(&a)]).status.code(), Some(0));
    assert_eq!(qgamma(&["gen", "state", "--shape", "2,1", "--seed", "2", "--rank", "1", "-o", s(&b)]).status.code(), Some(0));
    let o = qgamma(&["div", s(&a), s(&b), "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&o) > 0.0);

    let ch = qgamma(&["gen", "channel", "--in", "3", "--out-dim", "2", "--kraus", "2", "--seed", "4"]);
    assert_eq!(ch.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ch.stdout).unwrap();
    assert_eq!(v["kraus"].as_array().unwrap().len(), 2);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let w = classical(&dir, "w.json", &[0.5, 0.3, 0.2]);
    let p = classical(&dir, "p.json", &[0.1, 0.6, 0.3]);
    let (psi, c) = quantum_problem(&dir);
    for args in [
        vec!["sweep", s(&w), s(&p), "--gamma", "0:1:0.01"],
        vec!["project", s(&psi), s(&c), "--seed", "3"],
        vec!["gen", "state", "--shape", "3,2", "--seed", "11"],
        vec!["audit", "pythagoras", "--trials", "40", "--dim", "3", "--seed", "5"],
    ] {
        let first = qgamma(&args);
        let second = qgamma(&args);
        assert_eq!(first.status.code(), second.status.code());
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}
