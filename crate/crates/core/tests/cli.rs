use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const WORKED: &str = r#"{
  "cone": {"type": "lorentz", "d": 1},
  "subspace": {"basis": [[0, 1]]},
  "base_point": {"re": [0, 0], "im": [1, 0]},
  "candidate_subalgebra": {"generators": [
    {"linear": [[0, 0], [0, 0]], "translation": [1, 0]},
    {"linear": [[1, 0], [0, 1]], "translation": [0, 0]}
  ]}
}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

fn run(config: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_siegel-reduce"));
    cmd.env_remove("SIEGEL_REDUCE_SEED");
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn worked_with(f: &Fixture, patch: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(WORKED).unwrap();
    patch(&mut v);
    f.file("cfg.json", &v.to_string())
}

#[test]
fn check_admissible_and_inadmissible() {
    let f = Fixture::new();
    let out = run(Some(&f.file("a.json", WORKED)), &["check"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["certificate"]["verdict"], "admissible");
    let w: Vec<f64> = serde_json::from_value(v["certificate"]["witness"].clone()).unwrap();
    assert!((w[0] - 1.0).abs() < 1e-9 && w[1].abs() < 1e-9);

    let cfg = worked_with(&f, |v| v["subspace"]["basis"] = serde_json::json!([[1, 1]]));
    let out = run(Some(&cfg), &["check"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["certificate"]["verdict"], "inadmissible");
}

#[test]
fn malformed_config_names_the_key() {
    let f = Fixture::new();
    let cfg = worked_with(&f, |v| v["subspace"]["basis"] = serde_json::json!([[0, 1, 2]]));
    let out = run(Some(&cfg), &["check"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("subspace.basis"), "{}", stderr(&out));

    let out = run(Some(&f.file("bad.json", "{not json")), &["check"]);
    assert_eq!(out.status.code(), Some(64));

    let out = run(None, &["check"]);
    assert_eq!(out.status.code(), Some(64));

    let out = run(Some(&f.file("a.json", WORKED)), &["check", "--tol", "nope=1"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(stderr(&out).contains("nope"));
}

#[test]
fn reduce_worked_point() {
    let f = Fixture::new();
    let cfg = f.file("a.json", WORKED);
    let out = run(Some(&cfg), &["reduce", "--point", r#"{"re":[0,0],"im":[2,1]}"#]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    let im: Vec<f64> = serde_json::from_value(v["result"]["point"]["im"].clone()).unwrap();
    let shift: Vec<f64> = serde_json::from_value(v["result"]["shift"].clone()).unwrap();
    assert!((im[0] - 2.0).abs() < 1e-8 && im[1].abs() < 1e-8, "{im:?}");
    assert!(shift[0].abs() < 1e-8 && (shift[1] + 1.0).abs() < 1e-8, "{shift:?}");
    assert!(v["result"]["residual"].as_f64().unwrap() <= 1e-8);

    // Already on the zero set: zero shift.
    let out = run(Some(&cfg), &["reduce"]);
    assert_eq!(out.status.code(), Some(0));
    let shift: Vec<f64> = serde_json::from_value(json(&out)["result"]["shift"].clone()).unwrap();
    assert!(shift.iter().all(|s| s.abs() < 1e-12), "{shift:?}");

    // Imaginary part on the boundary.
    let out = run(Some(&cfg), &["reduce", "--point", r#"{"re":[0,0],"im":[1,1]}"#]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

fn parse_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::str::from_utf8(bytes).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

#[test]
fn quotient_csv() {
    let f = Fixture::new();
    let cfg = f.file("a.json", WORKED);
    let out = run(Some(&cfg), &["quotient", "--samples", "100", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (header, rows) = parse_csv(&out.stdout);
    assert_eq!(header, ["t0", "member", "witness0", "roundtrip_err"]);
    assert_eq!(rows.len(), 100);
    for r in &rows {
        let t: f64 = r[0].parse().unwrap();
        let expected = if t > 0.0 { "member" } else { "nonmember" };
        assert_eq!(r[1], expected, "{r:?}");
        if t > 0.0 {
            assert!(r[3].parse::<f64>().unwrap() <= 1e-8);
        }
    }

    let again = run(Some(&cfg), &["quotient", "--samples", "100", "--seed", "7"]);
    assert_eq!(out.stdout, again.stdout);

    let empty = run(Some(&cfg), &["quotient", "--samples", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(String::from_utf8(empty.stdout).unwrap(), "t0,member,witness0,roundtrip_err\n");
}

#[test]
fn lie_test_verdicts() {
    let f = Fixture::new();
    let out = run(Some(&f.file("a.json", WORKED)), &["lie-test", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["report"]["verdict"], "pass", "{v}");

    let cfg = worked_with(&f, |v| {
        v["candidate_subalgebra"]["generators"][1] =
            serde_json::json!({"linear": [[0, 0], [0, 0]], "translation": [0, 1]})
    });
    let out = run(Some(&cfg), &["lie-test", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["report"]["verdict"], "fail");
    assert_eq!(v["report"]["reasons"][0], "span");

    // (1, 1)i has nonzero momentum for H = span{e1}.
    let cfg = worked_with(&f, |v| v["base_point"]["im"] = serde_json::json!([2, 1]));
    let out = run(Some(&cfg), &["lie-test"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn verify_exit_codes() {
    let out = run(None, &["verify", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["passed"], true);

    let out = run(None, &["verify", "--trials", "2", "--tol", "cone.gradient=1e-20"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cone.gradient"), "{}", stderr(&out));
}

#[test]
fn seed_precedence_and_out_file() {
    let f = Fixture::new();
    let cfg = worked_with(&f, |v| v["seed"] = serde_json::json!(11));
    let bin = env!("CARGO_BIN_EXE_siegel-reduce");
    let seed_of = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(bin);
        cmd.env_remove("SIEGEL_REDUCE_SEED").arg("--config").arg(&cfg).arg("check");
        if let Some(e) = env {
            cmd.env("SIEGEL_REDUCE_SEED", e);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        json(&cmd.output().unwrap())["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(None, None), 11);
    assert_eq!(seed_of(Some("5"), None), 11);
    assert_eq!(seed_of(Some("5"), Some("3")), 3);

    let plain = f.file("plain.json", WORKED);
    let out =
        Command::new(bin).env("SIEGEL_REDUCE_SEED", "5").arg("--config").arg(&plain).arg("check").output().unwrap();
    assert_eq!(json(&out)["seed"], 5);

    let path = f.dir.path().join("report.json");
    let out = run(Some(&plain), &["check", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "check");
}
