use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"{
  "seed": 3,
  "experiments": [
    {
      "id": "grid",
      "learner": {"id": "threshold"},
      "distribution": {"id": "grid", "points": 4, "cut": 2, "noise": 0.1},
      "loss": {"id": "zero-one"},
      "n": 3,
      "trials": 300,
      "cmi": {"mode": "both", "trials": 50},
      "theorems": [{"id": "agnostic-expected"}, {"id": "agnostic-squared"}]
    },
    {
      "id": "ranking",
      "learner": {"id": "threshold"},
      "distribution": {"id": "grid", "points": 8, "cut": 4},
      "loss": {"id": "auroc"},
      "n": 6,
      "trials": 100,
      "cmi": {"mode": "mc", "trials": 20},
      "theorems": [{"id": "auroc", "epsilon": 0.3}]
    }
  ],
  "properties": [{"id": "gaussian-kl"}]
}"#;

fn cmi_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmi-lab")).args(args).env_remove("CMI_LAB_JOBS").output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn empty_suite_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "empty.json", r#"{"seed": 1, "experiments": []}"#);
    let out = cmi_lab(&["suite", "--config", &config, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "theorem_id,n,cmi_nats,rhs,lhs,lhs_ci,satisfied,seed\n");
}

#[test]
fn suite_writes_json_and_is_thread_count_independent() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "small.json", SMALL);
    let json = dir.path().join("r.json");
    let out = cmi_lab(&["suite", "--config", &config, "--out", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["experiments"].as_array().unwrap().len(), 2);
    assert_eq!(report["properties"][0]["satisfied"], true);

    let one = cmi_lab(&["bound", "--config", &config, "--jobs", "1"]);
    let three = cmi_lab(&["bound", "--config", &config, "--jobs", "3"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&three));
    assert_eq!(stdout(&one).lines().count(), 1 + 3);

    let reseeded = cmi_lab(&["bound", "--config", &config, "--seed-override", "99"]);
    assert_ne!(stdout(&one), stdout(&reseeded));
    assert!(stdout(&reseeded).contains(",99\n"));
}

#[test]
fn quantity_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "small.json", SMALL);
    for cmd in ["cmi", "ecmi", "ucmi", "gap"] {
        let out = cmi_lab(&[cmd, "--config", &config]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), 2, "{cmd}");
    }
    let csv = cmi_lab(&["cmi", "--config", &config, "--format", "csv"]);
    assert!(stdout(&csv).starts_with("experiment,value_nats,ci,method,trials,lower_bound\ngrid,"));
    let auroc = cmi_lab(&["auroc", "--config", &config]);
    assert_eq!(auroc.status.code(), Some(0));
    assert!(stdout(&auroc).lines().nth(1).unwrap().starts_with("auroc,6,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let falsified = SMALL.replace(r#"{"id": "agnostic-expected"}"#, r#"{"id": "agnostic-expected", "rhs_override": -1.0}"#);
    let config = write(dir.path(), "falsified.json", &falsified);
    assert_eq!(cmi_lab(&["suite", "--config", &config]).status.code(), Some(4));

    let unknown = SMALL.replace(r#""id": "gaussian-kl""#, r#""id": "holder-bound""#);
    let config = write(dir.path(), "unknown.json", &unknown);
    let out = cmi_lab(&["suite", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("holder-bound"));

    let exact = SMALL.replace(r#""n": 6"#, r#""n": 12"#).replace(r#"{"mode": "mc", "trials": 20}"#, r#"{"mode": "exact"}"#);
    let config = write(dir.path(), "exact.json", &exact);
    assert_eq!(cmi_lab(&["cmi", "--config", &config]).status.code(), Some(3));

    assert_eq!(cmi_lab(&["suite"]).status.code(), Some(1));
    let missing = cmi_lab(&["suite", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/config.json"));
}

#[test]
fn jobs_default_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "small.json", SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_cmi-lab"))
        .args(["bound", "--config", &config])
        .env("CMI_LAB_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), stdout(&cmi_lab(&["bound", "--config", &config])));
}
