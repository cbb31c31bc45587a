use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_preconplace"))
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.json");
    let doc = format!(
        r#"{{"family": {{"kind": "shape", "dims": 2, "decay": 2.0, "amplitude_fraction": 0.5}},
            "helmholtz": {{"k0": 5.0{extra}}}, "n_points": 8, "seed": 1}}"#
    );
    std::fs::write(&path, doc).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let json = dir.path().join("run.json");
    let out = run(&["run", "--config", s(&cfg), "--out", s(&json)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["kind"], "pipeline");
    assert_eq!(report["points"].as_array().unwrap().len(), 8);

    let csv = dir.path().join("table.csv");
    let out = run(&["report", s(&json), s(&json), "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,t_train,t_l_al,t_exec,N_pc,it_av,cost_total,cost_mean_based,cost_per_point");
    assert_eq!(lines.len(), 3);
}

#[test]
fn seed_flag_changes_the_run_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let a = run(&["run", "--config", s(&cfg), "--seed", "5"]);
    let b = run(&["run", "--config", s(&cfg), "--seed", "5"]);
    let c = run(&["run", "--config", s(&cfg), "--seed", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn train_then_place() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let sur = dir.path().join("surrogate.json");
    let out = run(&["train", "--config", s(&cfg), "--out", s(&sur)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["place", "--config", s(&cfg), "--surrogate", s(&sur)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let trained: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sur).unwrap()).unwrap();
    let evaluated = trained["evaluated"].as_array().unwrap().len();
    assert_eq!(doc["remaining"].as_array().unwrap().len(), 8 - evaluated);
}

#[test]
fn baselines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = run(&["baseline", "--kind", "per-point", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["kind"], "per_point");
    assert_eq!(r["it_av"], 1.0);
    let csv = dir.path().join("mean.csv");
    let out = run(&["baseline", "--kind", "mean", "--cost-mode", "measured", "--config", s(&cfg), "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&csv).unwrap().lines().nth(1).unwrap().starts_with("2,0,0,"));
}

#[test]
fn unconverged_solves_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#", "max_iter": 1"#);
    let out = run(&["baseline", "--kind", "mean", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["degraded"], true);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["run", "--config", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"family": {"kind": "affine", "eta": [0.5]}, "n_points": 3, "colour": 1}"#).unwrap();
    let out = run(&["run", "--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}
