use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_distgeom"));
    c.env_remove("DISTGEOM_SEED").env_remove("DISTGEOM_OUT").env_remove("DISTGEOM_THREADS");
    c
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["solve"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["generate", "--source", "chain:20", "--p", "x", "--out", "a"]).output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dgp");
    fs::write(&bad, "dgp 1 3 2 0\n0 1 1 2\n").unwrap();
    let out = bin().args(["solve"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
    assert_eq!(bin().args(["solve", "/nonexistent.dgp"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn generate_solve_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("c.dgp");
    let xyz = dir.path().join("c.xyz");
    let st = bin().args(["generate", "--source", "cloud:20:10:4", "--complete", "--out"]).arg(&inst).status().unwrap();
    assert!(st.success());
    let out = bin().args(["--threads", "1", "solve", "--format", "json", "--out"]).arg(&xyz).arg(&inst).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let solved: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(solved["rmsd_A"].as_f64().unwrap() < 1e-2);
    let out = bin().args(["eval", "--format", "json"]).arg(&xyz).arg("--reference").arg(&inst).arg("--instance").arg(&inst).output().unwrap();
    assert!(out.status.success());
    let eval: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((eval["rmsd_A"].as_f64().unwrap() - solved["rmsd_A"].as_f64().unwrap()).abs() < 1e-9);
    assert_eq!(eval["m"].as_u64(), Some(190));
}

#[test]
fn environment_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.spec");
    fs::write(&spec, "source = chain:20:1\np = 0.5\nsigma = 0.0\ninstances = 1\nruns = 1\n").unwrap();
    let out_dir = dir.path().join("out");
    let st = bin().args(["bench"]).arg(&spec).env("DISTGEOM_OUT", &out_dir).env("DISTGEOM_SEED", "9").status().unwrap();
    assert!(st.success());
    let rows = fs::read_to_string(out_dir.join("rows.csv")).unwrap();
    let first = rows.lines().nth(1).unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields[5], "9");
}

#[test]
fn bench_without_output_dir_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.spec");
    fs::write(&spec, "source = chain:20\n").unwrap();
    assert_eq!(bin().arg("bench").arg(&spec).output().unwrap().status.code(), Some(1));
}
