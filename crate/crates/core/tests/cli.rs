use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use threshscatter::cli::{run, RunConfig, Task};
use threshscatter::profile::{LogGrid, ProfileHeader, RadialProfile};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_threshscatter"));
    c.env_remove("THRESHSCATTER_GRID_N");
    c
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout holds a JSON summary")
}

fn write_potential(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("v.txt");
    let out = bin().args(["manufacture", "--shape", "inverse-sqrt", "--output"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn constants_m6_passes() {
    let out = bin().args(["constants", "--m", "6"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["task"], "constants");
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 5);
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert_eq!(v["values"]["D_mj"].as_array().unwrap().len(), 3);
}

#[test]
fn threshold_classifies_manufactured_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_potential(dir.path());
    let out = bin().args(["threshold", "--expect-kind", "first", "--potential"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["values"]["kind"], "first");
    assert_eq!(v["values"]["dimension"], 1);
    let l = v["values"]["elements"][0]["l_unit_tail"].as_f64().unwrap();
    assert!((l - 1.0).abs() < 1e-3, "L = {l}");

    let out = bin().args(["threshold", "--expect-kind", "generic", "--potential"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold kind"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(bin().args(["run", "--config"]).arg(&empty).output().unwrap().status.code(), Some(2));
    std::fs::write(&empty, "{}").unwrap();
    assert_eq!(bin().args(["run", "--config"]).arg(&empty).output().unwrap().status.code(), Some(2));
    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"task":"constants","m":6,"colour":"blue"}"#).unwrap();
    assert_eq!(bin().args(["run", "--config"]).arg(&unknown).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["run", "--config"]).arg(dir.path().join("missing.json")).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["constants"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["probe", "--p", "x", "--operator", "zs"]).output().unwrap().status.code(), Some(2));
    let out = bin().args(["manufacture", "--shape", "dipole", "--output"]).arg(dir.path().join("d.txt")).env("THRESHSCATTER_GRID_N", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn failing_check_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"task":"kernel-check","m":5,"samples":4,"tolerances":{"kernel":0.0}}"#).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("closed form kernel = general integral"));
    assert_eq!(json(&out)["tolerances"]["kernel"], 0.0);
}

#[test]
fn numerical_precondition_exits_one() {
    assert_eq!(bin().args(["constants", "--m", "2"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["kernel-check", "--m", "4", "--samples", "6", "--seed", "11"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(json(&a)["seed"] == 11);

    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&da, &db] {
        let out = bin().arg("--out").arg(d.path()).args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    for name in ["summary.json", "kernel_m4.csv"] {
        let a = std::fs::read(da.path().join(name)).unwrap();
        let b = std::fs::read(db.path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn grid_size_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    let out = bin().args(["manufacture", "--shape", "inverse-sqrt", "--output"]).arg(&path).env("THRESHSCATTER_GRID_N", "512").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let (header, profile) = RadialProfile::read_file(&path).unwrap();
    assert_eq!(header.m, 3);
    assert_eq!(profile.grid().len(), 512);
}

#[test]
fn profile_file_round_trip_is_exact() {
    let grid = LogGrid::new(1e-3, 50.0, 300).unwrap();
    let f = RadialProfile::from_real_fn(&grid, 2.5, |r| (1.0 + r * r).powf(-1.25) * (3.0 * r).sin()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    let header = ProfileHeader { m: 3, l: 1, delta: 2.5 };
    f.write_file(&path, &header).unwrap();
    let (h, g) = RadialProfile::read_file(&path).unwrap();
    assert_eq!(h, header);
    assert_eq!(g.grid().radii(), f.grid().radii());
    assert_eq!(g.values(), f.values());
    let mut again = dir.path().join("g.txt");
    g.write_file(&again, &h).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    again.set_extension("bad");
    std::fs::write(&again, "# m=3 l=0 delta=1\n1 2\n0.5 3\n").unwrap();
    assert!(RadialProfile::read_file(&again).is_err());
}

#[test]
fn library_run_matches_config_round_trip() {
    let cfg = RunConfig { m: Some(9), ..RunConfig::new(Task::Constants) };
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    let report = run(&cfg).unwrap();
    assert!(report.passed());
    assert_eq!(report.checks.len(), 2);
}
