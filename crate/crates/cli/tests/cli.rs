use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thindom"))
}

fn write_config(dir: &Path, bc: &str) -> PathBuf {
    let p = dir.join(format!("{bc}.json"));
    let text = format!(
        r#"{{"r": 1.0, "R": 2.0, "h": [1.0, 0.3, 0.3], "bc": "{bc}", "grid": {{"n1": 129, "n2": 129}}}}"#
    );
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn eigs_neumann_starts_with_constant_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "neumann");
    let out = tmp.path().join("eigs");
    let o = run(&["eigs", "--config", cfg.to_str().unwrap(), "--n-max", "2", "--m-max", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "bc,n,m,ell,lambda,ang_mult,residual_compat,residual_balance");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..4], &["neumann", "0", "0", "1"]);
    assert_eq!(first[4].parse::<f64>().unwrap(), 0.0);
    let m = manifest(&out);
    assert_eq!(m["command"], "eigs");
    assert_eq!(m["parameters"]["n_max"], "2");
    assert!(m["config_digest"].as_str().unwrap().starts_with("sha256:"));
    let manifests = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().file_name() == "manifest.json").count();
    assert_eq!(manifests, 1);
}

#[test]
fn eigs_dirichlet_has_the_disk_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "dirichlet_lateral");
    let out = tmp.path().join("d");
    let o = run(&["eigs", "--config", cfg.to_str().unwrap(), "--n-max", "1", "--m-max", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let hits = csv
        .lines()
        .skip(1)
        .filter(|l| {
            let v: f64 = l.split(',').nth(4).unwrap().parse().unwrap();
            (v - 5.7831859629).abs() < 1e-9
        })
        .count();
    assert_eq!(hits, 2);
}

#[test]
fn missing_config_is_a_usage_error_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let o = run(&["eigs", "--config", "/nonexistent/cfg.json", "--n-max", "1", "--m-max", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn invalid_config_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, r#"{"r": 1.0, "R": 2.0, "h": [1.0, 0.6, 0.6], "bc": "neumann"}"#).unwrap();
    let out = tmp.path().join("o");
    let o = run(&["eigs", "--config", cfg.to_str().unwrap(), "--n-max", "1", "--m-max", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`h`"), "{}", stderr(&o));
    assert!(!out.exists());
    let o = run(&["eigs", "--config", cfg.to_str().unwrap(), "--n-max", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "neumann");
    let out = tmp.path().join("o");
    let o = run(&[
        "eigs", "--config", cfg.to_str().unwrap(), "--bc", "dirichlet_lateral", "--R", "3", "--n-max", "0", "--m-max", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["parameters"]["bc"], "dirichlet_lateral");
    assert_eq!(m["parameters"]["R"], "3");
    assert!(fs::read_to_string(out.join("spectrum.csv")).unwrap().lines().nth(1).unwrap().starts_with("dirichlet_lateral,"));
}

#[test]
fn verify_passes_at_loose_tolerance_and_fails_at_machine_precision() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "neumann");
    let c = cfg.to_str().unwrap();
    let o = run(&["verify", "--config", c, "--n-max", "1", "--tol", "1e-3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("count n=1"));
    let out = tmp.path().join("v");
    let o = run(&["verify", "--config", c, "--n-max", "0", "--tol", "1e-15", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("MISMATCH"));
    assert!(!table.contains("count n=1"));
    assert_eq!(manifest(&out)["outcome"], "mismatch");
    assert!(out.join("verify.csv").exists());
}

#[test]
fn sweep_writes_csv_and_rejects_bad_lists() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "neumann");
    let c = cfg.to_str().unwrap();
    let out = tmp.path().join("s");
    let o = run(&[
        "sweep", "--config", c, "--eps", "0.4,0.2", "--k", "3", "--rho-cells", "48", "--y-cells", "32", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert_eq!(manifest(&out)["parameters"]["eps"], "0.4,0.2");
    let bad = tmp.path().join("s2");
    let o = run(&["sweep", "--config", c, "--eps", "0.2,0.4", "--k", "3", "--out", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!bad.exists());
}

#[test]
fn simulate_checks_the_reaction_hypotheses() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "neumann");
    let c = cfg.to_str().unwrap();
    let args = |f: &'static str, out: &Path| {
        vec![
            "simulate".to_string(), "--config".into(), c.into(), "--f".into(), f.into(), "--T".into(), "0.2".into(),
            "--dt".into(), "0.01".into(), "--snap".into(), "10".into(), "--n-max".into(), "2".into(),
            "--m-max".into(), "4".into(), "--out".into(), out.to_str().unwrap().into(),
        ]
    };
    let out = tmp.path().join("ok");
    let o = bin().args(args("0,1,0,-1", &out)).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(series.lines().next().unwrap(), "t,mass,energy,compat_residual");
    assert_eq!(series.lines().count(), 1 + 3);
    let snap = fs::read_to_string(out.join("snapshot_00002.csv")).unwrap();
    assert_eq!(snap.lines().next().unwrap(), "sheet,rho,theta,value");
    assert_eq!(manifest(&out)["parameters"]["init"], "bump:1");

    let out = tmp.path().join("h2");
    let o = bin().args(args("0,1", &out)).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("(H2)"));
    assert!(!out.exists());
    let o = bin().args(args("0,0,0,0,-1", &out)).output().unwrap();
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("(H1)"));
}

#[test]
fn modes_export_profiles() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "dirichlet_lateral");
    let out = tmp.path().join("m");
    let o = run(&["modes", "--config", cfg.to_str().unwrap(), "--n", "0", "--m", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for ell in [1, 2] {
        let csv = fs::read_to_string(out.join(format!("mode_bc-dirichlet_lateral_n0_m1_ell{ell}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "component,rho,value");
        // the disk modes vanish on the annulus
        for l in lines.filter(|l| l.starts_with("1,")) {
            assert_eq!(l.split(',').nth(2).unwrap().parse::<f64>().unwrap(), 0.0);
        }
    }
    let none = tmp.path().join("none");
    let o = run(&["modes", "--config", cfg.to_str().unwrap(), "--n", "0", "--m", "0", "--out", none.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!none.exists());
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "neumann");
    let c = cfg.to_str().unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("r{k}"));
        let o = run(&[
            "simulate", "--config", c, "--f", "0,1,0,-1", "--T", "0.1", "--dt", "0.01", "--snap", "5", "--init",
            "random:4:1", "--n-max", "2", "--m-max", "3", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        runs.push((fs::read(out.join("series.csv")).unwrap(), fs::read(out.join("snapshot_00001.csv")).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
}
