use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kinex::config::Config;
use kinex::output::{RunManifest, MANIFEST_FILE, SENTINEL_FILE};

const SMALL: &[&str] = &["--n-agents", "60", "--relax", "20", "--samples", "5", "--gap", "2", "--null-reps", "100"];

fn kinex(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kinex"));
    cmd.args(args).env_remove("KINEX_OUT_DIR").env_remove("SOURCE_DATE_EPOCH");
    if let Some(dir) = env_out {
        cmd.env("KINEX_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn run_small(out: &Path, command: &[&str]) -> Output {
    let mut args = SMALL.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    args.extend(command);
    kinex(&args, None)
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn show_config_of_empty_file_is_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    fs::write(&path, "").unwrap();
    let o = kinex(&["--config", path.to_str().unwrap(), "show-config"], None);
    assert_eq!(code(&o), 0);
    let printed = Config::from_toml(std::str::from_utf8(&o.stdout).unwrap()).unwrap();
    assert_eq!(printed, Config::default());
    assert_eq!(printed.hash(), Config::default().hash());
}

#[test]
fn identical_runs_give_identical_trees() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(code(&run_small(out, &["simulate"])), 0);
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.contains_key(SENTINEL_FILE));
    assert!(ta.contains_key("summary.json"));
    assert_eq!(ta, tb);
}

#[test]
fn replaying_a_manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run_small(&a, &["emergence", "--c2", "0.5,3"])), 0);
    let manifest = a.join(MANIFEST_FILE);
    let o = kinex(&["--out", b.to_str().unwrap(), "replay", manifest.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(tree(&a), tree(&b));
    let m = RunManifest::load(&manifest).unwrap();
    assert_eq!(m.command, "emergence");
    assert_eq!(m.config.emergence.c2_values, [0.5, 3.0]);
}

#[test]
fn full_scan_grid_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["--n-agents", "20", "--relax", "5", "--samples", "3", "--gap", "1", "--null-reps", "50", "--out"];
    for out in [&a, &b] {
        let mut v = args.to_vec();
        v.extend([out.to_str().unwrap(), "scan", "--replicas", "1"]);
        assert_eq!(code(&kinex(&v, None)), 0);
    }
    let table = fs::read_to_string(a.join("dip_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 19 * 20);
    assert_eq!(tree(&a), tree(&b));
}

#[test]
fn env_var_sets_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["trajectory", "--sweeps", "30", "--tracked", "4"]);
    assert_eq!(code(&kinex(&args, Some(dir.path()))), 0);
    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 31);
    assert!(traj.starts_with("t[sweeps],agent,w[size],lambda[1]\n"));
}

#[test]
fn validation_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run_small(&out, &["simulate", "--rule", "sigmoid", "--c1", "0.6", "--c2", "1"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.rule.c1"));
    assert!(!out.exists());

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[model]\nagents = 5\n").unwrap();
    let o = kinex(&["--config", cfg.to_str().unwrap(), "simulate"], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("agents"));

    assert_eq!(code(&kinex(&["no-such-command"], None)), 1);
    assert_eq!(code(&kinex(&["--help"], None)), 0);
}

#[test]
fn runtime_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run_small(&blocker.join("sub"), &["simulate"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("file"));
}

#[test]
fn failed_checks_exit_3_only_in_check_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z");
    // far too small to pass the exponential-limit tolerances
    let o = run_small(&out, &["zipf-laplace", "--growth-pairs", "5"]);
    assert_eq!(code(&o), 0);
    let checks = fs::read_to_string(out.join("checks.csv")).unwrap();
    assert!(checks.contains(",false\n"), "{checks}");
    for name in ["ks_exponential", "zipf_pdf_exponent", "growth_variance", "growth_excess_kurtosis", "ks_laplace"] {
        assert!(checks.contains(name), "{name}");
    }
    let o = run_small(&out, &["--check", "zipf-laplace", "--growth-pairs", "5"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn dip_of_uniform_values_is_not_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.txt");
    let n = 2000;
    let text: String = (0..n).map(|i| format!("{}\n", (i as f64 + 0.5) / n as f64)).collect();
    fs::write(&path, format!("x\n{text}")).unwrap();
    let o = kinex(&["--null-reps", "200", "dip", path.to_str().unwrap()], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], n);
    assert!(v["p_value"].as_f64().unwrap() > 0.05, "{v}");
    assert_eq!(v["verdicts"][1], "unimodal-not-rejected");

    let bimodal: String = (0..n).map(|i| format!("{}\n", if i % 2 == 0 { 0.0 } else { 10.0 } + i as f64 / n as f64)).collect();
    fs::write(&path, bimodal).unwrap();
    let o = kinex(&["--null-reps", "200", "dip", path.to_str().unwrap()], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["p_value"], 0.0);

    fs::write(&path, "1\nabc\n").unwrap();
    assert_eq!(code(&kinex(&["dip", path.to_str().unwrap()], None)), 1);
}
