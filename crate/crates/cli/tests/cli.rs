use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nls-tori"))
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

struct Run {
    code: i32,
    stdout: Value,
    dir: Option<PathBuf>,
}

fn run(args: &[&str], config: Option<&Path>, out: &Path) -> Run {
    let mut cmd = bin();
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    let o = cmd.output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    let stdout: Value = serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stdout: {text}"));
    let dir = stdout.get("run_dir").and_then(|d| d.as_str()).map(PathBuf::from);
    Run { code: o.status.code().unwrap(), stdout, dir }
}

fn sample() -> Value {
    json!({ "N": 3, "gevrey": { "s": 1.0, "alpha": 0.5 } })
}

fn single_mode(eps: f64) -> Value {
    json!({
        "J": 2,
        "seed": 3,
        "sample": sample(),
        "expansion": { "K": 2, "epsilon": eps },
        "explicit": { "datum": [[0.0, 0.0], [0.0, 0.0], [0.6, 0.8], [0.0, 0.0], [0.0, 0.0]] },
        "symmetry_trials": 2
    })
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn golden_single_mode_counterterm() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &single_mode(1e-3));
    let r = run(&["counterterm"], Some(&cfg), tmp.path());
    assert_eq!(r.code, 0, "{}", r.stdout);
    let dir = r.dir.unwrap();
    let rep = read_json(&dir.join("report.json"));
    // eta_0 = -eps |c_0|^4 with |c_0| = 1.
    let eta = rep["diagnostics"]["eta_total"].as_array().unwrap();
    assert!((eta[2].as_f64().unwrap() + 1e-3).abs() < 1e-18);
    let csv = fs::read_to_string(dir.join("eta.csv")).unwrap();
    assert!(csv.lines().any(|l| l == "1,0,-1.0,0.0"), "{csv}");
    assert!(dir.join("timing.txt").exists());
    let manifest = read_json(&dir.join("expansion.json"));
    assert_eq!(manifest["harmonics"]["per_order"], json!([1, 0, 0]));
}

#[test]
fn zero_epsilon_gives_trivial_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = single_mode(0.0);
    c["explicit"]["datum"] = json!([[0.1, 0.0], [0.2, 0.1], [0.3, 0.0], [0.0, 0.1], [0.05, 0.0]]);
    let cfg = write_config(tmp.path(), "c.json", &c);
    let r = run(&["counterterm"], Some(&cfg), tmp.path());
    assert_eq!(r.code, 0, "{}", r.stdout);
    let rep = read_json(&r.dir.unwrap().join("report.json"));
    assert!(rep["diagnostics"]["eta_total"].as_array().unwrap().iter().all(|x| x.as_f64() == Some(0.0)));
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.txt")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        &json!({
            "J": 4,
            "seed": 11,
            "sample": sample(),
            "expansion": { "K": 2, "epsilon": 1e-3, "active": [-1, 0, 1] }
        }),
    );
    let a = run(&["solve", "--threads", "1"], Some(&cfg), &tmp.path().join("a"));
    let b = run(&["solve", "--threads", "4"], Some(&cfg), &tmp.path().join("b"));
    assert_eq!(a.code, 0, "{}", a.stdout);
    let (fa, fb) = (artifacts(&a.dir.unwrap()), artifacts(&b.dir.unwrap()));
    assert!(fa.len() >= 6);
    assert_eq!(fa, fb);

    let c = run(&["solve", "--seed", "12"], Some(&cfg), &tmp.path().join("c"));
    let fc = artifacts(&c.dir.unwrap());
    let sol = |f: &[(String, Vec<u8>)]| f.iter().find(|x| x.0 == "solution.json").unwrap().1.clone();
    assert_ne!(sol(&fa), sol(&fc));
    let rep: Value = serde_json::from_slice(&fc.iter().find(|x| x.0 == "report.json").unwrap().1).unwrap();
    assert_eq!(rep["config"]["seed"], 12);
}

#[test]
fn unknown_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = single_mode(1e-3);
    c["bogus"] = json!(1);
    let cfg = write_config(tmp.path(), "c.json", &c);
    let r = run(&["counterterm"], Some(&cfg), tmp.path());
    assert_eq!(r.code, 2);
    assert_eq!(r.stdout["error"], "Parse");
}

#[test]
fn solver_errors_exit_nonzero_with_json() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = single_mode(1e-3);
    c["expansion"]["active"] = json!([0, 1]);
    let cfg = write_config(tmp.path(), "c.json", &c);
    let r = run(&["counterterm"], Some(&cfg), tmp.path());
    assert_eq!(r.code, 2);
    assert_eq!(r.stdout["error"], "ZeroAmplitude");
}

#[test]
fn report_of_empty_directory_is_empty_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(&["report"], None, tmp.path());
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout["checks"], 0);
}

#[test]
fn report_flags_failing_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let runs = tmp.path().join("runs");
    let nonres = |omega: &str| {
        json!({
            "J": 3,
            "seed": 5,
            "sample": sample(),
            "omega": omega,
            "catalogue": { "x_max": 6.0, "l1_max": 4, "alpha": 0.5 },
            "gamma": 0.01
        })
    };
    let good = write_config(tmp.path(), "good.json", &nonres("linear"));
    let bad = write_config(tmp.path(), "bad.json", &nonres("squares"));
    let g = run(&["nonres"], Some(&good), &runs);
    assert_eq!(g.code, 0, "{}", g.stdout);
    let b = run(&["nonres"], Some(&bad), &runs);
    assert_eq!(b.code, 1);
    let summary = read_json(&b.dir.unwrap().join("nonres.json"));
    assert_eq!(summary["diophantine"]["worst_nu"], json!({ "-1": -1, "1": 1 }));

    let r = run(&["report"], None, &runs);
    assert_eq!(r.code, 1);
    let failed = r.stdout["failed"].as_array().unwrap();
    assert!(failed.iter().all(|f| f.as_str().unwrap().starts_with("nonres-")));
    assert_eq!(failed.len(), 2);
    // An aggregate is never folded into a later aggregate.
    let again = run(&["report"], None, &runs);
    assert_eq!(again.stdout["checks"], r.stdout["checks"]);
}

#[test]
fn measure_and_evolve_smoke() {
    let tmp = tempfile::tempdir().unwrap();
    let m = write_config(
        tmp.path(),
        "m.json",
        &json!({
            "J": 3,
            "seed": 2,
            "sample": sample(),
            "samples": 2000,
            "resonant": [{ "nu": { "1": 1, "-1": -1 }, "delta": 0.05 }],
            "good_fraction": { "catalogue": { "x_max": 4.0, "l1_max": 4, "alpha": 0.5 }, "gammas": [0.1] },
            "bourgain_l1": 6
        }),
    );
    let r = run(&["measure"], Some(&m), tmp.path());
    assert_eq!(r.code, 0, "{}", r.stdout);
    let csv = fs::read_to_string(r.dir.unwrap().join("estimates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let e = write_config(
        tmp.path(),
        "e.json",
        &json!({
            "J": 2,
            "seed": 4,
            "sample": sample(),
            "epsilon": 1e-3,
            "t_end": 5.0,
            "step": { "samples": 20 },
            "ansatz": { "K": 2, "epsilon": 1e-3 },
            "max_ansatz_error": 1e-8,
            "probe": { "angles": 6 }
        }),
    );
    let r = run(&["evolve"], Some(&e), tmp.path());
    assert_eq!(r.code, 0, "{}", r.stdout);
    let dir = r.dir.unwrap();
    assert_eq!(fs::read_to_string(dir.join("trajectory.csv")).unwrap().lines().count(), 1 + 21 * 5);
    let s = read_json(&dir.join("evolve.json"));
    assert!(s["probe"]["injectivity_min_gap"].as_f64().unwrap() > 0.0);
}
