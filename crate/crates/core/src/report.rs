//! Run reports, check tables and the JSON/CSV artifact writers.
//!
//! Floats are written in shortest round-trip form, so equal inputs give byte-identical files.
//! Non-finite values appear as `null` in JSON and as `inf`/`NaN` in CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::lindstedt::TorusExpansion;
use crate::measure::MeasureEstimate;
use crate::nonres::DivisorRow;
use crate::scalar::Real;
use crate::seqspace::SpectralSequence;

/// File name every subcommand writes its report under.
pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Option<f64>,
    pub limit: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub diagnostics: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            diagnostics: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn diag(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.diagnostics.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Records `value <= limit`.
    pub fn check_le(&mut self, name: &str, value: f64, limit: f64) {
        self.checks.push(Check { name: name.into(), pass: value <= limit, value: Some(value), limit: Some(limit) });
    }

    pub fn check(&mut self, name: &str, pass: bool) {
        self.checks.push(Check { name: name.into(), pass, value: None, limit: None });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `report.json` and `checks.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(REPORT_FILE), self)?;
        write_csv(
            &dir.join("checks.csv"),
            &["name", "pass", "value", "limit"],
            self.checks.iter().map(|c| vec![c.name.clone(), c.pass.to_string(), opt(c.value), opt(c.limit)]),
        )
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Shortest round-trip text of `x`, matching the JSON writer (`1e-14`, `0.5`, `inf`).
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float")
    } else {
        x.to_string()
    }
}

/// Collects every `report.json` below `dir` except earlier aggregates into one report whose
/// check names are prefixed with the run directory.
pub fn aggregate(dir: &Path) -> Result<RunReport> {
    let mut files = Vec::new();
    collect(dir, &mut files)?;
    files.sort();
    let mut out = RunReport::new("report", json!({ "dir": dir.display().to_string() }));
    let mut runs = Vec::new();
    for f in files {
        let rep: RunReport = serde_json::from_str(&fs::read_to_string(&f)?)?;
        if rep.command == "report" {
            continue;
        }
        let rel = f.parent().and_then(|p| p.strip_prefix(dir).ok()).unwrap_or(Path::new(""));
        let prefix = rel.display().to_string();
        runs.push(json!({ "dir": prefix, "command": rep.command, "pass": rep.all_pass() }));
        for c in rep.checks {
            out.checks.push(Check { name: format!("{prefix}/{}", c.name), ..c });
        }
    }
    out.diag("runs", runs)?;
    Ok(out)
}

fn collect(dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(&path, files)?;
        } else if path.file_name().is_some_and(|n| n == REPORT_FILE) {
            files.push(path);
        }
    }
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn write_csv<I, S>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<S>>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
    w.write_record(header).map_err(std::io::Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

/// `[[re, im], ...]` ordered `j = -J..J`.
pub fn sequence_json<R: Real>(x: &SpectralSequence<R>) -> Value {
    json!(x.to_pairs())
}

/// `expansion.json` (parameters, counts, norms, empirical decay), `eta.csv` and one
/// `order_k.csv` per order with rows `(j, nu, re, im)`.
pub fn write_expansion<R: Real>(dir: &Path, t: &TorusExpansion<R>, eps: R) -> Result<()> {
    let p = t.params();
    let g = t.gevrey();
    let inv = t.check_invariants();
    let sups: Vec<f64> = (0..=t.order()).map(|k| t.order_sup(k).as_f64()).collect();
    let manifest = json!({
        "J": p.window.half_width(),
        "order": p.order,
        "epsilon": eps.as_f64(),
        "active": t.active_modes(),
        "alpha_cap": p.alpha_cap.map(|a| a.as_f64()),
        "gevrey": { "s": g.s.as_f64(), "alpha": g.alpha.as_f64() },
        "c": sequence_json(t.amplitudes()),
        "omega": t.omega().values().iter().map(|w| w.as_f64()).collect::<Vec<_>>(),
        "harmonics": t.stats(),
        "order_sup": sups,
        "empirical_decay": t.empirical_decay(g.s / R::lit(2.0), g.s / R::lit(2.0)).as_f64(),
        "min_divisor": t.min_divisor().map(|d| d.as_f64()),
        "invariants": inv,
        "files": (0..=t.order()).map(|k| format!("order_{k}.csv")).collect::<Vec<_>>(),
    });
    write_json(&dir.join("expansion.json"), &manifest)?;
    for k in 0..=t.order() {
        write_csv(
            &dir.join(format!("order_{k}.csv")),
            &["j", "nu", "re", "im"],
            t.coefficients(k).into_iter().map(|(j, nu, v)| {
                vec![j.to_string(), nu.encode(), num(v.re.as_f64()), num(v.im.as_f64())]
            }),
        )?;
    }
    let window = p.window;
    let mut rows = Vec::new();
    for k in 1..=t.order() {
        for j in window.modes() {
            let e = t.eta_coefficient(k, j);
            rows.push(vec![k.to_string(), j.to_string(), num(e.re.as_f64()), num(e.im.as_f64())]);
        }
    }
    write_csv(&dir.join("eta.csv"), &["k", "j", "re", "im"], rows)
}

/// `trajectory.csv` with rows `(t, j, re, im)`.
pub fn write_trajectory<R: Real>(dir: &Path, traj: &Trajectory<R>) -> Result<()> {
    let rows = traj.times.iter().zip(&traj.states).flat_map(|(t, s)| {
        s.iter()
            .map(|(j, x)| vec![num(t.as_f64()), j.to_string(), num(x.re.as_f64()), num(x.im.as_f64())])
            .collect::<Vec<_>>()
    });
    write_csv(&dir.join("trajectory.csv"), &["t", "j", "re", "im"], rows)
}

pub fn write_estimates(path: &Path, est: &[MeasureEstimate]) -> Result<()> {
    write_csv(
        path,
        &["target", "mode", "samples", "indeterminate", "estimate", "stderr", "bound", "pass"],
        est.iter().map(|e| {
            vec![
                e.target.clone(),
                e.mode.clone(),
                e.samples.to_string(),
                e.indeterminate.to_string(),
                num(e.estimate),
                num(e.std_error),
                num(e.bound),
                e.pass.to_string(),
            ]
        }),
    )
}

pub fn write_divisors(path: &Path, rows: &[DivisorRow]) -> Result<()> {
    write_csv(
        path,
        &["nu", "divisor", "delta", "margin"],
        rows.iter().map(|r| vec![r.nu.encode(), num(r.divisor), num(r.delta), num(r.margin)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(cmd: &str, pass: bool) -> RunReport {
        let mut r = RunReport::new(cmd, json!({ "seed": 1 }));
        r.check_le("defect", if pass { 1e-14 } else { 1.0 }, 1e-10);
        r.check("converged", true);
        r
    }

    #[test]
    fn empty_directory_aggregates_to_empty_report() {
        let d = tempfile::tempdir().unwrap();
        let r = aggregate(d.path()).unwrap();
        assert!(r.checks.is_empty());
        assert!(r.all_pass());
    }

    #[test]
    fn aggregate_prefixes_and_skips_aggregates() {
        let d = tempfile::tempdir().unwrap();
        for (name, pass) in [("a", true), ("b", false)] {
            let sub = d.path().join(name);
            fs::create_dir(&sub).unwrap();
            sample("solve", pass).write(&sub).unwrap();
        }
        let agg = d.path().join("agg");
        fs::create_dir(&agg).unwrap();
        sample("report", false).write(&agg).unwrap();

        let r = aggregate(d.path()).unwrap();
        let names: Vec<_> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["a/defect", "a/converged", "b/defect", "b/converged"]);
        assert!(!r.all_pass());
        assert!(!r.checks[2].pass);
    }

    #[test]
    fn report_round_trips_and_is_stable() {
        let d = tempfile::tempdir().unwrap();
        let r = sample("nonres", true);
        r.write(d.path()).unwrap();
        let a = fs::read(d.path().join(REPORT_FILE)).unwrap();
        r.write(d.path()).unwrap();
        assert_eq!(a, fs::read(d.path().join(REPORT_FILE)).unwrap());
        let back: RunReport = serde_json::from_slice(&a).unwrap();
        assert_eq!(back, r);
        let csv = fs::read_to_string(d.path().join("checks.csv")).unwrap();
        assert_eq!(csv, "name,pass,value,limit\ndefect,true,1e-14,1e-10\nconverged,true,,\n");
    }
}
