//! Subcommand bodies. Each writes its artifacts into the run directory and returns the report.

use std::path::Path;

use num_complex::Complex;
use rand::Rng;
use serde_json::json;

use nls_tori::compat::{asymptotic_fit, default_fit_window, solve_compatibility};
use nls_tori::dynamics::{action_drift, compare_ansatz, evolve_nls, gevrey_track, torus_injectivity_probe};
use nls_tori::lindstedt::expand;
use nls_tori::measure::{bourgain_sum, good_parameter_fraction, resonant_probability, FrequencyMode, FullSolve};
use nls_tori::nonres::{
    beta0, bryuno_function, bryuno_star, diophantine_test, divisor_rows, DiophantineParams, FrequencyVector, NuCatalogue,
};
use nls_tori::report::{self, write_json, RunReport};
use nls_tori::seqspace::{sample_initial_datum, sample_potential, sample_rng, ModeWindow, SampleSpec, SpectralSequence};
use nls_tori::{Error, Result};

use crate::config::*;

// Main draw of (V, W) for a run: stream 0 of the seed.
fn draw(spec: &SampleSpec, window: ModeWindow) -> (SpectralSequence<f64>, SpectralSequence<f64>) {
    let mut rng = sample_rng(spec.seed, 0);
    let v = sample_potential(spec, window, &mut rng);
    let w = sample_initial_datum(spec, window, &mut rng);
    (v, w)
}

fn restrict(w: &SpectralSequence<f64>, active: &[i32]) -> SpectralSequence<f64> {
    w.map(|j, x| if active.contains(&j) { x } else { Complex::new(0.0, 0.0) })
}

pub fn counterterm(cfg: &CountertermConfig, dir: &Path) -> Result<RunReport> {
    let window = ModeWindow::new(cfg.j)?;
    let spec = cfg.sample.spec(cfg.seed)?;
    let (v, w) = draw(&spec, window);
    let v = cfg.explicit.potential(window, spec.n, v)?;
    let w = cfg.explicit.datum(window, spec.gevrey, w)?;
    let p = cfg.expansion.params(&w)?;
    let c = restrict(&w, p.active.as_deref().unwrap_or(&[]));
    let omega = match &cfg.omega {
        Some(om) => FrequencyVector::new(window, om.clone())?,
        None => FrequencyVector::from_potential(&v)?,
    };
    let eps = p.epsilon;
    let t = expand(&c, &omega, &p)?;
    report::write_expansion(dir, &t, eps)?;

    let mut rep = RunReport::new("counterterm", serde_json::to_value(cfg)?);
    let tol = cfg.check_tol;
    let inv = t.check_invariants();
    rep.check("invariants", inv.holds(p.tol_im));
    rep.diag("invariants", &inv)?;
    rep.diag("eta_total", t.eta_total(eps)?.values().iter().map(|x| x.re).collect::<Vec<_>>())?;
    rep.diag("harmonics", t.stats())?;
    rep.diag("min_divisor", t.min_divisor())?;

    for m in 1..=t.order() {
        let scale = t.order_sup(m).max(t.order_sup(m - 1)).max(1.0);
        rep.check_le(&format!("resolved_order_{m}"), t.resolved_order_defect(m)? / scale, tol);
    }
    if cfg.symmetry_trials > 0 {
        let sym = t.check_symmetries(cfg.symmetry_trials, cfg.seed)?;
        rep.check_le("symmetry", sym.max_deviation(), tol);
        rep.check_le("eta_invariance", sym.eta_invariance, tol);
        rep.diag("symmetry", &sym)?;
    }
    if eps != 0.0 {
        let poly = t.residual_polynomial()?;
        let r1 = poly.eval(eps);
        let r2 = poly.eval(eps / 2.0);
        rep.diag("residual", json!({ "eps": r1, "eps_half": r2, "order_sups": poly.order_sups() }))?;
        if r1 > 0.0 {
            let target = 2f64.powi(t.order() as i32 + 1);
            let ratio = r1 / r2;
            rep.diag("residual_ratio", ratio)?;
            rep.check("residual_scaling", ratio >= target / 1.5 && ratio <= 1.5 * target);
        }
    }
    Ok(rep)
}

pub fn solve(cfg: &SolveConfig, dir: &Path) -> Result<RunReport> {
    let window = ModeWindow::new(cfg.j)?;
    let spec = cfg.sample.spec(cfg.seed)?;
    let (v, w) = draw(&spec, window);
    let v = cfg.explicit.potential(window, spec.n, v)?;
    let w = cfg.explicit.datum(window, spec.gevrey, w)?;
    let p = cfg.expansion.params(&w)?;
    let w = restrict(&w, p.active.as_deref().unwrap_or(&[]));
    let sol = solve_compatibility(&v, &w, p.epsilon, &p, &cfg.fixed_point)?;
    report::write_expansion(dir, &sol.expansion, p.epsilon)?;

    let fit_window = cfg.fit_window.clone().unwrap_or_else(|| default_fit_window(window));
    let fit = match asymptotic_fit(&sol.eta, spec.n, &fit_window) {
        Ok(f) => json!(f),
        Err(e) => json!({ "error": e.kind(), "message": e.to_string() }),
    };
    let manifest = json!({
        "potential": report::sequence_json(&v),
        "datum": report::sequence_json(&w),
        "c": report::sequence_json(&sol.c),
        "omega": sol.omega.values(),
        "eta": sol.eta.values().iter().map(|x| x.re).collect::<Vec<_>>(),
        "iterations": sol.iterations,
        "update_history": sol.update_history,
        "final_update_norm": sol.final_update_norm,
        "contraction_ratio": sol.contraction_ratio,
        "compat_defect": sol.compat_defect,
        "datum_defect": sol.datum_defect,
        "slaved_tail": sol.slaved_tail,
        "asymptotic_fit": fit,
    });
    write_json(&dir.join("solution.json"), &manifest)?;

    let mut rep = RunReport::new("solve", serde_json::to_value(cfg)?);
    rep.check_le("compat_defect", sol.compat_defect, cfg.defect_tol);
    rep.check_le("datum_defect", sol.datum_defect, cfg.defect_tol);
    rep.check_le("contraction_ratio", sol.contraction_ratio, 1.0);
    rep.check("invariants", sol.expansion.check_invariants().holds(p.tol_im));
    rep.diag("iterations", sol.iterations)?;
    rep.diag("slaved_tail", sol.slaved_tail)?;
    rep.diag("asymptotic_fit", &manifest["asymptotic_fit"])?;
    Ok(rep)
}

pub fn nonres(cfg: &NonresConfig, dir: &Path) -> Result<RunReport> {
    let window = ModeWindow::new(cfg.j)?;
    let spec = cfg.sample.spec(cfg.seed)?;
    let (v, _) = draw(&spec, window);
    let v = cfg.explicit.potential(window, spec.n, v)?;
    let omega = match cfg.omega {
        OmegaSource::Linear => FrequencyVector::from_potential(&v)?,
        OmegaSource::Squares => FrequencyVector::squares(window),
    };
    let tau = cfg.tau.unwrap_or(spec.n as f64 + 1.0);
    let p = DiophantineParams::new(cfg.gamma, tau)?;
    let cat = NuCatalogue::generate(window, cfg.catalogue);
    if cat.is_empty() {
        return Err(Error::InvalidParameter("catalogue bounds admit no multi-index".into()));
    }
    let scales = cfg.bryuno_scales.unwrap_or_else(|| cfg.catalogue.x_max.log2().floor().max(0.0) as u32);
    let test = diophantine_test(&omega, &p, &cat);
    let bryuno = bryuno_function(&omega, scales, &cat, cfg.zero_tol)?;
    let star = bryuno_star(p.gamma, p.tau, scales, &cat)?;
    let beta: Vec<f64> = (1..=scales)
        .map(|m| beta0(&omega, 2f64.powi(m as i32), &cat))
        .collect::<Result<_>>()?;

    write_json(&dir.join("catalogue.json"), &cat.to_json())?;
    report::write_divisors(&dir.join("divisors.csv"), &divisor_rows(&omega, &p, &cat))?;
    let summary = json!({
        "omega": omega.values(),
        "gamma": p.gamma,
        "tau": p.tau,
        "catalogue_size": cat.len(),
        "diophantine": test,
        "beta0": beta,
        "bryuno": bryuno,
        "bryuno_star": star,
    });
    write_json(&dir.join("nonres.json"), &summary)?;

    let mut rep = RunReport::new("nonres", serde_json::to_value(cfg)?);
    rep.check("diophantine", test.pass);
    rep.check("bryuno_finite", bryuno.is_finite());
    rep.diag("worst_margin", test.worst_margin)?;
    rep.diag("worst_nu", test.worst_nu.map(|n| n.encode()))?;
    rep.diag("bryuno", bryuno)?;
    Ok(rep)
}

pub fn measure(cfg: &MeasureConfig, dir: &Path) -> Result<RunReport> {
    let window = ModeWindow::new(cfg.j)?;
    let spec = cfg.sample.spec(cfg.seed)?;
    let mode = match cfg.mode {
        MeasureMode::Linear => FrequencyMode::Linear,
        MeasureMode::Full => {
            let e = cfg
                .expansion
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("full mode needs an expansion block".into()))?;
            let active = e.active.clone().unwrap_or_else(|| window.modes().collect());
            let params = e.params_on(window, active)?;
            FrequencyMode::Full(Box::new(FullSolve { params, fix: cfg.fixed_point.clone() }))
        }
    };
    let samples = cfg.samples.unwrap_or(match cfg.mode {
        MeasureMode::Linear => 100_000,
        MeasureMode::Full => 1_000,
    });

    let mut est = Vec::new();
    for t in &cfg.resonant {
        est.push(resonant_probability(&t.nu, t.delta, &spec, window, samples, &mode)?);
    }
    if let Some(g) = &cfg.good_fraction {
        let cat = NuCatalogue::generate(window, g.catalogue);
        let tau = g.tau.unwrap_or(spec.n as f64 + 1.0);
        for &gamma in &g.gammas {
            let p = DiophantineParams::new(gamma, tau)?;
            est.push(good_parameter_fraction(&p, &cat, &spec, window, samples, &mode)?);
        }
    }
    let bourgain = cfg.bourgain_l1.map(|l| bourgain_sum(window, l));
    report::write_estimates(&dir.join("estimates.csv"), &est)?;
    write_json(&dir.join("measure.json"), &json!({ "estimates": est, "bourgain": bourgain }))?;

    let mut rep = RunReport::new("measure", serde_json::to_value(cfg)?);
    for e in &est {
        rep.check(&e.target, e.pass);
        if e.indeterminate > 0 {
            rep.check_le(&format!("{} indeterminate", e.target), e.indeterminate as f64 / e.samples as f64, 0.1 * e.bound);
        }
    }
    if let Some(b) = &bourgain {
        rep.diag("bourgain", b)?;
    }
    Ok(rep)
}

pub fn evolve(cfg: &EvolveConfig, dir: &Path) -> Result<RunReport> {
    let window = ModeWindow::new(cfg.j)?;
    let spec = cfg.sample.spec(cfg.seed)?;
    let (v, w) = draw(&spec, window);
    let v = cfg.explicit.potential(window, spec.n, v)?;
    let w = cfg.explicit.datum(window, spec.gevrey, w)?;
    let active = cfg.active.clone().unwrap_or_else(|| w.support());
    let w = restrict(&w, &active).scale(Complex::new(cfg.amplitude_scale, 0.0));
    let traj = evolve_nls(&v, &w, cfg.epsilon, cfg.t_end, &cfg.step)?;
    if cfg.write_trajectory {
        report::write_trajectory(dir, &traj)?;
    }
    let gevrey = gevrey_track(&traj, &spec.gevrey)?;
    let actions = action_drift(&traj, &active);

    let mut rep = RunReport::new("evolve", serde_json::to_value(cfg)?);
    rep.check_le("mass_drift", traj.mass_drift, cfg.step.mass_tol);
    rep.check_le("gevrey_ratio", gevrey, cfg.gevrey_limit);
    let mut summary = json!({
        "step": traj.step,
        "steps": traj.steps,
        "order": traj.order,
        "mass_drift": traj.mass_drift,
        "gevrey_ratio": gevrey,
        "action_drift": actions,
    });

    if let Some(e) = &cfg.ansatz {
        if e.epsilon != cfg.epsilon {
            return Err(Error::InvalidParameter("ansatz epsilon must equal the run epsilon".into()));
        }
        let p = e.params_on(window, e.active.clone().unwrap_or_else(|| active.clone()))?;
        let sol = solve_compatibility(&v, &w, cfg.epsilon, &p, &cfg.fixed_point)?;
        let err = compare_ansatz(&traj, &sol);
        summary["ansatz_error"] = json!(err);
        summary["datum_defect"] = json!(sol.datum_defect);
        if let Some(limit) = cfg.max_ansatz_error {
            rep.check_le("ansatz_error", err, limit);
        }
        if let Some(pr) = &cfg.probe {
            let mut rng = sample_rng(cfg.seed, 1);
            let thetas: Vec<Vec<f64>> = (0..pr.angles)
                .map(|_| window.modes().map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect())
                .collect();
            let probe = torus_injectivity_probe(&sol.c, &v, cfg.epsilon, &p, &cfg.fixed_point, &thetas)?;
            rep.check("injectivity_gap_positive", probe.injectivity_min_gap > 0.0);
            summary["probe"] = json!(probe);
        }
    }
    rep.diag("evolve", &summary)?;
    write_json(&dir.join("evolve.json"), &summary)?;
    Ok(rep)
}
