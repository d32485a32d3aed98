//! Compatibility fixed point `omega_j + eta_j = j^2 + V_j`, `u(., 0) = W`, and the asymptotic
//! splitting of the counterterm into `a_0 + sum_q a_q / j^q + r_j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindstedt::{expand, SolveParams, TorusExpansion};
use crate::nonres::FrequencyVector;
use crate::scalar::{bracket, czero, Real};
use crate::seqspace::{ModeWindow, SpectralSequence, WeightFamily};

/// Stopping and damping rules of the fixed-point iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointParams {
    /// Stop once the sup-norm update of `(c, omega)` falls below this.
    pub tol_fix: f64,
    pub max_iter: usize,
    /// Consecutive non-decreasing updates tolerated before giving up.
    pub patience: usize,
    /// Relaxation factor in `(0, 1]`.
    pub relaxation: f64,
    /// Modes with `|j| > J - boundary_margin` are left out of the defect norms.
    pub boundary_margin: i32,
}

impl Default for FixedPointParams {
    fn default() -> Self {
        Self { tol_fix: 1e-13, max_iter: 200, patience: 5, relaxation: 1.0, boundary_margin: 2 }
    }
}

impl FixedPointParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_fix > 0.0) || self.max_iter == 0 || self.patience == 0 {
            return Err(Error::InvalidParameter("tol_fix, max_iter and patience must be positive".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidParameter(format!("relaxation must lie in (0,1], got {}", self.relaxation)));
        }
        if self.boundary_margin < 0 {
            return Err(Error::InvalidParameter("boundary_margin must be >= 0".into()));
        }
        Ok(())
    }
}

/// Converged `(c, omega, eta)` and the expansion built from them.
#[derive(Clone, Debug)]
pub struct CompatSolution<R> {
    pub c: SpectralSequence<R>,
    pub omega: FrequencyVector<R>,
    pub eta: SpectralSequence<R>,
    pub expansion: TorusExpansion<R>,
    pub iterations: usize,
    pub final_update_norm: f64,
    pub update_history: Vec<f64>,
    /// Largest ratio of consecutive updates after the first step, among updates above the
    /// rounding floor.
    pub contraction_ratio: f64,
    /// `max_j |omega_j + eta_j - j^2 - V_j|` over the interior modes.
    pub compat_defect: f64,
    /// `||u(., 0) - W||_{s,alpha}` over the interior active modes.
    pub datum_defect: f64,
    /// `||u(., 0)||_{s,alpha}` over the inactive modes: the tail slaved to the active amplitudes.
    pub slaved_tail: f64,
}

fn squares<R: Real>(j: i32) -> R {
    R::from_int(j as i64 * j as i64)
}

/// Solves for `(c, omega)` with `c + u(c, omega, eps) = W` on the active modes and
/// `omega_j + eta_j(c, omega, eps) = j^2 + V_j`, by direct iteration
/// `c <- W - u(c, omega)`, `omega <- j^2 + V - eta(c, omega)`.
///
/// The active set is `p.active` or, when unset, the support of `W`. `W` must vanish elsewhere.
pub fn solve_compatibility<R: Real>(
    v: &SpectralSequence<R>,
    w: &SpectralSequence<R>,
    eps: R,
    p: &SolveParams<R>,
    fix: &FixedPointParams,
) -> Result<CompatSolution<R>> {
    fix.validate()?;
    let window = p.window;
    if v.window() != window || w.window() != window {
        return Err(Error::InvalidParameter("V, W and params must share the mode window".into()));
    }
    let active = p.active.clone().unwrap_or_else(|| w.support());
    if let Some(j) = window.modes().find(|j| !active.contains(j) && w.get(*j) != czero()) {
        return Err(Error::InvalidParameter(format!("W_{j} is nonzero outside the active set")));
    }
    if let Some(j) = active.iter().find(|j| w.get(**j) == czero()) {
        return Err(Error::ZeroAmplitude(*j));
    }
    let mut params = p.clone();
    params.active = Some(active.clone());
    params.epsilon = eps;

    let theta = R::lit(fix.relaxation);
    let base: Vec<R> = window.modes().map(|j| squares::<R>(j) + v.re(j)).collect();
    let mut c = w.clone();
    let mut omega = FrequencyVector::new(window, base.clone())?;
    let zero_phi = vec![R::zero(); window.len()];

    let mut history: Vec<f64> = Vec::new();
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let t = expand(&c, &omega, &params)?;
        let u0 = t.evaluate_torus(eps, &zero_phi);
        let eta = t.eta_total(eps)?;

        let c_new = c.map(|j, cj| {
            if active.contains(&j) {
                let target = w.get(j) - (u0.get(j) - cj);
                cj + (target - cj) * theta
            } else {
                czero()
            }
        });
        let om_new: Vec<R> = window
            .modes()
            .map(|j| {
                let cur = omega.get(j);
                let target = base[window.slot(j)] - eta.re(j);
                cur + (target - cur) * theta
            })
            .collect();

        let dc = c_new.sub(&c).max_abs();
        let dw = om_new
            .iter()
            .zip(omega.values())
            .map(|(a, b)| (*a - *b).abs())
            .fold(R::zero(), R::max);
        let update = dc.max(dw).as_f64();
        c = c_new;
        omega = FrequencyVector::new(window, om_new)?;

        if let Some(&prev) = history.last() {
            if update >= prev {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        history.push(update);
        if update < fix.tol_fix {
            break;
        }
        if stalled >= fix.patience {
            return Err(Error::NoContraction { iterations, update });
        }
        if iterations >= fix.max_iter {
            return Err(Error::MaxIterExceeded { iterations, update });
        }
    }

    let expansion = expand(&c, &omega, &params)?;
    let eta = expansion.eta_total(eps)?;
    let u0 = expansion.evaluate_torus(eps, &zero_phi);
    let interior: Vec<i32> = window.interior(fix.boundary_margin).collect();

    let compat_defect = interior
        .iter()
        .map(|&j| (omega.get(j) + eta.re(j) - squares::<R>(j) - v.re(j)).abs())
        .fold(R::zero(), R::max)
        .as_f64();
    let diff = u0.sub(&w.clone().with_family(u0.family()));
    let datum_defect = diff
        .weighted_sup(interior.iter().copied().filter(|j| active.contains(j)))
        .as_f64();
    let slaved_tail = u0
        .weighted_sup(window.modes().filter(|j| !active.contains(j)))
        .as_f64();

    let floor = 1e3 * f64::EPSILON;
    let contraction_ratio = history
        .windows(2)
        .skip(1)
        .filter(|p| p[0] > floor)
        .map(|p| p[1] / p[0])
        .fold(0.0, f64::max);

    Ok(CompatSolution {
        c,
        omega,
        eta,
        expansion,
        iterations,
        final_update_norm: *history.last().unwrap(),
        update_history: history,
        contraction_ratio,
        compat_defect,
        datum_defect,
        slaved_tail,
    })
}

/// Coefficients `kappa_0` and `kappa_q` (`q = 2..N-1`) of the asymptotic frequency profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub k0: f64,
    /// `kq[i]` multiplies `j^{-(i+2)}`.
    pub kq: Vec<f64>,
}

fn profile(k0: f64, kq: &[f64], j: i32) -> f64 {
    if j == 0 {
        return k0;
    }
    let jf = j as f64;
    k0 + kq.iter().enumerate().map(|(i, a)| a / jf.powi(i as i32 + 2)).sum::<f64>()
}

/// `omega_j = j^2 + kappa_0 + sum_q kappa_q / j^q + xi_j`, and `omega_0 = kappa_0 + xi_0`.
pub fn omega_from_zeta<R: Real>(kappa: &Kappa, xi: &SpectralSequence<R>) -> Result<FrequencyVector<R>> {
    FrequencyVector::from_fn(xi.window(), |j| {
        squares::<R>(j) + R::lit(profile(kappa.k0, &kappa.kq, j)) + xi.re(j)
    })
}

/// Least-squares splitting `eta_j = a_0 + sum_{q=2}^{N-1} a_q / j^q + r_j`.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticFit {
    pub a0: f64,
    /// `aq[i]` multiplies `j^{-(i+2)}`.
    pub aq: Vec<f64>,
    /// `r = eta - fit` on the whole window, measured in `l^{N,inf}`.
    #[serde(skip)]
    pub remainder: SpectralSequence<f64>,
    pub fit_window: Vec<i32>,
    /// `||r||_{N,inf}` restricted to the fit window.
    pub residual_norm: f64,
    /// Fit modes within two of the window edge, where truncation effects are largest.
    pub boundary_modes: Vec<i32>,
    pub rcond: f64,
}

impl AsymptoticFit {
    pub fn kappa(&self) -> Kappa {
        Kappa { k0: self.a0, kq: self.aq.clone() }
    }
}

/// Default fit modes: `J/2 <= |j| <= J`.
pub fn default_fit_window(window: ModeWindow) -> Vec<i32> {
    let j = window.half_width();
    window.modes().filter(|m| 2 * m.abs() >= j).collect()
}

/// Weighted least squares (row weights `<j>^N`) of `eta` against `1, j^{-2}, ..., j^{-(N-1)}`.
pub fn asymptotic_fit<R: Real>(eta: &SpectralSequence<R>, n: u32, fit_window: &[i32]) -> Result<AsymptoticFit> {
    let window = eta.window();
    let jw = window.half_width();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("N must be >= 3, got {n}")));
    }
    let mut modes = fit_window.to_vec();
    modes.sort_unstable();
    modes.dedup();
    if let Some(j) = modes.iter().find(|j| !(2 * j.abs() >= jw && j.abs() <= jw)) {
        return Err(Error::InvalidParameter(format!("fit mode {j} outside J/2 <= |j| <= J")));
    }
    if modes.len() < n as usize {
        return Err(Error::InvalidParameter(format!(
            "fit window has {} modes, at least N = {n} needed",
            modes.len()
        )));
    }
    let cols = (n - 1) as usize;
    let basis = |j: i32, col: usize| -> f64 {
        if col == 0 {
            1.0
        } else {
            (j as f64).powi(-(col as i32 + 1))
        }
    };
    let weight = |j: i32| bracket::<f64>(j).powi(n as i32);
    let a = DMatrix::from_fn(modes.len(), cols, |r, c| weight(modes[r]) * basis(modes[r], c));
    let b = DVector::from_fn(modes.len(), |r, _| weight(modes[r]) * eta.re(modes[r]).as_f64());

    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let rcond = if smax > 0.0 { smin / smax } else { 0.0 };
    if !(rcond > 1e3 * f64::EPSILON) {
        return Err(Error::RankDeficient { rcond });
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::InvalidParameter(format!("least-squares solve failed: {e}")))?;

    let a0 = x[0];
    let aq: Vec<f64> = (1..cols).map(|i| x[i]).collect();
    let remainder = SpectralSequence::from_real_fn(window, WeightFamily::Algebraic { k: n }, |j| {
        eta.re(j).as_f64() - profile(a0, &aq, j)
    });
    let residual_norm = remainder.weighted_sup(modes.iter().copied());
    let boundary_modes = modes.iter().copied().filter(|j| j.abs() > jw - 2).collect();
    Ok(AsymptoticFit { a0, aq, remainder, fit_window: modes, residual_norm, boundary_modes, rcond })
}

/// `max ||f(x) - f(x')|| / ||x - x'||` over the pairs, norms taken in the declared families of
/// the sequences. Pairs with `x = x'` are skipped.
pub fn lipschitz_probe<R, F>(map: F, pairs: &[(SpectralSequence<R>, SpectralSequence<R>)]) -> Result<f64>
where
    R: Real,
    F: Fn(&SpectralSequence<R>) -> Result<SpectralSequence<R>>,
{
    let mut best = 0.0f64;
    for (x, y) in pairs {
        let dx = x.sub(y).norm();
        if dx == R::zero() {
            continue;
        }
        let fx = map(x)?;
        let fy = map(y)?;
        let dy = fx.sub(&fy).norm();
        best = best.max((dy / dx).as_f64());
    }
    Ok(best)
}

/// Converts a real counterterm sequence into the complex-valued storage used elsewhere.
pub fn real_sequence<R: Real>(window: ModeWindow, values: &[f64], n: u32) -> SpectralSequence<R> {
    SpectralSequence::from_fn(window, WeightFamily::Algebraic { k: n }, |j| {
        Complex::new(R::lit(values[window.slot(j)]), R::zero())
    })
}
