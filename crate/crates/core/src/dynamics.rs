//! Spectral time integration of the truncated equation, comparison with the torus ansatz,
//! Gevrey-norm tracking and geometric probes of the torus map `c -> c + u(c, omega, eps)`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compat::{CompatSolution, FixedPointParams};
use crate::conv::QuinticWorkspace;
use crate::error::{Error, Result};
use crate::lindstedt::{expand, SolveParams, TorusExpansion};
use crate::nonres::FrequencyVector;
use crate::scalar::{cis, czero, Real};
use crate::seqspace::{GevreyParams, ModeWindow, SpectralSequence, WeightFamily};

/// Step size, sampling and the mass-drift guard of [`evolve_nls`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    /// Largest step; the actual step divides the sampling interval evenly.
    pub dt: f64,
    /// Number of equispaced sampling intervals on `[0, T]`.
    pub samples: usize,
    /// Largest tolerated `|sum |u_j|^2 - sum |W_j|^2|` over the run.
    pub mass_tol: f64,
    /// Step halvings allowed before giving up.
    pub max_halvings: u32,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { dt: 1e-2, samples: 200, mass_tol: 1e-9, max_halvings: 6 }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.samples == 0 || !(self.mass_tol > 0.0) {
            return Err(Error::InvalidParameter("dt, samples and mass_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<R> {
    pub times: Vec<R>,
    pub states: Vec<SpectralSequence<R>>,
    pub step: R,
    pub steps: usize,
    /// Classical order of the stage scheme.
    pub order: u32,
    /// `max_t |sum |u_j(t)|^2 - sum |W_j|^2|`.
    pub mass_drift: f64,
    pub epsilon: R,
}

impl<R: Real> Trajectory<R> {
    pub fn window(&self) -> ModeWindow {
        self.states[0].window()
    }

    pub fn initial(&self) -> &SpectralSequence<R> {
        &self.states[0]
    }
}

// Lawson fourth-order step for u' = i lambda u + i eps P(u).
struct Stepper<R> {
    ws: QuinticWorkspace<R>,
    half: Vec<Complex<R>>,
    full: Vec<Complex<R>>,
    eps: R,
    h: R,
    k: [Vec<Complex<R>>; 4],
    tmp: Vec<Complex<R>>,
}

impl<R: Real> Stepper<R> {
    fn new(lambda: &[R], half_width: i32, eps: R, h: R) -> Self {
        let n = lambda.len();
        let two = R::lit(2.0);
        Self {
            ws: QuinticWorkspace::new(half_width),
            half: lambda.iter().map(|l| cis(*l * h / two)).collect(),
            full: lambda.iter().map(|l| cis(*l * h)).collect(),
            eps,
            h,
            k: std::array::from_fn(|_| vec![czero(); n]),
            tmp: vec![czero(); n],
        }
    }

    fn nonlinear(ws: &mut QuinticWorkspace<R>, eps: R, u: &[Complex<R>], out: &mut [Complex<R>]) {
        ws.apply(u, out);
        let ie = Complex::new(R::zero(), eps);
        for x in out.iter_mut() {
            *x *= ie;
        }
    }

    fn step(&mut self, u: &mut [Complex<R>]) {
        let (h, two, six) = (self.h, R::lit(2.0), R::lit(6.0));
        let hh = h / two;
        let [k1, k2, k3, k4] = &mut self.k;
        Self::nonlinear(&mut self.ws, self.eps, u, k1);
        for i in 0..u.len() {
            self.tmp[i] = self.half[i] * (u[i] + k1[i] * hh);
        }
        Self::nonlinear(&mut self.ws, self.eps, &self.tmp, k2);
        for i in 0..u.len() {
            self.tmp[i] = self.half[i] * u[i] + k2[i] * hh;
        }
        Self::nonlinear(&mut self.ws, self.eps, &self.tmp, k3);
        for i in 0..u.len() {
            self.tmp[i] = self.full[i] * u[i] + self.half[i] * k3[i] * h;
        }
        Self::nonlinear(&mut self.ws, self.eps, &self.tmp, k4);
        for i in 0..u.len() {
            u[i] = self.full[i] * u[i]
                + (self.full[i] * k1[i] + self.half[i] * (k2[i] + k3[i]) * two + k4[i]) * (h / six);
        }
    }
}

fn l2<R: Real>(u: &[Complex<R>]) -> R {
    u.iter().map(|x| x.norm_sqr()).sum()
}

/// Integrates `i (u_j)_t + (j^2 + V_j) u_j + eps (|u|^4 u)_j = 0` on the window of `W` up to
/// `t_end`, sampling `samples + 1` equispaced times including `0`.
///
/// The linear part is propagated exactly; the quintic term uses the window-projected
/// convolution shared with the expansion. The step is halved while the mass drift exceeds
/// `mass_tol`.
pub fn evolve_nls<R: Real>(
    v: &SpectralSequence<R>,
    w: &SpectralSequence<R>,
    eps: R,
    t_end: R,
    ctl: &StepControl,
) -> Result<Trajectory<R>> {
    ctl.validate()?;
    let window = w.window();
    if v.window() != window {
        return Err(Error::InvalidParameter("V and W must share the mode window".into()));
    }
    if !(t_end > R::zero()) {
        return Err(Error::InvalidParameter(format!("T_end must be positive, got {t_end}")));
    }
    let lambda: Vec<R> = window.modes().map(|j| R::from_int(j as i64 * j as i64) + v.re(j)).collect();
    let interval = t_end / R::from_int(ctl.samples as i64);
    let m0 = l2(w.values());

    let mut dt = ctl.dt;
    let mut last = (0.0, 0.0);
    for _ in 0..=ctl.max_halvings {
        let sub = (interval.as_f64() / dt).ceil().max(1.0) as usize;
        let h = interval / R::from_int(sub as i64);
        let mut stepper = Stepper::new(&lambda, window.half_width(), eps, h);
        let mut u = w.values().to_vec();
        let mut times = vec![R::zero()];
        let mut states = vec![w.clone()];
        let mut drift = 0.0f64;
        let mut rejected = None;
        for i in 1..=ctl.samples {
            for _ in 0..sub {
                stepper.step(&mut u);
            }
            let d = (l2(&u) - m0).abs().as_f64();
            drift = drift.max(d);
            let t = interval * R::from_int(i as i64);
            if !(d <= ctl.mass_tol) {
                rejected = Some((t.as_f64(), d));
                break;
            }
            times.push(t);
            states.push(SpectralSequence::new(window, u.clone(), w.family())?);
        }
        match rejected {
            None => {
                return Ok(Trajectory {
                    times,
                    states,
                    step: h,
                    steps: sub * ctl.samples,
                    order: 4,
                    mass_drift: drift,
                    epsilon: eps,
                })
            }
            Some(r) => {
                last = r;
                dt /= 2.0;
            }
        }
    }
    Err(Error::StepRejected { t: last.0, drift: last.1 })
}

/// `sup_t ||u(t) - U(omega t)||_{s,alpha}` with `U` the expansion of `sol` at the trajectory's
/// `eps`. Modes outside the active set of `sol` are compared against the slaved tail, so the
/// error at `t = 0` is the datum defect only when the whole window is active.
pub fn compare_ansatz<R: Real>(traj: &Trajectory<R>, sol: &CompatSolution<R>) -> f64 {
    let t = &sol.expansion;
    let family = WeightFamily::Gevrey(t.gevrey());
    traj.times
        .par_iter()
        .zip(traj.states.par_iter())
        .map(|(time, state)| {
            let phi: Vec<R> = sol.omega.values().iter().map(|w| *w * *time).collect();
            let ansatz = t.evaluate_torus(traj.epsilon, &phi);
            state
                .iter()
                .map(|(j, x)| (x - ansatz.get(j)).norm() * family.weight(j))
                .fold(R::zero(), R::max)
                .as_f64()
        })
        .reduce(|| 0.0, f64::max)
}

/// `max_t ||u(t)||_{s,alpha} / ||u(0)||_{s,alpha}`.
pub fn gevrey_track<R: Real>(traj: &Trajectory<R>, gevrey: &GevreyParams<R>) -> Result<f64> {
    let family = WeightFamily::Gevrey(*gevrey);
    let base = traj.initial().norm_in(family);
    if base == R::zero() {
        return Err(Error::InvalidParameter("initial datum is zero".into()));
    }
    Ok(traj.states.iter().map(|s| (s.norm_in(family) / base).as_f64()).fold(0.0, f64::max))
}

/// `max_t max_j ||u_j(t)|^2 - |u_j(0)|^2| / |u_j(0)|^2` over the given modes.
pub fn action_drift<R: Real>(traj: &Trajectory<R>, modes: &[i32]) -> f64 {
    let w = traj.initial();
    traj.states
        .iter()
        .flat_map(|s| {
            modes.iter().filter(|j| w.get(**j).norm() > R::zero()).map(move |&j| {
                let i0 = w.get(j).norm_sqr();
                ((s.get(j).norm_sqr() - i0) / i0).abs().as_f64()
            })
        })
        .fold(0.0, f64::max)
}

/// Image `c + u(c, omega, eps)` at zero angle of the torus with amplitudes `c`, where `omega`
/// solves `omega = j^2 + V - eta(c, omega, eps)` with `c` held fixed.
#[derive(Clone, Debug)]
pub struct TorusPoint<R> {
    pub image: SpectralSequence<R>,
    pub omega: FrequencyVector<R>,
    pub expansion: TorusExpansion<R>,
    pub iterations: usize,
}

pub fn torus_map<R: Real>(
    c: &SpectralSequence<R>,
    v: &SpectralSequence<R>,
    eps: R,
    p: &SolveParams<R>,
    fix: &FixedPointParams,
) -> Result<TorusPoint<R>> {
    fix.validate()?;
    let window = p.window;
    if c.window() != window || v.window() != window {
        return Err(Error::InvalidParameter("c, V and params must share the mode window".into()));
    }
    let mut params = p.clone();
    params.epsilon = eps;
    let base: Vec<R> = window.modes().map(|j| R::from_int(j as i64 * j as i64) + v.re(j)).collect();
    let mut omega = FrequencyVector::new(window, base.clone())?;
    let mut prev = f64::INFINITY;
    let mut stalled = 0;
    let mut iterations = 0;
    let expansion = loop {
        iterations += 1;
        let t = expand(c, &omega, &params)?;
        let eta = t.eta_total(eps)?;
        let next: Vec<R> = window.modes().map(|j| base[window.slot(j)] - eta.re(j)).collect();
        let update = next
            .iter()
            .zip(omega.values())
            .map(|(a, b)| (*a - *b).abs())
            .fold(R::zero(), R::max)
            .as_f64();
        if update < fix.tol_fix {
            break t;
        }
        omega = FrequencyVector::new(window, next)?;
        stalled = if update >= prev { stalled + 1 } else { 0 };
        prev = update;
        if stalled >= fix.patience {
            return Err(Error::NoContraction { iterations, update });
        }
        if iterations >= fix.max_iter {
            return Err(Error::MaxIterExceeded { iterations, update });
        }
    };
    let image = expansion.evaluate_torus(eps, &vec![R::zero(); window.len()]);
    Ok(TorusPoint { image, omega, expansion, iterations })
}

/// Lower bound on the bi-Lipschitz constant of `theta -> W(c e^{i theta})` over sampled angles.
#[derive(Clone, Debug, Serialize)]
pub struct TorusProbe {
    pub c: Vec<[f64; 2]>,
    /// Modes with `c_j != 0`.
    pub active: Vec<i32>,
    /// `min_{j in active} |c_j| e^{s <j>^alpha}`.
    pub delta_c: f64,
    /// `min ||W(c e^{i theta}) - W(c e^{i theta'})||_{s,alpha} / dist(theta, theta')`.
    pub injectivity_min_gap: f64,
    pub pairs: usize,
}

// Sup over the active coordinates of the circle distance.
fn angle_dist<R: Real>(a: &[R], b: &[R], slots: &[usize]) -> R {
    let tau = R::lit(std::f64::consts::TAU);
    slots
        .iter()
        .map(|&s| {
            let d = (a[s] - b[s]).abs() % tau;
            d.min(tau - d)
        })
        .fold(R::zero(), R::max)
}

/// `thetas` are angle vectors indexed like the window. Uses the identity
/// `W(c e^{i theta}) = U(theta)`, so one expansion serves every sample.
pub fn torus_injectivity_probe<R: Real>(
    c: &SpectralSequence<R>,
    v: &SpectralSequence<R>,
    eps: R,
    p: &SolveParams<R>,
    fix: &FixedPointParams,
    thetas: &[Vec<R>],
) -> Result<TorusProbe> {
    let point = torus_map(c, v, eps, p, fix)?;
    let t = &point.expansion;
    let window = p.window;
    let g = t.gevrey();
    let family = WeightFamily::Gevrey(g);
    let active = t.active_modes().to_vec();
    let slots: Vec<usize> = active.iter().map(|&j| window.slot(j)).collect();
    let delta_c = active.iter().map(|&j| (c.get(j).norm() * g.weight(j)).as_f64()).fold(f64::INFINITY, f64::min);
    let images: Vec<SpectralSequence<R>> = thetas.par_iter().map(|th| t.evaluate_torus(eps, th)).collect();
    let pairs: Vec<(usize, usize)> = (0..thetas.len()).flat_map(|a| (a + 1..thetas.len()).map(move |b| (a, b))).collect();
    let gap = pairs
        .par_iter()
        .filter_map(|&(a, b)| {
            let d = angle_dist(&thetas[a], &thetas[b], &slots);
            if d == R::zero() {
                return None;
            }
            Some((images[a].sub(&images[b]).norm_in(family) / d).as_f64())
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(TorusProbe {
        c: c.to_pairs(),
        active,
        delta_c,
        injectivity_min_gap: gap,
        pairs: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::solve_compatibility;
    use crate::seqspace::{sample_initial_datum, sample_potential, sample_rng, SampleSpec};
    use rand::Rng;

    fn g() -> GevreyParams<f64> {
        GevreyParams::new(1.0, 0.5).unwrap()
    }

    fn setup(jw: i32, seed: u64) -> (SpectralSequence<f64>, SpectralSequence<f64>) {
        let spec = SampleSpec::new(3, g(), seed).unwrap();
        let mut rng = sample_rng(seed, 0);
        let w = ModeWindow::new(jw).unwrap();
        (sample_potential(&spec, w, &mut rng), sample_initial_datum(&spec, w, &mut rng))
    }

    #[test]
    fn linear_flow_is_exact() {
        let (v, w) = setup(4, 1);
        let ctl = StepControl { samples: 50, ..Default::default() };
        let tr = evolve_nls(&v, &w, 0.0, 10.0, &ctl).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            for (j, x) in s.iter() {
                let exact = w.get(j) * cis((j as f64 * j as f64 + v.re(j)) * t);
                assert!((x - exact).norm() < 1e-13);
            }
        }
        assert_eq!(gevrey_track(&tr, &g()).unwrap(), 1.0);
    }

    #[test]
    fn mass_is_conserved() {
        let (v, w) = setup(5, 2);
        let w = w.scale(Complex::new(2.0, 0.0));
        let tr = evolve_nls(&v, &w, 0.1, 50.0, &StepControl::default()).unwrap();
        assert!(tr.mass_drift <= 1e-9, "{}", tr.mass_drift);
        assert_eq!(tr.times.len(), 201);
    }

    #[test]
    fn fourth_order_in_step() {
        let (v, w) = setup(3, 3);
        let w = w.scale(Complex::new(3.0, 0.0));
        let run = |dt: f64| {
            let ctl = StepControl { dt, samples: 1, mass_tol: 1.0, max_halvings: 0 };
            evolve_nls(&v, &w, 0.5, 2.0, &ctl).unwrap().states[1].clone()
        };
        let reference = run(1e-4);
        let e1 = run(0.04).sub(&reference).max_abs();
        let e2 = run(0.02).sub(&reference).max_abs();
        let ratio = e1 / e2;
        assert!(ratio > 13.0 && ratio < 19.0, "{e1} {e2} {ratio}");
    }

    #[test]
    fn step_rejection() {
        let (v, w) = setup(3, 4);
        let w = w.scale(Complex::new(4.0, 0.0));
        let ctl = StepControl { dt: 0.5, samples: 4, mass_tol: 1e-30, max_halvings: 1 };
        let e = evolve_nls(&v, &w, 1.0, 1.0, &ctl).unwrap_err();
        assert_eq!(e.kind(), "StepRejected");
    }

    #[test]
    fn single_mode_orbit() {
        // u_0(t) = c e^{i (V_0 + eps |c|^4) t} solves the truncated equation exactly.
        let w0 = ModeWindow::new(2).unwrap();
        let c0 = Complex::new(0.6, 0.3);
        let w = SpectralSequence::from_fn(w0, WeightFamily::Gevrey(g()), |j| if j == 0 { c0 } else { czero() });
        let v = SpectralSequence::from_real_fn(w0, WeightFamily::Algebraic { k: 3 }, |j| 0.01 * j as f64);
        let eps = 0.2;
        let tr = evolve_nls(&v, &w, eps, 5.0, &StepControl::default()).unwrap();
        let f = 0.0 + eps * c0.norm_sqr().powi(2);
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!((s.get(0) - c0 * cis(f * t)).norm() < 1e-12);
        }
        let sol = solve_compatibility(&v, &w, eps, &SolveParams::new(w0, 3, eps), &FixedPointParams::default()).unwrap();
        assert!(compare_ansatz(&tr, &sol) < 1e-11);
    }

    #[test]
    fn ansatz_matches_at_eps_zero() {
        let (v, w) = setup(3, 5);
        let p = SolveParams::new(w.window(), 2, 0.0);
        let sol = solve_compatibility(&v, &w, 0.0, &p, &FixedPointParams::default()).unwrap();
        let tr = evolve_nls(&v, &w, 0.0, 10.0, &StepControl { samples: 40, ..Default::default() }).unwrap();
        assert!(compare_ansatz(&tr, &sol) < 1e-12);
    }

    #[test]
    fn torus_map_identity_and_scaling() {
        let (v, w) = setup(4, 6);
        let active = vec![-1, 0, 1];
        let c = w.map(|j, x| if active.contains(&j) { x } else { czero() });
        let p = SolveParams::new(c.window(), 3, 1e-3).with_active(active.clone());
        let fix = FixedPointParams::default();

        let flat = torus_map(&c, &v, 0.0, &p, &fix).unwrap();
        assert_eq!(flat.image.sub(&c).max_abs(), 0.0);

        let mut rng = sample_rng(6, 1);
        let theta: Vec<f64> = c.window().modes().map(|_| rng.gen::<f64>() * 6.0).collect();
        let base = torus_map(&c, &v, 1e-3, &p, &fix).unwrap();
        let rotated = c.map(|j, x| x * cis(theta[c.window().slot(j)]));
        let img = torus_map(&rotated, &v, 1e-3, &p, &fix).unwrap().image;
        let direct = base.expansion.evaluate_torus(1e-3, &theta);
        assert!(img.sub(&direct).max_abs() < 1e-14);

        // ||W(c) - c|| is linear in eps at leading order.
        let d1 = base.image.sub(&c).norm_in(WeightFamily::Gevrey(g()));
        let d2 = torus_map(&c, &v, 5e-4, &p, &fix).unwrap().image.sub(&c).norm_in(WeightFamily::Gevrey(g()));
        assert!((d1 / d2 - 2.0).abs() < 0.01, "{}", d1 / d2);
    }

    #[test]
    fn probe_single_mode_chord_arc() {
        let w0 = ModeWindow::new(2).unwrap();
        let c0 = Complex::new(0.3, 0.2);
        let c = SpectralSequence::from_fn(w0, WeightFamily::Gevrey(g()), |j| if j == 0 { c0 } else { czero() });
        let v = SpectralSequence::zeros(w0, WeightFamily::Algebraic { k: 3 });
        let thetas: Vec<Vec<f64>> = (0..24).map(|i| vec![0.0, 0.0, 0.26 * i as f64, 0.0, 0.0]).collect();
        let p = SolveParams::new(w0, 2, 0.0);
        let probe = torus_injectivity_probe(&c, &v, 0.0, &p, &FixedPointParams::default(), &thetas).unwrap();
        let delta = c0.norm() * g().weight(0);
        assert!((probe.delta_c - delta).abs() < 1e-15);
        assert!(probe.injectivity_min_gap >= 2.0 / std::f64::consts::PI * delta);
        // The chord-arc ratio is smallest for the pair farthest apart on the circle.
        assert!(probe.injectivity_min_gap <= delta * (2.0 * (0.13f64).sin()) / 0.26);
    }

    #[test]
    fn probe_perturbation_is_small() {
        let (v, w) = setup(4, 8);
        let active = vec![-1, 0, 1];
        let c = w.map(|j, x| if active.contains(&j) { x } else { czero() });
        let p = SolveParams::new(c.window(), 2, 1e-3).with_active(active);
        let mut rng = sample_rng(8, 3);
        let thetas: Vec<Vec<f64>> = (0..20).map(|_| c.window().modes().map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect()).collect();
        let fix = FixedPointParams::default();
        let flat = torus_injectivity_probe(&c, &v, 0.0, &p, &fix, &thetas).unwrap();
        let pert = torus_injectivity_probe(&c, &v, 1e-3, &p, &fix, &thetas).unwrap();
        assert!(flat.injectivity_min_gap >= 2.0 / std::f64::consts::PI * flat.delta_c);
        assert!((pert.injectivity_min_gap - flat.injectivity_min_gap).abs() < 1e-3);
    }
}
