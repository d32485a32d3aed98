//! Coefficient-level checks of the momentum, gauge, translation and scaling symmetries.

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use super::{expand, lookup, TorusExpansion};
use crate::error::Result;
use crate::scalar::{cis, Real};
use crate::seqspace::sample_rng;

/// Largest deviation per symmetry, each relative to the sup of the affected order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub trials: usize,
    pub momentum: f64,
    pub gauge: f64,
    pub translation: f64,
    pub scaling: f64,
    /// `max |eta^{(k)}(c e^{i theta}) - eta^{(k)}(c)|`, relative to `sup_j |eta^{(k)}_j|`.
    pub eta_invariance: f64,
}

impl SymmetryReport {
    pub fn max_deviation(&self) -> f64 {
        self.momentum.max(self.gauge).max(self.translation).max(self.scaling)
    }
}

impl<R: Real> TorusExpansion<R> {
    /// Re-expands from transformed amplitudes for `trials` random draws of the angles
    /// `theta_j`, the phase `lambda`, the shift `x` and the dilation `rho in [1/2, 2]`, and
    /// compares against the transformation laws of the coefficients.
    pub fn check_symmetries(&self, trials: usize, seed: u64) -> Result<SymmetryReport> {
        let mut rep = SymmetryReport { trials, ..Default::default() };
        let tau = R::lit(std::f64::consts::TAU);
        for trial in 0..trials {
            let mut rng = sample_rng(seed, trial as u64);
            let theta: Vec<R> = self.window().modes().map(|_| R::lit(rng.gen::<f64>()) * tau).collect();
            let lambda = R::lit(rng.gen::<f64>()) * tau;
            let x = R::lit(rng.gen::<f64>()) * tau;
            let rho = R::lit(rng.gen_range(0.5..2.0));
            let w = self.window();

            // u(c e^{i theta}) = e^{i theta.nu} u(c)
            let c = self.c.map(|j, v| v * cis(theta[w.slot(j)]));
            let t = expand(&c, &self.omega, &self.params)?;
            let theta_lane: Vec<R> = self.lattice.modes().iter().map(|&m| theta[w.slot(m)]).collect();
            let d = self.compare(&t, |_, key, _| cis(self.lattice.dot(key, &theta_lane)), |_| R::one());
            rep.momentum = rep.momentum.max(d.0);
            rep.eta_invariance = rep.eta_invariance.max(d.1);

            // u(c e^{i lambda}) = e^{i lambda} u(c)
            let c = self.c.scale(cis(lambda));
            let t = expand(&c, &self.omega, &self.params)?;
            let d = self.compare(&t, |_, _, _| cis(lambda), |_| R::one());
            rep.gauge = rep.gauge.max(d.0);
            rep.eta_invariance = rep.eta_invariance.max(d.1);

            // u(c e^{i j x}) = e^{i j x} u(c)
            let c = self.c.map(|j, v| v * cis(R::from_int(j as i64) * x));
            let t = expand(&c, &self.omega, &self.params)?;
            let d = self.compare(&t, |j, _, _| cis(R::from_int(j as i64) * x), |_| R::one());
            rep.translation = rep.translation.max(d.0);
            rep.eta_invariance = rep.eta_invariance.max(d.1);

            // u^{(k)}(rho c) = rho^{4k+1} u^{(k)}(c),  eta^{(k)}(rho c) = rho^{4k} eta^{(k)}(c)
            let c = self.c.scale(Complex::new(rho, R::zero()));
            let t = expand(&c, &self.omega, &self.params)?;
            let d = self.compare(
                &t,
                |_, _, k| Complex::new(rho.powi(4 * k as i32 + 1), R::zero()),
                |k| rho.powi(4 * k as i32),
            );
            rep.scaling = rep.scaling.max(d.0.max(d.1));
        }
        Ok(rep)
    }

    // Relative deviations (coefficients, eta) of `other` from the transformed `self`.
    fn compare(
        &self,
        other: &TorusExpansion<R>,
        factor: impl Fn(i32, u128, usize) -> Complex<R>,
        eta_factor: impl Fn(usize) -> R,
    ) -> (f64, f64) {
        let mut worst = 0.0f64;
        for k in 0..=self.order() {
            let mine = &self.prod.u[k];
            let theirs = &other.prod.u[k];
            let sup = self.order_sup(k);
            if sup == R::zero() {
                worst = worst.max(other.order_sup(k).as_f64());
                continue;
            }
            for t in mine {
                let f = factor(t.mom, t.key, k);
                let got = lookup(theirs, t.key).unwrap_or_else(|| Complex::new(R::zero(), R::zero()));
                worst = worst.max(((got - t.val * f).norm() / (sup * f.norm())).as_f64());
            }
            for t in theirs {
                if lookup(mine, t.key).is_none() {
                    let f = factor(t.mom, t.key, k).norm();
                    worst = worst.max((t.val.norm() / (sup * f)).as_f64());
                }
            }
        }
        let mut eta_worst = 0.0f64;
        for k in 1..=self.order() {
            let f = eta_factor(k);
            let sup = self
                .window()
                .modes()
                .map(|j| self.eta_coefficient(k, j).norm())
                .fold(R::zero(), R::max);
            let denom = if sup * f > R::zero() { sup * f } else { R::one() };
            for j in self.window().modes() {
                let d = (other.eta_coefficient(k, j) - self.eta_coefficient(k, j) * f).norm() / denom;
                eta_worst = eta_worst.max(d.as_f64());
            }
        }
        (worst, eta_worst)
    }
}
