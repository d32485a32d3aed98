//! Order-by-order solution of the modified equation
//!
//! ```text
//! (omega_j - omega.nu + eta_j) u_{j,nu} + eps (|U|^4 U)_{j,nu} = 0,   nu != e_j
//! eta_j c_j + eps (|U|^4 U)_{j,e_j} = 0
//! ```
//!
//! The quintic term is formed as the product `U Ubar U Ubar U` of sparse Laurent polynomials
//! in the harmonics, carried order by order: `A = U Ubar`, `B = A A`, `P = B U`. Every
//! coefficient has mass 1 and momentum `j`, so it is indexed by its harmonic alone.

mod lattice;
mod poly;
mod residual;
mod symmetry;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonres::FrequencyVector;
use crate::scalar::{bracket, cis, czero, Real};
use crate::seqspace::{GevreyParams, ModeWindow, MultiIndex, SpectralSequence, WeightFamily};

use lattice::{Lattice, Packed};
use poly::{conj_layer, product, Layer, Pair, Term};

pub use residual::ResidualPolynomial;
pub use symmetry::SymmetryReport;

/// Largest supported order; keeps every lane of a packed key inside `i8`.
pub const MAX_ORDER: usize = 24;

/// Truncation and tolerance knobs for [`expand`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveParams<R> {
    /// Maximal order `K`.
    pub order: usize,
    pub epsilon: R,
    /// Floor on `|omega_j - omega.nu|`.
    pub tol_div: R,
    /// Tolerance on the imaginary part of `eta`, relative to `max(1, |eta|)`.
    pub tol_im: R,
    pub window: ModeWindow,
    /// Modes carrying an amplitude. `None` means the support of `c`.
    pub active: Option<Vec<i32>>,
    /// Optional cap `|nu|_alpha <= Lambda` on retained harmonics.
    pub alpha_cap: Option<R>,
    /// Extra residual orders beyond `K + 1` kept by [`TorusExpansion::residual_polynomial`].
    pub residual_tail: usize,
}

impl<R: Real> SolveParams<R> {
    pub fn new(window: ModeWindow, order: usize, epsilon: R) -> Self {
        Self {
            order,
            epsilon,
            tol_div: R::lit(1e-8),
            tol_im: R::lit(1e-12),
            window,
            active: None,
            alpha_cap: None,
            residual_tail: 1,
        }
    }

    pub fn with_active(mut self, active: Vec<i32>) -> Self {
        self.active = Some(active);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 || self.order > MAX_ORDER {
            return Err(Error::InvalidParameter(format!("order K must lie in 1..={MAX_ORDER}, got {}", self.order)));
        }
        if !(self.tol_div > R::zero()) {
            return Err(Error::InvalidParameter("tol_div must be > 0".into()));
        }
        if !(self.tol_im >= R::zero()) {
            return Err(Error::InvalidParameter("tol_im must be >= 0".into()));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter("epsilon must be finite".into()));
        }
        if let Some(cap) = self.alpha_cap {
            if !(cap > R::zero()) {
                return Err(Error::InvalidParameter("alpha_cap must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Harmonic counts and cap pruning of an expansion.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct HarmonicStats {
    /// Stored harmonics per order `0..=K`.
    pub per_order: Vec<usize>,
    /// In-window quintic harmonics discarded by the cap.
    pub pruned: usize,
    /// Largest discarded `|P^{(k)}_{j,nu}|`.
    pub max_pruned: f64,
}

/// Structural invariant tally over every stored coefficient.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InvariantReport {
    pub stored: usize,
    pub mass_violations: usize,
    pub momentum_violations: usize,
    pub normalization_violations: usize,
    /// `max |Im eta^{(k)}_j| / max(1, |eta^{(k)}_j|)`.
    pub eta_imag_residue: f64,
}

impl InvariantReport {
    pub fn holds(&self, tol_im: f64) -> bool {
        self.mass_violations == 0
            && self.momentum_violations == 0
            && self.normalization_violations == 0
            && self.eta_imag_residue <= tol_im
    }
}

#[derive(Clone, Debug)]
struct Products<R> {
    u: Vec<Layer<R>>,
    ubar: Vec<Layer<R>>,
    a: Vec<Layer<R>>,
    b: Vec<Layer<R>>,
    p: Vec<Layer<R>>,
}

/// Coefficients `u^{(k)}_{j,nu}` for `0 <= k <= K` and counterterms `eta^{(k)}_j` for `1 <= k <= K`.
#[derive(Clone, Debug)]
pub struct TorusExpansion<R> {
    params: SolveParams<R>,
    gevrey: GevreyParams<R>,
    c: SpectralSequence<R>,
    omega: FrequencyVector<R>,
    lattice: Lattice,
    omega_lane: Vec<R>,
    alpha_lane: Vec<R>,
    // eta[k - 1][slot(j)], complex as computed
    eta: Vec<Vec<Complex<R>>>,
    prod: Products<R>,
    stats: HarmonicStats,
}

/// Solves the modified equation order by order up to `p.order`.
pub fn expand<R: Real>(c: &SpectralSequence<R>, omega: &FrequencyVector<R>, p: &SolveParams<R>) -> Result<TorusExpansion<R>> {
    p.validate()?;
    let window = p.window;
    if c.window() != window || omega.window() != window {
        return Err(Error::InvalidParameter("c, omega and params must share the mode window".into()));
    }
    let gevrey = match c.family() {
        WeightFamily::Gevrey(g) => g,
        WeightFamily::Algebraic { .. } => {
            return Err(Error::InvalidParameter("amplitudes c must carry a Gevrey weight".into()))
        }
    };
    let active = match &p.active {
        Some(a) => a.clone(),
        None => c.support(),
    };
    let lattice = Lattice::new(window, active)?;
    for j in window.modes() {
        let nonzero = c.get(j) != czero();
        if lattice.is_active(j) && !nonzero {
            return Err(Error::ZeroAmplitude(j));
        }
        if !lattice.is_active(j) && nonzero {
            return Err(Error::InvalidParameter(format!("c_{j} is nonzero but mode {j} is not active")));
        }
    }

    let omega_lane: Vec<R> = lattice.modes().iter().map(|&m| omega.get(m)).collect();
    let alpha_lane = lattice.alpha_weights(gevrey.alpha);

    let mut u0: Layer<R> = lattice
        .modes()
        .iter()
        .map(|&j| Term { key: lattice.unit(j).unwrap(), mom: j, val: c.get(j) })
        .collect();
    u0.sort_unstable_by_key(|t| t.key);
    let ubar0 = conj_layer(&u0);

    let mut t = TorusExpansion {
        params: p.clone(),
        gevrey,
        c: c.clone(),
        omega: omega.clone(),
        lattice,
        omega_lane,
        alpha_lane,
        eta: Vec::with_capacity(p.order),
        prod: Products { u: vec![u0], ubar: vec![ubar0], a: vec![], b: vec![], p: vec![] },
        stats: HarmonicStats::default(),
    };

    for k in 1..=p.order {
        let m = t.extend_products();
        debug_assert_eq!(m, k - 1);
        t.solve_order(k)?;
    }
    t.stats.per_order = t.prod.u.iter().map(|l| l.len()).collect();
    Ok(t)
}

fn lookup<R: Real>(layer: &Layer<R>, key: Packed) -> Option<Complex<R>> {
    layer.binary_search_by_key(&key, |t| t.key).ok().map(|i| layer[i].val)
}

impl<R: Real> TorusExpansion<R> {
    pub fn params(&self) -> &SolveParams<R> {
        &self.params
    }

    pub fn order(&self) -> usize {
        self.params.order
    }

    pub fn window(&self) -> ModeWindow {
        self.params.window
    }

    pub fn gevrey(&self) -> GevreyParams<R> {
        self.gevrey
    }

    pub fn amplitudes(&self) -> &SpectralSequence<R> {
        &self.c
    }

    pub fn omega(&self) -> &FrequencyVector<R> {
        &self.omega
    }

    pub fn active_modes(&self) -> &[i32] {
        self.lattice.modes()
    }

    pub fn stats(&self) -> &HarmonicStats {
        &self.stats
    }

    fn admissible(&self, key: Packed) -> bool {
        match self.params.alpha_cap {
            None => true,
            Some(cap) => self.lattice.alpha_norm(key, &self.alpha_lane) <= cap * (R::one() + R::lit(1e-12)),
        }
    }

    /// Computes `A_m, B_m, P_m` for the next `m`, treating orders above `K` as zero.
    /// Returns `m`.
    fn extend_products(&mut self) -> usize {
        let m = self.prod.p.len();
        let (a, b, p) = next_products(&self.prod, m, self.params.window.half_width());
        let (kept, pruned, max_pruned) = self.apply_cap(p);
        self.stats.pruned += pruned;
        self.stats.max_pruned = self.stats.max_pruned.max(max_pruned);
        self.prod.a.push(a);
        self.prod.b.push(b);
        self.prod.p.push(kept);
        m
    }

    fn apply_cap(&self, p: Layer<R>) -> (Layer<R>, usize, f64) {
        if self.params.alpha_cap.is_none() {
            return (p, 0, 0.0);
        }
        let mut pruned = 0;
        let mut max_pruned = 0.0f64;
        let kept = p
            .into_iter()
            .filter(|t| {
                let ok = self.admissible(t.key);
                if !ok {
                    pruned += 1;
                    max_pruned = max_pruned.max(t.val.norm().as_f64());
                }
                ok
            })
            .collect();
        (kept, pruned, max_pruned)
    }

    fn solve_order(&mut self, k: usize) -> Result<()> {
        let window = self.params.window;
        let pk = &self.prod.p[k - 1];

        let mut eta_k = vec![czero(); window.len()];
        for &j in self.lattice.modes() {
            let e = self.lattice.unit(j).unwrap();
            let pv = lookup(pk, e).unwrap_or_else(czero);
            eta_k[window.slot(j)] = -pv / self.c.get(j);
        }
        self.eta.push(eta_k);

        // Harmonics: those of P^{(k-1)} and of the lower corrections.
        let mut keys: Vec<(Packed, i32)> = pk.iter().map(|t| (t.key, t.mom)).collect();
        for m in 1..k {
            keys.extend(self.prod.u[m].iter().map(|t| (t.key, t.mom)));
        }
        keys.sort_unstable();
        keys.dedup();

        let mut layer: Layer<R> = Vec::with_capacity(keys.len());
        for (key, j) in keys {
            if self.lattice.unit(j) == Some(key) {
                continue;
            }
            let mut num = lookup(pk, key).unwrap_or_else(czero);
            for k1 in 1..k {
                if let Some(u) = lookup(&self.prod.u[k - k1], key) {
                    num += self.eta[k1 - 1][window.slot(j)] * u;
                }
            }
            if num == czero() {
                continue;
            }
            let div = self.omega.get(j) - self.lattice.dot(key, &self.omega_lane);
            if !(div.abs() >= self.params.tol_div) {
                return Err(Error::SmallDivisorBreach {
                    j,
                    nu: self.lattice.unpack(key).encode(),
                    value: div.abs().as_f64(),
                });
            }
            layer.push(Term { key, mom: j, val: -num / div });
        }
        self.prod.ubar.push(conj_layer(&layer));
        self.prod.u.push(layer);
        Ok(())
    }

    /// `eta^{(k)}_j` as computed (complex), `1 <= k <= K`.
    pub fn eta_coefficient(&self, k: usize, j: i32) -> Complex<R> {
        if k == 0 || k > self.eta.len() || !self.params.window.contains(j) {
            return czero();
        }
        self.eta[k - 1][self.params.window.slot(j)]
    }

    /// `u^{(k)}_{j,nu}`; zero when absent or when `j` differs from the momentum of `nu`.
    pub fn coefficient(&self, k: usize, j: i32, nu: &MultiIndex) -> Complex<R> {
        if k > self.order() || nu.momentum() != j as i64 {
            return czero();
        }
        match self.lattice.pack(nu) {
            Some(key) => lookup(&self.prod.u[k], key).unwrap_or_else(czero),
            None => czero(),
        }
    }

    /// Stored `(j, nu, u^{(k)}_{j,nu})` sorted by `(j, nu)`.
    pub fn coefficients(&self, k: usize) -> Vec<(i32, MultiIndex, Complex<R>)> {
        let mut rows: Vec<_> = self.prod.u[k]
            .iter()
            .map(|t| (t.mom, self.lattice.unpack(t.key), t.val))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        rows
    }

    /// `P^{(k)}_{j,nu}`, the order-`k` part of `(|U|^4 U)_{j,nu}`. Orders up to `K` are
    /// available. Harmonics removed by the cap read as zero.
    pub fn quintic_coefficient(&self, k: usize, j: i32, nu: &MultiIndex) -> Result<Complex<R>> {
        if k > self.order() {
            return Err(Error::OrderNotPopulated { k, populated: self.order() });
        }
        if nu.momentum() != j as i64 || nu.mass() != 1 {
            return Ok(czero());
        }
        let Some(key) = self.lattice.pack(nu) else {
            return Ok(czero());
        };
        if k < self.prod.p.len() {
            return Ok(lookup(&self.prod.p[k], key).unwrap_or_else(czero));
        }
        let layers = self.continued_quintic(k);
        Ok(lookup(&layers[k], key).unwrap_or_else(czero))
    }

    /// All stored `(j, nu, P^{(k)}_{j,nu})` for `k <= K`, sorted by `(j, nu)`.
    pub fn quintic_layer(&self, k: usize) -> Result<Vec<(i32, MultiIndex, Complex<R>)>> {
        if k > self.order() {
            return Err(Error::OrderNotPopulated { k, populated: self.order() });
        }
        let layers;
        let layer = if k < self.prod.p.len() {
            &self.prod.p[k]
        } else {
            layers = self.continued_quintic(k);
            &layers[k]
        };
        let mut rows: Vec<_> = layer.iter().map(|t| (t.mom, self.lattice.unpack(t.key), t.val)).collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        Ok(rows)
    }

    // P layers 0..=upto, continuing the recursion with u^{(k)} = 0 for k > K.
    fn continued_quintic(&self, upto: usize) -> Vec<Layer<R>> {
        let mut prod = self.prod.clone();
        let j = self.params.window.half_width();
        while prod.p.len() <= upto {
            let m = prod.p.len();
            let (a, b, p) = next_products(&prod, m, j);
            let p = p.into_iter().filter(|t| self.admissible(t.key)).collect();
            prod.a.push(a);
            prod.b.push(b);
            prod.p.push(p);
        }
        prod.p
    }

    /// `eta^{(k)}_j` with the imaginary residue checked against `tol_im`.
    pub fn eta_real(&self, k: usize) -> Result<Vec<R>> {
        let tol = self.params.tol_im;
        self.params
            .window
            .modes()
            .map(|j| {
                let e = self.eta_coefficient(k, j);
                if e.im.abs() > tol * R::one().max(e.norm()) {
                    Err(Error::ImaginaryResidue { j, value: e.im.as_f64() })
                } else {
                    Ok(e.re)
                }
            })
            .collect()
    }

    /// `eta_j = sum_{k=1}^K eps^k eta^{(k)}_j` (real).
    pub fn eta_total(&self, eps: R) -> Result<SpectralSequence<R>> {
        let window = self.params.window;
        let mut total = vec![R::zero(); window.len()];
        let mut pow = R::one();
        for k in 1..=self.order() {
            pow *= eps;
            for (slot, e) in self.eta_real(k)?.into_iter().enumerate() {
                total[slot] += pow * e;
            }
        }
        let values = total.into_iter().map(|x| Complex::new(x, R::zero())).collect();
        SpectralSequence::new(window, values, WeightFamily::Algebraic { k: 0 })
    }

    /// `u_j(phi) = sum_k eps^k sum_nu u^{(k)}_{j,nu} e^{i nu.phi}`; `phi` is indexed like the window.
    pub fn evaluate_torus(&self, eps: R, phi: &[R]) -> SpectralSequence<R> {
        let window = self.params.window;
        assert_eq!(phi.len(), window.len(), "angle vector must cover the window");
        let phi_lane: Vec<R> = self.lattice.modes().iter().map(|&m| phi[window.slot(m)]).collect();
        let mut out = vec![czero(); window.len()];
        let mut pow = R::one();
        for (k, layer) in self.prod.u.iter().enumerate() {
            if k > 0 {
                pow *= eps;
                if pow == R::zero() {
                    break;
                }
            }
            for t in layer {
                let ph = self.lattice.dot(t.key, &phi_lane);
                out[window.slot(t.mom)] += t.val * cis(ph) * pow;
            }
        }
        SpectralSequence::new(window, out, WeightFamily::Gevrey(self.gevrey)).expect("window length")
    }

    /// Physical residual of the modified equation at the angle `phi`, computed without the
    /// order expansion of the quintic term:
    /// `sup_j |sum_nu (omega_j + eta_j - omega.nu) u_{j,nu} e^{i nu.phi} + eps (|u|^4 u)_j(phi)|`.
    ///
    /// It coincides with the modified-equation residual only when no harmonic cap is set.
    pub fn torus_residual(&self, eps: R, phi: &[R]) -> Result<R> {
        let window = self.params.window;
        let eta = self.eta_total(eps)?;
        let phi_lane: Vec<R> = self.lattice.modes().iter().map(|&m| phi[window.slot(m)]).collect();
        let mut lin: Vec<Complex<R>> = vec![czero(); window.len()];
        let mut pow = R::one();
        for (k, layer) in self.prod.u.iter().enumerate() {
            if k > 0 {
                pow *= eps;
            }
            for t in layer {
                let d = self.omega.get(t.mom) + eta.re(t.mom) - self.lattice.dot(t.key, &self.omega_lane);
                let ph = self.lattice.dot(t.key, &phi_lane);
                lin[window.slot(t.mom)] += t.val * cis(ph) * (pow * d);
            }
        }
        let u = self.evaluate_torus(eps, phi);
        let q = crate::conv::quintic_window(u.values(), window.half_width());
        Ok(lin
            .iter()
            .zip(&q)
            .map(|(l, q)| (*l + *q * eps).norm())
            .fold(R::zero(), R::max))
    }

    /// Tally of the mass, momentum and normalization invariants plus the `eta` imaginary residue.
    pub fn check_invariants(&self) -> InvariantReport {
        let mut rep = InvariantReport::default();
        for (k, layer) in self.prod.u.iter().enumerate() {
            for t in layer {
                rep.stored += 1;
                let nu = self.lattice.unpack(t.key);
                if nu.mass() != 1 {
                    rep.mass_violations += 1;
                }
                if nu.momentum() != t.mom as i64 || self.lattice.momentum(t.key) != t.mom {
                    rep.momentum_violations += 1;
                }
                let is_unit = self.lattice.unit(t.mom) == Some(t.key);
                if (k == 0) != is_unit || (k == 0 && t.val != self.c.get(t.mom)) {
                    rep.normalization_violations += 1;
                }
            }
        }
        for row in &self.eta {
            for e in row {
                let r = e.im.abs() / R::one().max(e.norm());
                rep.eta_imag_residue = rep.eta_imag_residue.max(r.as_f64());
            }
        }
        rep
    }

    /// Smallest `D` with `|u^{(k)}_{j,nu}| e^{s1 |nu|_alpha} e^{s2 <j>^alpha} <= D^k` over the
    /// stored corrections.
    pub fn empirical_decay(&self, s1: R, s2: R) -> R {
        let alpha = self.gevrey.alpha;
        let mut d = R::zero();
        for (k, layer) in self.prod.u.iter().enumerate().skip(1) {
            for t in layer {
                let w = (s1 * self.lattice.alpha_norm(t.key, &self.alpha_lane)
                    + s2 * bracket::<R>(t.mom).powf(alpha))
                .exp();
                let v = (t.val.norm() * w).powf(R::one() / R::from_int(k as i64));
                d = d.max(v);
            }
        }
        d
    }

    /// Sup of `|u^{(k)}_{j,nu}|` over stored harmonics of order `k`.
    pub fn order_sup(&self, k: usize) -> R {
        self.prod.u[k].iter().map(|t| t.val.norm()).fold(R::zero(), R::max)
    }

    /// Smallest `|omega_j - omega.nu|` over the stored corrections.
    pub fn min_divisor(&self) -> Option<R> {
        self.prod
            .u
            .iter()
            .skip(1)
            .flatten()
            .map(|t| (self.omega.get(t.mom) - self.lattice.dot(t.key, &self.omega_lane)).abs())
            .reduce(R::min)
    }
}

// A_m = sum U_a Ubar_{m-a};  B_m = sum A_a A_{m-a} (|mom| <= 2J);  P_m = sum B_a U_{m-a} (|mom| <= J).
fn next_products<R: Real>(prod: &Products<R>, m: usize, half: i32) -> (Layer<R>, Layer<R>, Layer<R>) {
    let empty: Layer<R> = Vec::new();
    let u = |k: usize| prod.u.get(k).unwrap_or(&empty);
    let ubar = |k: usize| prod.ubar.get(k).unwrap_or(&empty);

    let pairs: Vec<Pair<'_, R>> = (0..=m).map(|a| Pair { x: u(a), y: ubar(m - a), scale: R::one() }).collect();
    let a_m = product(&pairs, |_, _| true);

    let two = R::lit(2.0);
    let b_m = {
        let a_of = |k: usize| if k == m { &a_m } else { &prod.a[k] };
        let pairs: Vec<Pair<'_, R>> = (0..=m / 2)
            .map(|a| Pair { x: a_of(a), y: a_of(m - a), scale: if 2 * a == m { R::one() } else { two } })
            .collect();
        product(&pairs, |mom, _| mom.abs() <= 2 * half)
    };

    let p_m = {
        let b_of = |k: usize| if k == m { &b_m } else { &prod.b[k] };
        let pairs: Vec<Pair<'_, R>> = (0..=m).map(|a| Pair { x: b_of(a), y: u(m - a), scale: R::one() }).collect();
        product(&pairs, |mom, _| mom.abs() <= half)
    };
    (a_m, b_m, p_m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GevreyParams<f64> {
        GevreyParams::new(1.0, 0.5).unwrap()
    }

    pub(crate) fn single_mode(c0: Complex<f64>, jw: i32) -> SpectralSequence<f64> {
        let w = ModeWindow::new(jw).unwrap();
        SpectralSequence::from_fn(w, WeightFamily::Gevrey(g()), |j| if j == 0 { c0 } else { czero() })
    }

    #[test]
    fn single_mode_closed_form() {
        let c0 = Complex::new(0.3, -0.4);
        let c = single_mode(c0, 3);
        let w = FrequencyVector::squares(c.window());
        let t = expand(&c, &w, &SolveParams::new(c.window(), 3, 1e-3)).unwrap();
        let r4 = c0.norm_sqr().powi(2);
        assert!((t.eta_coefficient(1, 0) - Complex::new(-r4, 0.0)).norm() < 1e-15);
        // A single harmonic never leaves e_0: eta^{(k>1)} vanish and so do all corrections.
        assert_eq!(t.stats().per_order, vec![1, 0, 0, 0]);
        assert_eq!(t.eta_coefficient(2, 0), czero());
        let eta = t.eta_total(1e-3).unwrap();
        assert!((eta.re(0) + 1e-3 * r4).abs() < 1e-18);
        assert_eq!(t.eta_total(0.0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn zero_amplitude_rejected() {
        let c = single_mode(Complex::new(0.3, 0.0), 2);
        let w = FrequencyVector::squares(c.window());
        let p = SolveParams::new(c.window(), 1, 1e-3).with_active(vec![0, 1]);
        assert!(matches!(expand(&c, &w, &p), Err(Error::ZeroAmplitude(1))));
    }

    #[test]
    fn resonant_frequency_breaches_floor() {
        let w = ModeWindow::new(2).unwrap();
        let c = SpectralSequence::from_fn(w, WeightFamily::Gevrey(g()), |j| {
            if j.abs() <= 1 { Complex::new(0.3, 0.1 * j as f64) } else { czero() }
        });
        // omega_1 + omega_{-1} - 2 omega_0 = 0 makes nu = e_1 + e_{-1} - e_0 resonant with e_0.
        let om = FrequencyVector::from_fn(w, |j| if j.abs() <= 1 { 0.5 } else { (j * j) as f64 }).unwrap();
        let p = SolveParams::new(w, 2, 1e-3);
        assert!(matches!(expand(&c, &om, &p), Err(Error::SmallDivisorBreach { .. })));
    }

    #[test]
    fn evaluate_at_zero_epsilon_is_linear() {
        let w = ModeWindow::new(3).unwrap();
        let c = SpectralSequence::from_fn(w, WeightFamily::Gevrey(g()), |j| {
            if j.abs() <= 1 { Complex::new(0.2 + 0.05 * j as f64, 0.1) } else { czero() }
        });
        let om = FrequencyVector::from_fn(w, |j| (j * j) as f64 + 0.2 * (1.7 * j as f64 + 0.4).sin() / (j.abs().max(1) as f64).powi(3)).unwrap();
        let t = expand(&c, &om, &SolveParams::new(w, 2, 1e-3)).unwrap();
        let phi: Vec<f64> = (0..7).map(|i| 0.3 * i as f64).collect();
        let u = t.evaluate_torus(0.0, &phi);
        for j in w.modes() {
            let want = c.get(j) * cis(phi[w.slot(j)]);
            assert!((u.get(j) - want).norm() < 1e-15);
        }
        assert!(t.check_invariants().holds(1e-12));
    }
}
