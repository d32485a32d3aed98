//! Small divisors, weak Bryuno / Diophantine checks and the `delta_nu` weights.
//!
//! The infimum over all zero-sum multi-indices is replaced by a finite [`NuCatalogue`]
//! bounded in l1 norm and in `|nu|_{alpha/2}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{bracket, Real};
use crate::seqspace::{ModeWindow, MultiIndex, SpectralSequence};

/// Relative slack for `|nu|_{alpha/2} <= x` comparisons, so that e.g. `|e_1 - e_{-1}| = 2`
/// is admissible at `x = 2` whatever the rounding in the norm.
const ADMISSIBLE_SLACK: f64 = 1e-12;

/// Frequencies `omega_j` over a window, constrained to `|omega_j - j^2| <= 1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyVector<R> {
    window: ModeWindow,
    values: Vec<R>,
}

impl<R: Real> FrequencyVector<R> {
    pub fn new(window: ModeWindow, values: Vec<R>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "frequency vector has {} entries, window needs {}",
                values.len(),
                window.len()
            )));
        }
        let half = R::lit(0.5);
        for (j, w) in window.modes().zip(&values) {
            let dev = (*w - R::from_int((j as i64) * (j as i64))).abs();
            if !(dev <= half) {
                return Err(Error::OutOfQ { j, deviation: dev.as_f64() });
            }
        }
        Ok(Self { window, values })
    }

    pub fn from_fn(window: ModeWindow, f: impl FnMut(i32) -> R) -> Result<Self> {
        Self::new(window, window.modes().map(f).collect())
    }

    /// The unperturbed spectrum `omega_j = j^2`.
    pub fn squares(window: ModeWindow) -> Self {
        Self::from_fn(window, |j| R::from_int((j as i64) * (j as i64))).expect("j^2 lies in Q")
    }

    /// `omega_j = j^2 + V_j`.
    pub fn from_potential(v: &SpectralSequence<R>) -> Result<Self> {
        Self::from_fn(v.window(), |j| R::from_int((j as i64) * (j as i64)) + v.re(j))
    }

    #[inline]
    pub fn window(&self) -> ModeWindow {
        self.window
    }

    #[inline]
    pub fn get(&self, j: i32) -> R {
        self.values[self.window.slot(j)]
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, R)> + '_ {
        self.window.modes().zip(self.values.iter().copied())
    }

    /// `omega . nu`, summed in increasing mode order.
    pub fn dot(&self, nu: &MultiIndex) -> R {
        debug_assert!(nu.fits(&self.window));
        nu.iter().map(|(m, v)| self.get(m) * R::from_int(v as i64)).sum()
    }

    /// Adds the same constant to every frequency.
    pub fn shifted(&self, kappa: R) -> Result<Self> {
        Self::new(self.window, self.values.iter().map(|w| *w + kappa).collect())
    }

    pub fn cast<S: Real>(&self) -> FrequencyVector<S> {
        FrequencyVector {
            window: self.window,
            values: self.values.iter().map(|w| S::lit(w.as_f64())).collect(),
        }
    }
}

/// `omega . nu`.
pub fn small_divisor<R: Real>(omega: &FrequencyVector<R>, nu: &MultiIndex) -> R {
    omega.dot(nu)
}

/// `delta_nu = prod_i (1 + <i>^2 nu_i^2)^{-1}`; the empty product is 1.
pub fn delta_nu<R: Real>(nu: &MultiIndex) -> R {
    nu.iter()
        .map(|(m, v)| {
            let b: R = bracket(m);
            let v = R::from_int(v as i64);
            R::one() / (R::one() + b * b * v * v)
        })
        .fold(R::one(), |a, b| a * b)
}

/// `delta_nu^tau`, computed factorwise.
pub fn delta_nu_pow<R: Real>(nu: &MultiIndex, tau: R) -> R {
    nu.iter()
        .map(|(m, v)| {
            let b: R = bracket(m);
            let v = R::from_int(v as i64);
            (R::one() + b * b * v * v).powf(-tau)
        })
        .fold(R::one(), |a, b| a * b)
}

/// Largest mode attaining `|nu_i| = ||nu||_inf`.
pub fn i0_of(nu: &MultiIndex) -> Result<i32> {
    let top = nu.linf_norm();
    nu.iter()
        .filter(|(_, v)| v.unsigned_abs() == top)
        .map(|(m, _)| m)
        .last()
        .ok_or(Error::ZeroMultiIndex)
}

/// Weak Diophantine constants `(gamma, tau)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub tau: f64,
}

impl DiophantineParams {
    pub fn new(gamma: f64, tau: f64) -> Result<Self> {
        let p = Self { gamma, tau };
        p.validate()?;
        Ok(p)
    }

    /// `tau = N + 1`.
    pub fn for_regularity(gamma: f64, n: u32) -> Result<Self> {
        Self::new(gamma, n as f64 + 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        // gamma = 0 is kept as a degenerate case: the test then only detects exact resonances.
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!("gamma must lie in [0,1), got {}", self.gamma)));
        }
        if !(self.tau >= 0.5) {
            return Err(Error::InvalidParameter(format!("tau must be >= 1/2, got {}", self.tau)));
        }
        Ok(())
    }
}

/// Enumeration bounds of a catalogue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogueBounds {
    pub x_max: f64,
    pub l1_max: u32,
    /// Gevrey exponent; catalogue entries are measured in `|nu|_{alpha/2}`.
    pub alpha: f64,
}

#[derive(Clone, Debug)]
struct Entry {
    nu: MultiIndex,
    size: f64,
}

/// Finite list of zero-sum multi-indices with `0 < |nu|_{alpha/2} <= x_max`, in canonical order
/// (by l1 norm, then by the multi-index itself).
#[derive(Clone, Debug)]
pub struct NuCatalogue {
    bounds: CatalogueBounds,
    entries: Vec<Entry>,
}

impl NuCatalogue {
    /// Every mass-zero `nu != 0` supported in the window with `||nu||_1 <= l1_max` and
    /// `|nu|_{alpha/2} <= x_max`.
    pub fn generate(window: ModeWindow, bounds: CatalogueBounds) -> Self {
        let modes: Vec<i32> = window.modes().collect();
        let weights: Vec<f64> = modes.iter().map(|&m| bracket::<f64>(m).powf(bounds.alpha / 2.0)).collect();
        let limit = bounds.x_max * (1.0 + ADMISSIBLE_SLACK);

        // Mass zero forces an even l1 norm; each shell is enumerated independently.
        let shells: Vec<u32> = (1..=bounds.l1_max / 2).map(|h| 2 * h).collect();
        let per_shell: Vec<Vec<MultiIndex>> = shells
            .par_iter()
            .map(|&l1| {
                let mut out = Vec::new();
                let mut cur = Vec::new();
                enumerate_shell(&modes, &weights, 0, l1, 0, 0.0, limit, &mut cur, &mut out);
                out.sort();
                out
            })
            .collect();

        let entries = per_shell
            .into_iter()
            .flatten()
            .map(|nu| {
                let size = nu.alpha_norm(bounds.alpha / 2.0);
                Entry { nu, size }
            })
            .collect();
        Self { bounds, entries }
    }

    /// Catalogue from an explicit list. Zero and duplicate entries are dropped; entries must be
    /// mass zero. `x_max` defaults to the largest entry size when `None`.
    pub fn from_list(list: Vec<MultiIndex>, alpha: f64, x_max: Option<f64>) -> Result<Self> {
        let mut list: Vec<MultiIndex> = list.into_iter().filter(|nu| !nu.is_zero()).collect();
        if let Some(bad) = list.iter().find(|nu| nu.mass() != 0) {
            return Err(Error::InvalidParameter(format!("catalogue entry {bad} has nonzero mass")));
        }
        list.sort_by(|a, b| a.l1_norm().cmp(&b.l1_norm()).then_with(|| a.cmp(b)));
        list.dedup();
        let entries: Vec<Entry> = list
            .into_iter()
            .map(|nu| {
                let size = nu.alpha_norm(alpha / 2.0);
                Entry { nu, size }
            })
            .collect();
        let largest = entries.iter().map(|e| e.size).fold(0.0, f64::max);
        let x_max = x_max.unwrap_or(largest);
        let l1_max = entries.iter().map(|e| e.nu.l1_norm()).max().unwrap_or(0);
        Ok(Self { bounds: CatalogueBounds { x_max, l1_max, alpha }, entries })
    }

    pub fn bounds(&self) -> CatalogueBounds {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.entries.iter().map(|e| &e.nu)
    }

    fn check_covers(&self, x: f64) -> Result<()> {
        if x > self.bounds.x_max * (1.0 + ADMISSIBLE_SLACK) {
            return Err(Error::CatalogueTooSmall { x, x_max: self.bounds.x_max });
        }
        Ok(())
    }

    /// Entries with `|nu|_{alpha/2} <= x`.
    pub fn admissible(&self, x: f64) -> Result<impl Iterator<Item = &MultiIndex>> {
        self.check_covers(x)?;
        let limit = x * (1.0 + ADMISSIBLE_SLACK);
        Ok(self.entries.iter().filter(move |e| e.size <= limit).map(|e| &e.nu))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.iter().collect::<Vec<_>>()).expect("multi-indices serialize")
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_shell(
    modes: &[i32],
    weights: &[f64],
    idx: usize,
    remaining: u32,
    mass: i64,
    size: f64,
    limit: f64,
    cur: &mut Vec<(i32, i32)>,
    out: &mut Vec<MultiIndex>,
) {
    if remaining == 0 {
        if mass == 0 && !cur.is_empty() {
            out.push(MultiIndex::from_sorted_unchecked(cur.clone()));
        }
        return;
    }
    if idx == modes.len() || (mass.unsigned_abs() as u32) > remaining {
        return;
    }
    // Skip this mode.
    enumerate_shell(modes, weights, idx + 1, remaining, mass, size, limit, cur, out);
    for a in 1..=remaining as i32 {
        let s = size + weights[idx] * a as f64;
        if s > limit {
            break;
        }
        for v in [a, -a] {
            cur.push((modes[idx], v));
            enumerate_shell(modes, weights, idx + 1, remaining - a as u32, mass + v as i64, s, limit, cur, out);
            cur.pop();
        }
    }
}

/// `beta^0_omega(x) = min |omega . nu|` over admissible catalogue entries; `+inf` when none.
pub fn beta0<R: Real>(omega: &FrequencyVector<R>, x: f64, cat: &NuCatalogue) -> Result<R> {
    Ok(cat
        .admissible(x)?
        .map(|nu| omega.dot(nu).abs())
        .fold(R::infinity(), R::min))
}

/// Truncated weak Bryuno sum `sum_{m=1}^M 2^{-m} log(1/beta^0(2^m))`.
///
/// Any `beta^0 <= zero_tol` makes the sum `+inf`; an empty admissible set contributes 0.
pub fn bryuno_function<R: Real>(omega: &FrequencyVector<R>, m_max: u32, cat: &NuCatalogue, zero_tol: f64) -> Result<R> {
    let scales: Vec<f64> = (1..=m_max).map(|m| 2f64.powi(m as i32)).collect();
    bryuno_function_with_scales(omega, &scales, cat, zero_tol)
}

/// Same as [`bryuno_function`] with an arbitrary increasing scale sequence in place of `2^m`.
pub fn bryuno_function_with_scales<R: Real>(
    omega: &FrequencyVector<R>,
    scales: &[f64],
    cat: &NuCatalogue,
    zero_tol: f64,
) -> Result<R> {
    let mut total = R::zero();
    for (i, &x) in scales.iter().enumerate() {
        let b = beta0(omega, x, cat)?;
        total += bryuno_term(b, i as i32 + 1, zero_tol);
    }
    Ok(total)
}

fn bryuno_term<R: Real>(b: R, m: i32, zero_tol: f64) -> R {
    if b.is_infinite() {
        R::zero()
    } else if b <= R::lit(zero_tol) {
        R::infinity()
    } else {
        R::lit(2f64.powi(-m)) * (R::one() / b).ln()
    }
}

/// `beta^*(x, gamma, tau) = gamma * min delta_nu^tau` over admissible entries; `+inf` when none.
pub fn beta_star(x: f64, gamma: f64, tau: f64, cat: &NuCatalogue) -> Result<f64> {
    let m = cat
        .admissible(x)?
        .map(|nu| delta_nu_pow::<f64>(nu, tau))
        .fold(f64::INFINITY, f64::min);
    Ok(if m.is_infinite() { m } else { gamma * m })
}

/// Truncated `B(gamma, tau) = sum_{m=1}^M 2^{-m} log(1/beta^*(2^m, gamma, tau))`.
pub fn bryuno_star(gamma: f64, tau: f64, m_max: u32, cat: &NuCatalogue) -> Result<f64> {
    let mut total = 0.0;
    for m in 1..=m_max as i32 {
        let b = beta_star(2f64.powi(m), gamma, tau, cat)?;
        total += bryuno_term(b, m, 0.0);
    }
    Ok(total)
}

/// One catalogue row of a Diophantine check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisorRow {
    pub nu: MultiIndex,
    pub divisor: f64,
    pub delta: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiophantineReport {
    pub pass: bool,
    pub worst_margin: f64,
    pub worst_nu: Option<MultiIndex>,
}

/// Rows `(nu, |omega.nu|, delta_nu, |omega.nu| - gamma delta_nu^tau)` in catalogue order.
pub fn divisor_rows<R: Real>(omega: &FrequencyVector<R>, p: &DiophantineParams, cat: &NuCatalogue) -> Vec<DivisorRow> {
    cat.iter()
        .map(|nu| {
            let d = omega.dot(nu).abs().as_f64();
            DivisorRow {
                nu: nu.clone(),
                divisor: d,
                delta: delta_nu::<f64>(nu),
                margin: d - p.gamma * delta_nu_pow::<f64>(nu, p.tau),
            }
        })
        .collect()
}

/// Passes iff `|omega.nu| > gamma delta_nu^tau` on every catalogue entry. Ties for the worst
/// margin go to the first entry in canonical order.
pub fn diophantine_test<R: Real>(omega: &FrequencyVector<R>, p: &DiophantineParams, cat: &NuCatalogue) -> DiophantineReport {
    let mut worst = f64::INFINITY;
    let mut worst_nu = None;
    let mut pass = true;
    for nu in cat.iter() {
        let d = omega.dot(nu).abs().as_f64();
        let thr = p.gamma * delta_nu_pow::<f64>(nu, p.tau);
        if !(d > thr) {
            pass = false;
        }
        let margin = d - thr;
        if margin < worst {
            worst = margin;
            worst_nu = Some(nu.clone());
        }
    }
    DiophantineReport { pass, worst_margin: worst, worst_nu }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn win(j: i32) -> ModeWindow {
        ModeWindow::new(j).unwrap()
    }

    fn nu(p: &[(i32, i32)]) -> MultiIndex {
        MultiIndex::from_pairs(p.iter().copied())
    }

    fn pm_e1() -> NuCatalogue {
        NuCatalogue::from_list(vec![nu(&[(1, 1), (-1, -1)]), nu(&[(1, -1), (-1, 1)])], 0.5, Some(2.0)).unwrap()
    }

    fn omega_with(j: i32, v: &[(i32, f64)]) -> FrequencyVector<f64> {
        FrequencyVector::from_fn(win(j), |m| {
            (m * m) as f64 + v.iter().find(|(k, _)| *k == m).map(|(_, x)| *x).unwrap_or(0.0)
        })
        .unwrap()
    }

    #[test]
    fn small_divisor_examples() {
        let w = FrequencyVector::<f64>::squares(win(3));
        assert_eq!(small_divisor(&w, &MultiIndex::zero()), 0.0);
        assert_eq!(small_divisor(&w, &nu(&[(2, 1), (1, -1), (-1, -1), (0, 1)])), 2.0);
        assert_eq!(small_divisor(&w, &nu(&[(1, 1), (-1, -1)])), 0.0);
    }

    #[test]
    fn out_of_q_rejected() {
        let r = FrequencyVector::<f64>::from_fn(win(2), |m| (m * m) as f64 + if m == 1 { 0.6 } else { 0.0 });
        assert!(matches!(r, Err(Error::OutOfQ { j: 1, .. })));
    }

    #[test]
    fn delta_nu_examples() {
        assert_eq!(delta_nu::<f64>(&MultiIndex::zero()), 1.0);
        assert_eq!(delta_nu::<f64>(&nu(&[(1, 1), (-1, -1)])), 0.25);
        assert!((delta_nu::<f64>(&nu(&[(2, 2)])) - 1.0 / 17.0).abs() < 1e-16);
    }

    #[test]
    fn i0_examples() {
        assert_eq!(i0_of(&nu(&[(1, 1), (-1, -1)])).unwrap(), 1);
        assert_eq!(i0_of(&nu(&[(-3, 2), (5, 1)])).unwrap(), -3);
        assert_eq!(i0_of(&MultiIndex::unit(0)).unwrap(), 0);
        assert!(matches!(i0_of(&MultiIndex::zero()), Err(Error::ZeroMultiIndex)));
    }

    #[test]
    fn beta0_examples() {
        let cat = pm_e1();
        let w = FrequencyVector::<f64>::squares(win(3));
        assert_eq!(beta0(&w, 2.0, &cat).unwrap(), 0.0);
        assert_eq!(beta0(&w, 1.5, &cat).unwrap(), f64::INFINITY);
        let w = omega_with(3, &[(1, 0.1)]);
        assert!((beta0(&w, 2.0, &cat).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(beta0(&w, 4.0, &cat), Err(Error::CatalogueTooSmall { .. })));
    }

    #[test]
    fn bryuno_closed_form() {
        // beta0(2) = 1/2 and no admissible nu at larger scales contributes 0 beyond that.
        assert!((bryuno_term::<f64>(0.5, 1, 1e-13) + bryuno_term::<f64>(1.0, 2, 1e-13)
            + bryuno_term::<f64>(1.0, 3, 1e-13)
            - 0.5 * 2f64.ln())
        .abs()
            < 1e-15);
        assert_eq!(bryuno_term::<f64>(f64::INFINITY, 1, 1e-13), 0.0);
        let cat = NuCatalogue::generate(win(3), CatalogueBounds { x_max: 8.0, l1_max: 4, alpha: 0.5 });
        let w = FrequencyVector::<f64>::squares(win(3));
        assert_eq!(bryuno_function(&w, 3, &cat, 1e-13).unwrap(), f64::INFINITY);
    }

    #[test]
    fn diophantine_examples() {
        let cat = NuCatalogue::generate(win(3), CatalogueBounds { x_max: 8.0, l1_max: 4, alpha: 0.5 });
        let p = DiophantineParams::new(0.1, 4.0).unwrap();
        let w = FrequencyVector::<f64>::squares(win(3));
        let r = diophantine_test(&w, &p, &cat);
        assert!(!r.pass);
        assert_eq!(r.worst_nu.unwrap(), nu(&[(1, 1), (-1, -1)]));
        assert_eq!(r.worst_margin, -0.1 / 4f64.powi(4));

        let w = omega_with(3, &[(1, 0.2)]);
        let r = diophantine_test(&w, &p, &pm_e1());
        assert!(r.pass);
        assert!((r.worst_margin - (0.2 - 0.1 * 0.25f64.powi(4))).abs() < 1e-15);

        let p0 = DiophantineParams::new(0.0, 4.0).unwrap();
        assert!(!diophantine_test(&FrequencyVector::<f64>::squares(win(3)), &p0, &pm_e1()).pass);
        assert!(diophantine_test(&w, &p0, &pm_e1()).pass);
    }

    #[test]
    fn beta_star_examples() {
        let cat = pm_e1();
        assert!((beta_star(2.0, 0.1, 4.0, &cat).unwrap() - 0.1 * 0.25f64.powi(4)).abs() < 1e-18);
        assert_eq!(beta_star(2.0, 0.05, 4.0, &cat).unwrap() * 2.0, beta_star(2.0, 0.1, 4.0, &cat).unwrap());
        let big = NuCatalogue::generate(win(4), CatalogueBounds { x_max: 16.0, l1_max: 4, alpha: 0.5 });
        let mut last = f64::INFINITY;
        for m in 1..=4 {
            let b = beta_star(2f64.powi(m), 0.1, 4.0, &big).unwrap();
            assert!(b <= last);
            last = b;
        }
        assert!(bryuno_star(0.1, 4.0, 4, &big).unwrap().is_finite());
    }

    #[test]
    fn generated_catalogue_is_canonical() {
        let cat = NuCatalogue::generate(win(2), CatalogueBounds { x_max: 100.0, l1_max: 4, alpha: 0.5 });
        let list: Vec<_> = cat.iter().cloned().collect();
        assert!(list.iter().all(|n| n.mass() == 0 && !n.is_zero() && n.l1_norm() <= 4));
        let mut sorted = list.clone();
        sorted.sort_by(|a, b| a.l1_norm().cmp(&b.l1_norm()).then_with(|| a.cmp(b)));
        sorted.dedup();
        assert_eq!(list, sorted);
        // l1 = 2 shell: ordered pairs of distinct modes, 5 * 4 = 20.
        assert_eq!(list.iter().filter(|n| n.l1_norm() == 2).count(), 20);
        let js = cat.to_json();
        let back: Vec<MultiIndex> = serde_json::from_value(js).unwrap();
        assert_eq!(back, list);
    }

    #[test]
    fn dioph_pass_implies_bryuno_set() {
        let window = win(4);
        let cat = NuCatalogue::generate(window, CatalogueBounds { x_max: 16.0, l1_max: 4, alpha: 0.5 });
        let spec = crate::seqspace::SampleSpec::new(3, crate::seqspace::GevreyParams::new(1.0, 0.5).unwrap(), 5).unwrap();
        let p = DiophantineParams::for_regularity(0.05, 3).unwrap();
        let mut checked = 0;
        for i in 0..50 {
            let v = crate::seqspace::sample_potential::<f64>(&spec, window, &mut crate::seqspace::sample_rng(5, i));
            let w = FrequencyVector::from_potential(&v).unwrap();
            if diophantine_test(&w, &p, &cat).pass {
                checked += 1;
                for m in 1..=4 {
                    let x = 2f64.powi(m);
                    assert!(beta0(&w, x, &cat).unwrap() >= beta_star(x, p.gamma, p.tau, &cat).unwrap());
                }
            }
        }
        assert!(checked > 0);
    }

    proptest! {
        #[test]
        fn delta_is_symmetric_and_bounded(pairs in proptest::collection::vec((-5i32..=5, -3i32..=3), 0..5)) {
            let n = MultiIndex::from_pairs(pairs);
            let d = delta_nu::<f64>(&n);
            prop_assert_eq!(d, delta_nu::<f64>(&n.neg()));
            prop_assert!(d <= 1.0);
            prop_assert_eq!(d == 1.0, n.is_zero());
        }

        #[test]
        fn beta0_non_increasing(vs in proptest::collection::vec(-0.25f64..0.25, 9)) {
            let window = win(4);
            let w = FrequencyVector::from_fn(window, |m| (m * m) as f64 + vs[(m + 4) as usize]).unwrap();
            let cat = NuCatalogue::generate(window, CatalogueBounds { x_max: 8.0, l1_max: 4, alpha: 0.5 });
            let mut last = f64::INFINITY;
            for x in [1.0, 2.0, 3.0, 4.0, 6.0, 8.0] {
                let b = beta0(&w, x, &cat).unwrap();
                prop_assert!(b <= last);
                last = b;
            }
        }

        #[test]
        fn uniform_shift_leaves_mass_zero_divisors(k in -0.2f64..0.2, vs in proptest::collection::vec(-0.25f64..0.25, 7)) {
            let window = win(3);
            let w = FrequencyVector::from_fn(window, |m| (m * m) as f64 + vs[(m + 3) as usize]).unwrap();
            let s = w.shifted(k).unwrap();
            let cat = NuCatalogue::generate(window, CatalogueBounds { x_max: 8.0, l1_max: 4, alpha: 0.5 });
            for n in cat.iter() {
                prop_assert!((w.dot(n) - s.dot(n)).abs() < 1e-12);
            }
        }
    }
}
