//! Truncated weighted sequence spaces, sparse multi-indices and the product-measure samplers.
//!
//! Every sequence lives on a symmetric mode window `|j| <= J`. Two weight families are
//! supported: the algebraic family `sup |x_j| <j>^k` and the Gevrey family
//! `sup |x_j| e^{s <j>^alpha}`, with `<j> = max(1, |j|)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{bracket, czero, Real};

/// Symmetric truncation `{-J, ..., J}` of the integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct ModeWindow {
    half_width: i32,
}

impl ModeWindow {
    pub fn new(half_width: i32) -> Result<Self> {
        if half_width < 1 {
            return Err(Error::InvalidParameter(format!(
                "mode window half-width must be >= 1, got {half_width}"
            )));
        }
        Ok(Self { half_width })
    }

    #[inline]
    pub fn half_width(&self) -> i32 {
        self.half_width
    }

    /// Number of modes, `2J + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains(&self, j: i32) -> bool {
        j.abs() <= self.half_width
    }

    #[inline]
    pub fn modes(&self) -> std::ops::RangeInclusive<i32> {
        -self.half_width..=self.half_width
    }

    /// Storage slot of mode `j`; modes are laid out `-J..=J`.
    #[inline]
    pub fn slot(&self, j: i32) -> usize {
        debug_assert!(self.contains(j));
        (j + self.half_width) as usize
    }

    /// Modes `|j| <= J - margin`, used to keep Galerkin edge modes out of defect norms.
    pub fn interior(&self, margin: i32) -> impl Iterator<Item = i32> {
        let h = (self.half_width - margin).max(0);
        -h..=h
    }
}

impl TryFrom<i32> for ModeWindow {
    type Error = Error;
    fn try_from(value: i32) -> Result<Self> {
        ModeWindow::new(value)
    }
}

impl From<ModeWindow> for i32 {
    fn from(w: ModeWindow) -> i32 {
        w.half_width
    }
}

/// Finitely supported integer vector over the modes, stored sparsely and sorted by mode.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<(i32, i32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit vector `e_mode`.
    pub fn unit(mode: i32) -> Self {
        Self { entries: vec![(mode, 1)] }
    }

    /// Builds from `(mode, coefficient)` pairs; repeated modes are summed and zeros dropped.
    pub fn from_pairs<I: IntoIterator<Item = (i32, i32)>>(pairs: I) -> Self {
        let mut acc: BTreeMap<i32, i32> = BTreeMap::new();
        for (m, v) in pairs {
            *acc.entry(m).or_insert(0) += v;
        }
        Self {
            entries: acc.into_iter().filter(|&(_, v)| v != 0).collect(),
        }
    }

    pub(crate) fn from_sorted_unchecked(entries: Vec<(i32, i32)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, v)| v != 0));
        Self { entries }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, mode: i32) -> i32 {
        self.entries
            .binary_search_by_key(&mode, |&(m, _)| m)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Nonzero entries in increasing mode order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        self.entries.iter().copied()
    }

    pub fn support(&self) -> impl Iterator<Item = i32> + '_ {
        self.entries.iter().map(|&(m, _)| m)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// `sum_i nu_i`.
    pub fn mass(&self) -> i64 {
        self.entries.iter().map(|&(_, v)| v as i64).sum()
    }

    /// `sum_i i * nu_i`.
    pub fn momentum(&self) -> i64 {
        self.entries.iter().map(|&(m, v)| m as i64 * v as i64).sum()
    }

    pub fn l1_norm(&self) -> u32 {
        self.entries.iter().map(|&(_, v)| v.unsigned_abs()).sum()
    }

    pub fn linf_norm(&self) -> u32 {
        self.entries
            .iter()
            .map(|&(_, v)| v.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// `|nu|_alpha = sum_i <i>^alpha |nu_i|`; equals the l1 norm at `alpha = 0`.
    pub fn alpha_norm<R: Real>(&self, alpha: R) -> R {
        self.entries
            .iter()
            .map(|&(m, v)| bracket::<R>(m).powf(alpha) * R::from_int(v.unsigned_abs() as i64))
            .sum()
    }

    pub fn fits(&self, window: &ModeWindow) -> bool {
        self.entries.iter().all(|&(m, _)| window.contains(m))
    }

    pub fn neg(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&(m, v)| (m, -v)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.signed_sum(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.signed_sum(other, -1)
    }

    fn signed_sum(&self, other: &Self, sign: i32) -> Self {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(ma, va)), Some(&&(mb, vb))) => {
                    if ma < mb {
                        out.push((ma, va));
                        a.next();
                    } else if mb < ma {
                        out.push((mb, sign * vb));
                        b.next();
                    } else {
                        let v = va + sign * vb;
                        if v != 0 {
                            out.push((ma, v));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some(&&(ma, va)), None) => {
                    out.push((ma, va));
                    a.next();
                }
                (None, Some(&&(mb, vb))) => {
                    out.push((mb, sign * vb));
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { entries: out }
    }

    /// `nu_1 - nu_2 + nu_3 - nu_4 + nu_5`, the harmonic bookkeeping of the quintic term.
    pub fn combine_quintic(parts: [&MultiIndex; 5]) -> Self {
        parts[0]
            .sub(parts[1])
            .add(parts[2])
            .sub(parts[3])
            .add(parts[4])
    }

    /// Compact textual form used in CSV artifacts, e.g. `-1:-1;1:1`; the zero vector is `0`.
    pub fn encode(&self) -> String {
        if self.entries.is_empty() {
            return "0".to_string();
        }
        self.entries
            .iter()
            .map(|(m, v)| format!("{m}:{v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn decode(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(Self::zero());
        }
        let mut pairs = Vec::new();
        for part in s.split(';') {
            let (m, v) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad multi-index entry `{part}`")))?;
            let m: i32 = m.trim().parse().map_err(|_| Error::Parse(format!("bad mode `{m}`")))?;
            let v: i32 = v.trim().parse().map_err(|_| Error::Parse(format!("bad coefficient `{v}`")))?;
            pairs.push((m, v));
        }
        Ok(Self::from_pairs(pairs))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, v)) in self.entries.iter().enumerate() {
            let sign = if *v < 0 { "-" } else if n > 0 { "+" } else { "" };
            let mag = v.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}e{m}")?;
            } else {
                write!(f, "{sign}{mag}e{m}")?;
            }
        }
        Ok(())
    }
}

// JSON form: {"mode": coefficient, ...}
impl Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = ser.serialize_map(Some(self.entries.len()))?;
        for (m, v) in &self.entries {
            map.serialize_entry(&m.to_string(), v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw: BTreeMap<String, i32> = BTreeMap::deserialize(de)?;
        let mut pairs = Vec::with_capacity(raw.len());
        for (k, v) in raw {
            let m: i32 = k.parse().map_err(serde::de::Error::custom)?;
            pairs.push((m, v));
        }
        Ok(MultiIndex::from_pairs(pairs))
    }
}

/// Gevrey width `s > 0` and exponent `0 < alpha < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GevreyParams<R> {
    pub s: R,
    pub alpha: R,
}

impl<R: Real> GevreyParams<R> {
    pub fn new(s: R, alpha: R) -> Result<Self> {
        let p = Self { s, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > R::zero()) {
            return Err(Error::InvalidParameter(format!("Gevrey width s must be > 0, got {}", self.s)));
        }
        if !(self.alpha > R::zero() && self.alpha < R::one()) {
            return Err(Error::InvalidParameter(format!(
                "Gevrey exponent alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `e^{s <j>^alpha}`.
    #[inline]
    pub fn weight(&self, j: i32) -> R {
        (self.s * bracket::<R>(j).powf(self.alpha)).exp()
    }

    pub fn cast<S: Real>(&self) -> GevreyParams<S> {
        GevreyParams { s: S::lit(self.s.as_f64()), alpha: S::lit(self.alpha.as_f64()) }
    }
}

/// Weight family a sequence is measured in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightFamily<R> {
    /// `sup |x_j| <j>^k`.
    Algebraic { k: u32 },
    /// `sup |x_j| e^{s <j>^alpha}`.
    Gevrey(GevreyParams<R>),
}

impl<R: Real> WeightFamily<R> {
    #[inline]
    pub fn weight(&self, j: i32) -> R {
        match self {
            WeightFamily::Algebraic { k } => bracket::<R>(j).powi(*k as i32),
            WeightFamily::Gevrey(g) => g.weight(j),
        }
    }
}

/// Complex sequence on a mode window together with its declared weight family.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSequence<R> {
    window: ModeWindow,
    values: Vec<Complex<R>>,
    family: WeightFamily<R>,
}

impl<R: Real> SpectralSequence<R> {
    pub fn new(window: ModeWindow, values: Vec<Complex<R>>, family: WeightFamily<R>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "sequence has {} values, window J={} needs {}",
                values.len(),
                window.half_width(),
                window.len()
            )));
        }
        Ok(Self { window, values, family })
    }

    pub fn zeros(window: ModeWindow, family: WeightFamily<R>) -> Self {
        Self { window, values: vec![czero(); window.len()], family }
    }

    pub fn from_fn(window: ModeWindow, family: WeightFamily<R>, mut f: impl FnMut(i32) -> Complex<R>) -> Self {
        let values = window.modes().map(&mut f).collect();
        Self { window, values, family }
    }

    pub fn from_real_fn(window: ModeWindow, family: WeightFamily<R>, mut f: impl FnMut(i32) -> R) -> Self {
        Self::from_fn(window, family, |j| Complex::new(f(j), R::zero()))
    }

    #[inline]
    pub fn window(&self) -> ModeWindow {
        self.window
    }

    #[inline]
    pub fn family(&self) -> WeightFamily<R> {
        self.family
    }

    pub fn with_family(mut self, family: WeightFamily<R>) -> Self {
        self.family = family;
        self
    }

    /// Value at mode `j`; zero outside the window (Galerkin projection).
    #[inline]
    pub fn get(&self, j: i32) -> Complex<R> {
        if self.window.contains(j) {
            self.values[self.window.slot(j)]
        } else {
            czero()
        }
    }

    #[inline]
    pub fn re(&self, j: i32) -> R {
        self.get(j).re
    }

    pub fn set(&mut self, j: i32, v: Complex<R>) {
        let s = self.window.slot(j);
        self.values[s] = v;
    }

    pub fn values(&self) -> &[Complex<R>] {
        &self.values
    }

    /// `(j, x_j)` in increasing mode order.
    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex<R>)> + '_ {
        self.window.modes().zip(self.values.iter().copied())
    }

    /// Weighted sup norm in the declared family.
    pub fn norm(&self) -> R {
        self.weighted_sup(self.window.modes())
    }

    /// Weighted sup norm restricted to the given modes.
    pub fn weighted_sup<I: IntoIterator<Item = i32>>(&self, modes: I) -> R {
        modes
            .into_iter()
            .filter(|j| self.window.contains(*j))
            .map(|j| self.get(j).norm() * self.family.weight(j))
            .fold(R::zero(), R::max)
    }

    pub fn norm_in(&self, family: WeightFamily<R>) -> R {
        self.iter()
            .map(|(j, x)| x.norm() * family.weight(j))
            .fold(R::zero(), R::max)
    }

    pub fn scale(&self, lambda: Complex<R>) -> Self {
        self.map(|_, x| x * lambda)
    }

    pub fn map(&self, mut f: impl FnMut(i32, Complex<R>) -> Complex<R>) -> Self {
        Self {
            window: self.window,
            values: self.iter().map(|(j, x)| f(j, x)).collect(),
            family: self.family,
        }
    }

    pub fn zip_with(&self, other: &Self, mut f: impl FnMut(Complex<R>, Complex<R>) -> Complex<R>) -> Self {
        assert_eq!(self.window, other.window, "window mismatch");
        Self {
            window: self.window,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
            family: self.family,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `sum_j |x_j|^2`.
    pub fn l2_mass(&self) -> R {
        self.values.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> R {
        self.values.iter().map(|x| x.norm()).fold(R::zero(), R::max)
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> R {
        self.values.iter().map(|x| x.im.abs()).fold(R::zero(), R::max)
    }

    /// Modes with a nonzero value.
    pub fn support(&self) -> Vec<i32> {
        self.iter().filter(|(_, x)| *x != czero()).map(|(j, _)| j).collect()
    }

    /// JSON-friendly `[re, im]` pairs in mode order `-J..=J`.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.values.iter().map(|x| [x.re.as_f64(), x.im.as_f64()]).collect()
    }

    pub fn from_pairs(window: ModeWindow, pairs: &[[f64; 2]], family: WeightFamily<R>) -> Result<Self> {
        let values = pairs.iter().map(|p| Complex::new(R::lit(p[0]), R::lit(p[1]))).collect();
        Self::new(window, values, family)
    }

    pub fn cast<S: Real>(&self) -> SpectralSequence<S> {
        let family = match self.family {
            WeightFamily::Algebraic { k } => WeightFamily::Algebraic { k },
            WeightFamily::Gevrey(g) => WeightFamily::Gevrey(g.cast()),
        };
        SpectralSequence {
            window: self.window,
            values: self
                .values
                .iter()
                .map(|x| Complex::new(S::lit(x.re.as_f64()), S::lit(x.im.as_f64())))
                .collect(),
            family,
        }
    }
}

/// Sampling radii, regularity and seed for random potentials and initial data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    #[serde(default = "default_radius_v")]
    pub radius_v: f64,
    #[serde(default = "default_radius_w")]
    pub radius_w: f64,
    #[serde(rename = "N", default = "default_n")]
    pub n: u32,
    pub gevrey: GevreyParams<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_radius_v() -> f64 {
    0.25
}
fn default_radius_w() -> f64 {
    0.5
}
fn default_n() -> u32 {
    3
}

impl SampleSpec {
    pub fn new(n: u32, gevrey: GevreyParams<f64>, seed: u64) -> Result<Self> {
        let spec = Self { radius_v: default_radius_v(), radius_w: default_radius_w(), n, gevrey, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!("N must be >= 3, got {}", self.n)));
        }
        if !(self.radius_v >= 0.0 && self.radius_w >= 0.0) {
            return Err(Error::InvalidParameter("sampling radii must be non-negative".into()));
        }
        self.gevrey.validate()
    }
}

pub type SampleRng = ChaCha8Rng;

/// Generator for sample `index` of a run seeded with `seed`. Each index gets its own ChaCha
/// stream, so samples can be drawn in any order or in parallel with identical results.
pub fn sample_rng(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

// Shrinks `x` toward zero until `|x| * weight <= radius` holds in floating point.
fn clamp_to_ball(mut x: f64, weight: f64, radius: f64) -> f64 {
    while x.abs() * weight > radius {
        x = f64::from_bits(x.to_bits() - 1);
    }
    x
}

/// Real potential `V_j = <j>^{-N} v_j`, `v_j` i.i.d. uniform on `[-radius_v, radius_v]`.
pub fn sample_potential<R: Real>(spec: &SampleSpec, window: ModeWindow, rng: &mut impl Rng) -> SpectralSequence<R> {
    let family = WeightFamily::Algebraic { k: spec.n };
    let r = spec.radius_v;
    SpectralSequence::from_real_fn(window, family, |j| {
        if r == 0.0 {
            return R::zero();
        }
        let v: f64 = rng.gen_range(-r..=r);
        let w = (j.unsigned_abs().max(1) as f64).powi(spec.n as i32);
        R::lit(clamp_to_ball(v / w, w, r))
    })
}

/// Complex datum `W_j = e^{-s<j>^alpha} w_j`, `w_j` i.i.d. uniform on the disc of radius `radius_w`.
pub fn sample_initial_datum<R: Real>(
    spec: &SampleSpec,
    window: ModeWindow,
    rng: &mut impl Rng,
) -> SpectralSequence<R> {
    let g = spec.gevrey;
    let r = spec.radius_w;
    SpectralSequence::from_fn(window, WeightFamily::Gevrey(g.cast()), |j| {
        if r == 0.0 {
            return czero();
        }
        let rad = r * rng.gen::<f64>().sqrt();
        let ang = std::f64::consts::TAU * rng.gen::<f64>();
        let w = g.weight(j);
        let modulus = clamp_to_ball(rad / w, w, r);
        Complex::new(R::lit(modulus * ang.cos()), R::lit(modulus * ang.sin()))
    })
}

/// Same as [`sample_initial_datum`] but zero outside `support`.
pub fn sample_initial_datum_on<R: Real>(
    spec: &SampleSpec,
    window: ModeWindow,
    support: &[i32],
    rng: &mut impl Rng,
) -> SpectralSequence<R> {
    let full = sample_initial_datum::<R>(spec, window, rng);
    full.map(|j, x| if support.contains(&j) { x } else { czero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(j: i32) -> ModeWindow {
        ModeWindow::new(j).unwrap()
    }

    #[test]
    fn norm_of_zero_is_zero() {
        let g = GevreyParams::new(1.0, 0.5).unwrap();
        let x = SpectralSequence::<f64>::zeros(w(3), WeightFamily::Gevrey(g));
        assert_eq!(x.norm(), 0.0);
        let y = SpectralSequence::<f64>::zeros(w(3), WeightFamily::Algebraic { k: 2 });
        assert_eq!(y.norm(), 0.0);
    }

    #[test]
    fn gevrey_norm_of_delta_at_zero() {
        let g = GevreyParams::new(1.0, 0.5).unwrap();
        let x = SpectralSequence::<f64>::from_real_fn(w(3), WeightFamily::Gevrey(g), |j| if j == 0 { 1.0 } else { 0.0 });
        assert!((x.norm() - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn algebraic_norm_of_inverse_square() {
        let x = SpectralSequence::<f64>::from_real_fn(w(3), WeightFamily::Algebraic { k: 2 }, |j| {
            1.0 / (j.abs().max(1) as f64).powi(2)
        });
        assert!((x.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_norm_examples() {
        assert_eq!(MultiIndex::zero().alpha_norm(0.5), 0.0);
        let nu = MultiIndex::from_pairs([(2, 1), (-1, -1)]);
        assert!((nu.alpha_norm(0.5) - (2f64.sqrt() + 1.0)).abs() < 1e-15);
        let nu = MultiIndex::from_pairs([(1, 1), (-1, -1)]);
        assert_eq!(nu.alpha_norm(0.0), 2.0);
        assert_eq!(nu.l1_norm(), 2);
    }

    #[test]
    fn quintic_combination() {
        let e0 = MultiIndex::unit(0);
        let e1 = MultiIndex::unit(1);
        let c = MultiIndex::combine_quintic([&e0, &e0, &e0, &e0, &e0]);
        assert_eq!(c, e0);
        assert_eq!((c.mass(), c.momentum()), (1, 0));
        let c = MultiIndex::combine_quintic([&e1, &e1, &e1, &e0, &e0]);
        assert_eq!(c, e1);
        let d = MultiIndex::from_pairs([(1, 1), (-1, -1)]);
        assert_eq!(d.mass(), 0);
        assert_eq!(d.momentum(), 2);
    }

    #[test]
    fn encode_decode() {
        let nu = MultiIndex::from_pairs([(2, 1), (-3, -2), (0, 1)]);
        assert_eq!(nu.encode(), "-3:-2;0:1;2:1");
        assert_eq!(MultiIndex::decode(&nu.encode()).unwrap(), nu);
        assert_eq!(MultiIndex::decode("0").unwrap(), MultiIndex::zero());
        let js = serde_json::to_string(&nu).unwrap();
        assert_eq!(serde_json::from_str::<MultiIndex>(&js).unwrap(), nu);
        assert_eq!(format!("{}", MultiIndex::from_pairs([(1, 1), (-1, -1)])), "-e-1+e1");
    }

    #[test]
    fn zero_radius_samples_are_zero() {
        let g = GevreyParams::new(1.0, 0.5).unwrap();
        let mut spec = SampleSpec::new(3, g, 1).unwrap();
        spec.radius_v = 0.0;
        spec.radius_w = 0.0;
        let v = sample_potential::<f64>(&spec, w(4), &mut sample_rng(1, 0));
        let d = sample_initial_datum::<f64>(&spec, w(4), &mut sample_rng(1, 0));
        assert_eq!(v.max_abs(), 0.0);
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = GevreyParams::new(1.0, 0.5).unwrap();
        let spec = SampleSpec::new(4, g, 42).unwrap();
        let a = sample_potential::<f64>(&spec, w(5), &mut sample_rng(42, 0));
        let b = sample_potential::<f64>(&spec, w(5), &mut sample_rng(42, 0));
        assert_eq!(a, b);
        let c = sample_potential::<f64>(&spec, w(5), &mut sample_rng(42, 1));
        assert_ne!(a, c);
    }

    #[test]
    fn sample_spec_rejects_small_n() {
        let g = GevreyParams::new(1.0, 0.5).unwrap();
        assert!(SampleSpec::new(2, g, 0).is_err());
        assert!(GevreyParams::new(1.0, 1.0).is_err());
        assert!(GevreyParams::new(0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn samples_stay_in_their_balls(seed in any::<u64>(), n in 3u32..8, jw in 1i32..12) {
            let g = GevreyParams::new(0.7, 0.4).unwrap();
            let spec = SampleSpec::new(n, g, seed).unwrap();
            let mut rng = sample_rng(seed, 3);
            let v = sample_potential::<f64>(&spec, w(jw), &mut rng);
            let d = sample_initial_datum::<f64>(&spec, w(jw), &mut rng);
            prop_assert!(v.norm() <= 0.25);
            prop_assert!(d.norm() <= 0.5);
            prop_assert_eq!(v.max_imag(), 0.0);
        }

        #[test]
        fn norm_is_homogeneous(vals in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 7),
                               lr in -3.0f64..3.0, li in -3.0f64..3.0) {
            let g = GevreyParams::new(0.5, 0.5).unwrap();
            let vals: Vec<_> = vals.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
            for fam in [WeightFamily::Gevrey(g), WeightFamily::Algebraic { k: 3 }] {
                let x = SpectralSequence::new(w(3), vals.clone(), fam).unwrap();
                let lam = Complex::new(lr, li);
                let lhs = x.scale(lam).norm();
                let rhs = lam.norm() * x.norm();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
            }
        }

        #[test]
        fn mass_and_momentum_are_additive(a in proptest::collection::vec((-4i32..=4, -3i32..=3), 0..6),
                                          b in proptest::collection::vec((-4i32..=4, -3i32..=3), 0..6)) {
            let x = MultiIndex::from_pairs(a);
            let y = MultiIndex::from_pairs(b);
            let s = x.sub(&y);
            prop_assert_eq!(s.mass(), x.mass() - y.mass());
            prop_assert_eq!(s.momentum(), x.momentum() - y.momentum());
            prop_assert_eq!(x.alpha_norm(0.0f64), x.l1_norm() as f64);
            prop_assert!(s.iter().all(|(_, v)| v != 0));
        }
    }
}
