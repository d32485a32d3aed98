//! JSON run configurations, one per subcommand. Unknown keys are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use nls_tori::compat::FixedPointParams;
use nls_tori::dynamics::StepControl;
use nls_tori::lindstedt::SolveParams;
use nls_tori::nonres::CatalogueBounds;
use nls_tori::seqspace::{GevreyParams, ModeWindow, MultiIndex, SampleSpec, SpectralSequence, WeightFamily};
use nls_tori::{Error, Result};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Potential and datum distribution; the seed lives at the top level of each config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampler {
    #[serde(rename = "N", default = "default_n")]
    pub n: u32,
    pub gevrey: GevreyParams<f64>,
    #[serde(default = "default_radius_v")]
    pub radius_v: f64,
    #[serde(default = "default_radius_w")]
    pub radius_w: f64,
}

fn default_n() -> u32 {
    3
}
fn default_radius_v() -> f64 {
    0.25
}
fn default_radius_w() -> f64 {
    0.5
}

impl Sampler {
    pub fn spec(&self, seed: u64) -> Result<SampleSpec> {
        let spec = SampleSpec { radius_v: self.radius_v, radius_w: self.radius_w, n: self.n, gevrey: self.gevrey, seed };
        spec.validate()?;
        Ok(spec)
    }
}

/// Expansion knobs shared by `counterterm`, `solve`, `measure` (full mode) and `evolve`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expansion {
    #[serde(rename = "K")]
    pub order: usize,
    pub epsilon: f64,
    /// Active modes; the support of the datum when absent.
    #[serde(default)]
    pub active: Option<Vec<i32>>,
    #[serde(default)]
    pub alpha_cap: Option<f64>,
    #[serde(default = "default_tol_div")]
    pub tol_div: f64,
    #[serde(default = "default_tol_im")]
    pub tol_im: f64,
    #[serde(default = "default_tail")]
    pub residual_tail: usize,
}

fn default_tol_div() -> f64 {
    1e-8
}
fn default_tol_im() -> f64 {
    1e-12
}
fn default_tail() -> usize {
    1
}

impl Expansion {
    pub fn active(&self, datum: &SpectralSequence<f64>) -> Vec<i32> {
        self.active.clone().unwrap_or_else(|| datum.support())
    }

    pub fn params(&self, datum: &SpectralSequence<f64>) -> Result<SolveParams<f64>> {
        self.params_on(datum.window(), self.active(datum))
    }

    pub fn params_on(&self, window: ModeWindow, active: Vec<i32>) -> Result<SolveParams<f64>> {
        if let Some(j) = active.iter().find(|j| !window.contains(**j)) {
            return Err(Error::InvalidParameter(format!("active mode {j} outside the window")));
        }
        let mut p = SolveParams::new(window, self.order, self.epsilon).with_active(active);
        p.alpha_cap = self.alpha_cap;
        p.tol_div = self.tol_div;
        p.tol_im = self.tol_im;
        p.residual_tail = self.residual_tail;
        p.validate()?;
        Ok(p)
    }
}

/// Explicit `V` (real, `j = -J..J`) and `W` (`[[re, im], ...]`), replacing sampled ones.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Explicit {
    #[serde(default)]
    pub potential: Option<Vec<f64>>,
    #[serde(default)]
    pub datum: Option<Vec<[f64; 2]>>,
}

impl Explicit {
    pub fn potential(&self, window: ModeWindow, n: u32, sampled: SpectralSequence<f64>) -> Result<SpectralSequence<f64>> {
        match &self.potential {
            None => Ok(sampled),
            Some(v) => {
                if v.len() != window.len() {
                    return Err(Error::InvalidParameter(format!("potential has {} entries, window needs {}", v.len(), window.len())));
                }
                Ok(SpectralSequence::from_real_fn(window, WeightFamily::Algebraic { k: n }, |j| v[window.slot(j)]))
            }
        }
    }

    pub fn datum(&self, window: ModeWindow, g: GevreyParams<f64>, sampled: SpectralSequence<f64>) -> Result<SpectralSequence<f64>> {
        match &self.datum {
            None => Ok(sampled),
            Some(w) => SpectralSequence::from_pairs(window, w, WeightFamily::Gevrey(g)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountertermConfig {
    #[serde(rename = "J")]
    pub j: i32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub sample: Sampler,
    pub expansion: Expansion,
    #[serde(default)]
    pub explicit: Explicit,
    /// Frequencies; `j^2 + V_j` when absent.
    #[serde(default)]
    pub omega: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub symmetry_trials: usize,
    #[serde(default = "default_check_tol")]
    pub check_tol: f64,
}

fn default_trials() -> usize {
    5
}
fn default_check_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(rename = "J")]
    pub j: i32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub sample: Sampler,
    pub expansion: Expansion,
    #[serde(default)]
    pub explicit: Explicit,
    #[serde(default)]
    pub fixed_point: FixedPointParams,
    /// Modes of the asymptotic fit; `J/2 <= |j| <= J` when absent.
    #[serde(default)]
    pub fit_window: Option<Vec<i32>>,
    #[serde(default = "default_defect_tol")]
    pub defect_tol: f64,
}

fn default_defect_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum OmegaSource {
    /// `j^2 + V_j` with sampled or explicit `V`.
    Linear,
    /// `j^2`.
    Squares,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonresConfig {
    #[serde(rename = "J")]
    pub j: i32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub sample: Sampler,
    #[serde(default = "default_omega")]
    pub omega: OmegaSource,
    #[serde(default)]
    pub explicit: Explicit,
    pub catalogue: CatalogueBounds,
    pub gamma: f64,
    /// `N + 1` when absent.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Number of dyadic scales; the largest `2^m <= x_max` when absent.
    #[serde(default)]
    pub bryuno_scales: Option<u32>,
    #[serde(default)]
    pub zero_tol: f64,
}

fn default_omega() -> OmegaSource {
    OmegaSource::Linear
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum MeasureMode {
    Linear,
    Full,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonantTarget {
    pub nu: MultiIndex,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodFraction {
    pub catalogue: CatalogueBounds,
    pub gammas: Vec<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(rename = "J")]
    pub j: i32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub sample: Sampler,
    #[serde(default = "default_mode")]
    pub mode: MeasureMode,
    /// Defaults to 1e5 in linear mode and 1e3 in full mode.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub resonant: Vec<ResonantTarget>,
    #[serde(default)]
    pub good_fraction: Option<GoodFraction>,
    /// Shell bound of the partial sum `sum_nu delta_nu`.
    #[serde(default)]
    pub bourgain_l1: Option<u32>,
    /// Required in full mode.
    #[serde(default)]
    pub expansion: Option<Expansion>,
    #[serde(default)]
    pub fixed_point: FixedPointParams,
}

fn default_mode() -> MeasureMode {
    MeasureMode::Linear
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    /// Number of random angle vectors.
    pub angles: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(rename = "J")]
    pub j: i32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub sample: Sampler,
    pub epsilon: f64,
    pub t_end: f64,
    #[serde(default)]
    pub step: StepControl,
    /// Multiplies the datum.
    #[serde(default = "default_scale")]
    pub amplitude_scale: f64,
    /// Datum support; all window modes when absent.
    #[serde(default)]
    pub active: Option<Vec<i32>>,
    #[serde(default)]
    pub explicit: Explicit,
    /// Torus ansatz to compare against; its `epsilon` must match.
    #[serde(default)]
    pub ansatz: Option<Expansion>,
    #[serde(default)]
    pub fixed_point: FixedPointParams,
    #[serde(default)]
    pub max_ansatz_error: Option<f64>,
    #[serde(default = "default_gevrey_limit")]
    pub gevrey_limit: f64,
    #[serde(default)]
    pub probe: Option<Probe>,
    #[serde(default = "default_true")]
    pub write_trajectory: bool,
}

fn default_scale() -> f64 {
    1.0
}
fn default_gevrey_limit() -> f64 {
    2.0
}
fn default_true() -> bool {
    true
}
