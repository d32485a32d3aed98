//! Monte Carlo estimates of resonant-set probabilities, good-parameter fractions, and the
//! partial Bourgain sum `sum_nu delta_nu`.

use rayon::prelude::*;
use serde::Serialize;

use crate::compat::{solve_compatibility, FixedPointParams};
use crate::error::{Error, Result};
use crate::lindstedt::SolveParams;
use crate::nonres::{delta_nu, diophantine_test, i0_of, DiophantineParams, FrequencyVector, NuCatalogue};
use crate::scalar::bracket;
use crate::seqspace::{sample_initial_datum, sample_potential, sample_rng, ModeWindow, MultiIndex, SampleSpec};

/// Constant of the resonant-set bound `C <i_0>^N delta`.
pub const RESONANT_BOUND_CONSTANT: f64 = 8.0;

/// How the frequency of a sample is obtained.
#[derive(Clone, Debug)]
pub enum FrequencyMode {
    /// `omega_j = j^2 + V_j`.
    Linear,
    /// Converged frequency of the compatibility fixed point.
    Full(Box<FullSolve>),
}

/// Solver setup for [`FrequencyMode::Full`]. The datum is sampled on the whole window and
/// restricted to `params.active`.
#[derive(Clone, Debug)]
pub struct FullSolve {
    pub params: SolveParams<f64>,
    pub fix: FixedPointParams,
}

impl FrequencyMode {
    pub fn name(&self) -> &'static str {
        match self {
            FrequencyMode::Linear => "linear",
            FrequencyMode::Full(_) => "full",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub target: String,
    pub mode: String,
    pub samples: usize,
    pub hits: usize,
    /// Samples whose inner solve failed; excluded from the estimate.
    pub indeterminate: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

impl MeasureEstimate {
    fn new(target: String, mode: &FrequencyMode, samples: usize, hits: usize, indeterminate: usize, bound: f64) -> Self {
        let n = samples - indeterminate;
        let estimate = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
        let std_error = if n == 0 { 0.0 } else { (estimate * (1.0 - estimate) / n as f64).sqrt() };
        Self {
            target,
            mode: mode.name().to_string(),
            samples,
            hits,
            indeterminate,
            estimate,
            std_error,
            bound,
            pass: estimate <= bound + 3.0 * std_error,
        }
    }
}

// Frequency of sample `index`; `None` when the inner solve fails.
fn sample_frequency(
    spec: &SampleSpec,
    window: ModeWindow,
    mode: &FrequencyMode,
    index: u64,
) -> Result<Option<FrequencyVector<f64>>> {
    let mut rng = sample_rng(spec.seed, index);
    let v = sample_potential::<f64>(spec, window, &mut rng);
    let w = sample_initial_datum::<f64>(spec, window, &mut rng);
    match mode {
        FrequencyMode::Linear => Ok(Some(FrequencyVector::from_potential(&v)?)),
        FrequencyMode::Full(full) => {
            let active = full.params.active.clone().unwrap_or_else(|| window.modes().collect());
            let w = w.map(|j, x| if active.contains(&j) { x } else { num_complex::Complex::new(0.0, 0.0) });
            // A uniform shift of omega is invisible to mass-zero nu, so omega itself serves
            // in place of omega - kappa_0.
            match solve_compatibility(&v, &w, full.params.epsilon, &full.params, &full.fix) {
                Ok(sol) => Ok(Some(sol.omega)),
                Err(Error::InvalidParameter(m)) => Err(Error::InvalidParameter(m)),
                Err(_) => Ok(None),
            }
        }
    }
}

// Counts (hits, indeterminate) over `samples` draws in parallel; `hit` decides per frequency.
fn count<F>(spec: &SampleSpec, window: ModeWindow, mode: &FrequencyMode, samples: usize, hit: F) -> Result<(usize, usize)>
where
    F: Fn(&FrequencyVector<f64>) -> bool + Sync,
{
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            Ok(match sample_frequency(spec, window, mode, i)? {
                Some(om) => (hit(&om) as usize, 0),
                None => (0, 1),
            })
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
}

/// Probability that `|omega . nu| <= delta`, with bound `8 <i_0(nu)>^N delta`.
pub fn resonant_probability(
    nu: &MultiIndex,
    delta: f64,
    spec: &SampleSpec,
    window: ModeWindow,
    samples: usize,
    mode: &FrequencyMode,
) -> Result<MeasureEstimate> {
    spec.validate()?;
    let i0 = i0_of(nu)?;
    if nu.mass() != 0 {
        return Err(Error::InvalidParameter(format!("nu = {nu} must have zero mass")));
    }
    if !nu.fits(&window) {
        return Err(Error::InvalidParameter(format!("nu = {nu} leaves the window")));
    }
    let (hits, bad) = count(spec, window, mode, samples, |om| om.dot(nu).abs() <= delta)?;
    let bound = RESONANT_BOUND_CONSTANT * bracket::<f64>(i0).powi(spec.n as i32) * delta;
    Ok(MeasureEstimate::new(format!("resonant nu={} delta={delta}", nu.encode()), mode, samples, hits, bad, bound))
}

/// Fraction of samples failing the weak Diophantine test on the catalogue, with bound
/// `gamma * sum_cat delta_nu`.
pub fn good_parameter_fraction(
    p: &DiophantineParams,
    cat: &NuCatalogue,
    spec: &SampleSpec,
    window: ModeWindow,
    samples: usize,
    mode: &FrequencyMode,
) -> Result<MeasureEstimate> {
    spec.validate()?;
    p.validate()?;
    if cat.is_empty() {
        return Err(Error::InvalidParameter("catalogue is empty".into()));
    }
    let (hits, bad) = count(spec, window, mode, samples, |om| !diophantine_test(om, p, cat).pass)?;
    let bound = p.gamma * cat.iter().map(delta_nu::<f64>).sum::<f64>();
    Ok(MeasureEstimate::new(
        format!("diophantine gamma={} tau={}", p.gamma, p.tau),
        mode,
        samples,
        hits,
        bad,
        bound,
    ))
}

/// Partial sums of `sum_nu prod_i (1 + <i>^2 nu_i^2)^{-1}` over all `nu` supported in the
/// window, by l1 shell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BourgainSum {
    /// `shells[n]` is the contribution of `||nu||_1 = n`.
    pub shells: Vec<f64>,
    pub total: f64,
    pub last_increment: f64,
}

/// Shell sums via the product over modes of `sum_v t^{|v|} / (1 + <i>^2 v^2)`, truncated at
/// degree `l1_max`.
pub fn bourgain_sum(window: ModeWindow, l1_max: u32) -> BourgainSum {
    let l = l1_max as usize;
    let mut acc = vec![0.0; l + 1];
    acc[0] = 1.0;
    for m in window.modes() {
        let b2 = bracket::<f64>(m).powi(2);
        let factor: Vec<f64> = (0..=l)
            .map(|v| if v == 0 { 1.0 } else { 2.0 / (1.0 + b2 * (v * v) as f64) })
            .collect();
        let mut next = vec![0.0; l + 1];
        for (a, x) in acc.iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            for (b, f) in factor.iter().enumerate().take(l + 1 - a) {
                next[a + b] += x * f;
            }
        }
        acc = next;
    }
    let total = acc.iter().sum();
    BourgainSum { last_increment: *acc.last().unwrap(), shells: acc, total }
}
