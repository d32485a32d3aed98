//! Galerkin-truncated construction of almost-periodic solutions of the quintic NLS on the
//! circle with a convolution potential,
//!
//! ```text
//! i (u_j)_t + (j^2 + V_j) u_j + eps (|u|^4 u)_j = 0,    |j| <= J,
//! ```
//!
//! via counterterm (Lindstedt) expansions, non-resonance checks, the compatibility fixed
//! point, Monte Carlo measure estimates and an independent time integrator.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases below fix `f64`.

// NaN must fail the tolerance checks, hence `!(x <= tol)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compat;
pub mod conv;
pub mod dynamics;
pub mod error;
pub mod lindstedt;
pub mod measure;
pub mod nonres;
pub mod report;
pub mod scalar;
pub mod seqspace;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Sequence = seqspace::SpectralSequence<f64>;
pub type Frequencies = nonres::FrequencyVector<f64>;
pub type Expansion = lindstedt::TorusExpansion<f64>;
pub type Params = lindstedt::SolveParams<f64>;
pub type Gevrey = seqspace::GevreyParams<f64>;

pub type Solution = compat::CompatSolution<f64>;
