use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("catalogue covers |nu| <= {x_max}, requested x = {x}")]
    CatalogueTooSmall { x: f64, x_max: f64 },

    #[error("multi-index is zero")]
    ZeroMultiIndex,

    #[error("order {k} requested but expansion populated only to order {populated}")]
    OrderNotPopulated { k: usize, populated: usize },

    #[error("small divisor |omega_j - omega.nu| = {value:e} below floor at j = {j}, nu = {nu}")]
    SmallDivisorBreach { j: i32, nu: String, value: f64 },

    #[error("amplitude c_{0} vanishes on an active mode")]
    ZeroAmplitude(i32),

    #[error("counterterm eta_{j} has imaginary part {value:e} above tolerance")]
    ImaginaryResidue { j: i32, value: f64 },

    #[error("fixed-point update stalled at {update:e} after {iterations} iterations")]
    NoContraction { iterations: usize, update: f64 },

    #[error("fixed point not reached in {iterations} iterations (last update {update:e})")]
    MaxIterExceeded { iterations: usize, update: f64 },

    #[error("frequency leaves Q at j = {j}: |omega_j - j^2| = {deviation}")]
    OutOfQ { j: i32, deviation: f64 },

    #[error("least-squares design matrix is numerically singular (rcond {rcond:e})")]
    RankDeficient { rcond: f64 },

    #[error("integrator step rejected at t = {t} (mass drift {drift:e})")]
    StepRejected { t: f64, drift: f64 },

    #[error("harmonic lattice limit exceeded: {0}")]
    LatticeOverflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag, used in error JSON written by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::Parse(_) => "Parse",
            Error::CatalogueTooSmall { .. } => "CatalogueTooSmall",
            Error::ZeroMultiIndex => "ZeroMultiIndex",
            Error::OrderNotPopulated { .. } => "OrderNotPopulated",
            Error::SmallDivisorBreach { .. } => "SmallDivisorBreach",
            Error::ZeroAmplitude(_) => "ZeroAmplitude",
            Error::ImaginaryResidue { .. } => "ImaginaryResidue",
            Error::NoContraction { .. } => "NoContraction",
            Error::MaxIterExceeded { .. } => "MaxIterExceeded",
            Error::OutOfQ { .. } => "OutOfQ",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::StepRejected { .. } => "StepRejected",
            Error::LatticeOverflow(_) => "LatticeOverflow",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
