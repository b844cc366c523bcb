use thiserror::Error;

/// Errors produced by the trap model and its numerical machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    /// The rf field has no on-axis node for this drive ratio.
    #[error("no trap exists for epsilon = {epsilon} (valid range is ({lower}, {upper}))")]
    NoTrap { epsilon: f64, lower: f64, upper: f64 },

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("field evaluation failed at rho = {rho} m, z = {z} m: {source}")]
    FieldMapPoint {
        rho: f64,
        z: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("quadratic fit failed: {0}")]
    FitFailure(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("time step {dt:e} s exceeds the limit {limit:e} s")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("particle escaped at t = {t:e} s (rho = {rho:e} m, z = {z:e} m)")]
    Escaped { t: f64, rho: f64, z: f64 },

    #[error("point (rho = {rho:e} m, z = {z:e} m) lies outside the field map")]
    OutOfExtent { rho: f64, z: f64 },

    #[error("ion left the field map during minimization")]
    IonEscaped,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Quadrature { .. }
            | Error::FitFailure(_)
            | Error::Escaped { .. }
            | Error::OutOfExtent { .. }
            | Error::IonEscaped => true,
            Error::FieldMapPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
