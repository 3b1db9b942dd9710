use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("slow variable d = {0} lies outside [-1, 1]")]
    SlowDomain(f64),

    #[error("harmonic multiple n = {0} is not supported")]
    UnsupportedHarmonic(u32),

    #[error("wave number kappa = {kappa} lies within {radius} of the singular value {pole}")]
    SingularKappa { kappa: f64, pole: f64, radius: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("parameter `{0}` is not available for this system")]
    UnsupportedParameter(String),

    #[error("step size underflow at t = {t} (h = {step}), last state {state:?}")]
    StepUnderflow { t: f64, step: f64, state: Vec<f64> },

    #[error("integration exceeded {0} steps")]
    StepLimit(usize),

    #[error("non-finite state encountered at t = {0}")]
    NonFinite(f64),

    #[error("z1 = {z1} is not an equilibrium (residual {residual:e})")]
    NotAnEquilibrium { z1: f64, residual: f64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("{0}")]
    InvalidInput(String),
}

impl Error {
    /// True for errors raised because the model is evaluated at a removable
    /// singularity of its closed-form coefficients.
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::SingularKappa { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
