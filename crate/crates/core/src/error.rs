use thiserror::Error;

use crate::model::SpinState;

/// Which validity threshold a gate was checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    /// General threshold `mu0` of the angle approximation.
    General,
    /// Simplified-frame threshold `mu0_tilde` used by the switching plan.
    Simplified,
}

impl std::fmt::Display for Threshold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Threshold::General => write!(f, "mu0"),
            Threshold::Simplified => write!(f, "mu0_tilde"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("inertia eta must be non-zero (eta = 0 is the non-inertial limit)")]
    SingularInertia,

    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("invalid spin state: {0}")]
    InvalidState(String),

    #[error("non-positive scale parameter {name} = {value}")]
    NonPositiveScale { name: &'static str, value: f64 },

    #[error("degenerate applied field (sigma = {sigma:e}); need h2 > 0 or h3 > 0")]
    DegenerateField { sigma: f64 },

    #[error("point too close to a pole of the spherical chart (x3 = {x3})")]
    PoleProximity { x3: f64 },

    #[error("initial polar angle theta0 = {theta0} lies on a pole")]
    OnPole { theta0: f64 },

    #[error("mu = {mu} exceeds the validity threshold {which} = {threshold}")]
    ThresholdExceeded {
        mu: f64,
        threshold: f64,
        which: Threshold,
    },

    #[error("field does not satisfy the simplified-frame hypothesis: {0}")]
    NotSimplified(String),

    #[error("no switching guarantee: Xi = {xi} < 1 and omega_hat * 2 mu = {ratio} is not 1/n")]
    Infeasible { xi: f64, ratio: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        last_good: Box<SpinState>,
    },

    #[error("norm invariant breached at t = {t}: ||m| - 1| = {drift:e}")]
    NormBreach { t: f64, drift: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
