use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("non-finite derivative at t = {t} (state {state:?})")]
    NonFinite { t: f64, state: alloc::vec::Vec<f64> },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("t = {t} lies outside the trajectory span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("pursuer and evader coincide (capture)")]
    Capture,

    #[error("evader speed is zero; lambda is undefined")]
    ZeroEvaderSpeed,

    #[error("pursuer starts on the evader (immediate capture)")]
    ImmediateCapture,

    #[error("distance rho = {0} is not positive")]
    NonPositiveDistance(f64),

    #[error("no equilibrium for speed ratio n = {0} (need 0 < n < 1)")]
    NoEquilibrium(f64),

    #[error("|sin zeta| fell below the singular floor at Theta = {theta}")]
    Singular { theta: f64 },

    #[error("evader positions disagree at anchor {k} (spread {spread:e})")]
    AnchorMismatch { k: usize, spread: f64 },

    #[error("need at least {needed} section crossings, found {found}")]
    TooFewCrossings { needed: usize, found: usize },

    #[error("empty sample set")]
    Empty,
}
