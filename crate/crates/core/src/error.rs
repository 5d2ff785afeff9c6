use thiserror::Error;

/// Errors raised by the resonance workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{what} = {value} lies outside the admissible range [{lo}, {hi}]")]
    Range { what: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("singular boundary point: |F(alpha, lambda)| = {modulus:e} < {tol:e} at lambda = {lambda}")]
    SingularBoundaryPoint { lambda: f64, modulus: f64, tol: f64 },

    #[error("resonance not bracketed for alpha = {alpha} within radius {radius} of lambda0")]
    ResonanceNotBracketed { alpha: f64, radius: f64 },

    #[error("density is not absolutely continuous at alpha = alpha0 = {alpha0}")]
    NotAbsolutelyContinuous { alpha0: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
