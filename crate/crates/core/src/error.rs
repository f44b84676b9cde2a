use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {dim} is too small, cones need N >= 3")]
    DimensionTooSmall { dim: usize },

    #[error("cap aperture {theta0} must lie strictly inside (0, pi/2)")]
    ApertureOutOfRange { theta0: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("radial integral did not converge: {0}")]
    NonConvergent(String),

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("eigenvalue search did not converge: {0}")]
    NoConvergence(String),

    #[error("shooting solution overflowed at r = {r}")]
    Overflow { r: f64 },

    #[error("lambda1 = {lambda1} sits on the ordering threshold k(k+N-2) with k = {k}")]
    ThresholdAmbiguity { lambda1: f64, k: usize },

    #[error("the zero function has no Sobolev quotient")]
    ZeroFunction,

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("spectral gap violated: mu3 = {mu3} <= mu2 = {mu2}")]
    GapViolation { mu2: f64, mu3: f64 },

    #[error("angular mode not supported here: {0}")]
    UnsupportedAngularMode(String),
}

impl Error {
    /// Stable variant name, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionTooSmall { .. } => "DimensionTooSmall",
            Error::ApertureOutOfRange { .. } => "ApertureOutOfRange",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NonConvergent(_) => "NonConvergent",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::NoConvergence(_) => "NoConvergence",
            Error::Overflow { .. } => "Overflow",
            Error::ThresholdAmbiguity { .. } => "ThresholdAmbiguity",
            Error::ZeroFunction => "ZeroFunction",
            Error::DivergentIntegral(_) => "DivergentIntegral",
            Error::GapViolation { .. } => "GapViolation",
            Error::UnsupportedAngularMode(_) => "UnsupportedAngularMode",
        }
    }

    /// Module that raises this kind of error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::DimensionTooSmall { .. } | Error::ApertureOutOfRange { .. } => "geometry",
            Error::NonConvergent(_) | Error::QuadratureFailure(_) => "quadrature",
            Error::NoConvergence(_) => "angular_spectrum",
            Error::Overflow { .. } => "radial_ode",
            Error::ThresholdAmbiguity { .. } => "spectrum",
            Error::ZeroFunction
            | Error::DivergentIntegral(_)
            | Error::GapViolation { .. }
            | Error::UnsupportedAngularMode(_) => "functionals",
            Error::InvalidParameter(_) => "input",
        }
    }
}
