use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("evaluation at {z} is within {guard:e} of the pole p = {p}")]
    PoleProximity { z: Complex64, p: f64, guard: f64 },

    #[error("series did not converge: {what} (tail estimate {tail:e} exceeds {limit:e})")]
    NonConvergence { what: &'static str, tail: f64, limit: f64 },

    #[error("mismatched operands: {0}")]
    Mismatch(String),

    #[error("sampled image curve self-intersects (|area| = {area})")]
    SelfIntersection { area: f64 },

    #[error("|R~'| = {min_abs:e} on the unit circle at {zeta}")]
    ZeroOnBoundary { zeta: Complex64, min_abs: f64 },

    #[error("sup |omega'| = {sup} exceeds the admissible bound {bound}")]
    OmegaBoundViolation { sup: f64, bound: f64 },

    #[error("R~' has a zero in the closed unit disk (nondegeneracy constant C = 0)")]
    DegeneratePrincipalPart,

    #[error("dilatation bound kappa = {kappa} is not below 1")]
    DilatationNotContractive { kappa: f64 },

    #[error("vanishing denominator {abs:e} at {z}")]
    VanishingDenominator { z: Complex64, abs: f64 },

    #[error("critical point: |f'({z})| = {abs:e}")]
    CriticalPoint { z: Complex64, abs: f64 },

    #[error("degenerate Moebius map (|ad - bc| = {det_abs:e})")]
    DegenerateMap { det_abs: f64 },

    #[error("eta' vanishes in the domain (min sampled |eta'| = {min_abs:e}, winding {winding})")]
    DegenerateEta { min_abs: f64, winding: i64 },

    #[error("interior Taylor part differs from omega at coefficient {index}")]
    TaylorMismatch { index: usize },

    #[error("field is empty")]
    EmptyField,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
