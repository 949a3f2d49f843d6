use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Argument outside the domain of a special function (zero, or on a branch cut).
    #[error("{function}: argument {z} is outside the principal-branch domain")]
    BranchCut {
        function: &'static str,
        z: Complex64,
    },

    #[error("{function}: non-finite result at argument {z}")]
    NonFinite {
        function: &'static str,
        z: Complex64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Detector queried before the light cone has reached it (ct <= L).
    #[error("detector time ct = {ct} does not exceed the detector distance L = {distance}")]
    PreLightCone { ct: f64, distance: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions: \
         estimate {estimate}, error bound {bound:e}"
    )]
    Quadrature {
        estimate: Complex64,
        bound: f64,
        subdivisions: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
