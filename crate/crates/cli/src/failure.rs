use std::fmt;

use waveguide_core::Error;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// A diagnostic together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn from_core(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. } => EXIT_CONFIG,
            Error::PreLightCone { .. } => EXIT_DOMAIN,
            Error::BranchCut { .. } => EXIT_DOMAIN,
            Error::NonFinite { .. } | Error::Quadrature { .. } => EXIT_VALIDATION,
        };
        let message = match e {
            Error::PreLightCone { .. } => format!("pre-light-cone detector time: {e}"),
            _ => e.to_string(),
        };
        Failure { code, message }
    }

    pub fn io(e: impl fmt::Display) -> Self {
        Failure::validation(format!("output: {e}"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from_core(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
