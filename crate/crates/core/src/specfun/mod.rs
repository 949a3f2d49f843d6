//! Special functions needed by the wave-packet kernels.
//!
//! Real-line `J_0`, `J_1` and the first zero of `J_0`; complex-argument `K_nu`
//! and `I_nu` for `nu` in `{-1/4, 0, 1/4, 1}` on the principal branch.

mod complex;
mod real;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub(crate) use complex::SERIES_RADIUS;
#[cfg(test)]
use complex::{i_pair_scaled, k_pair_scaled, ASYMPTOTIC_RADIUS};
pub use complex::{i_solution, k_solution, ScaledSolution, Sheet};
pub use real::{bessel_j, bessel_j01, first_j0_zero};

/// Orders of the modified Bessel functions exposed by this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BesselOrder {
    MinusQuarter,
    Zero,
    Quarter,
    One,
}

impl BesselOrder {
    pub const ALL: [BesselOrder; 4] = [
        BesselOrder::MinusQuarter,
        BesselOrder::Zero,
        BesselOrder::Quarter,
        BesselOrder::One,
    ];

    pub fn nu(self) -> f64 {
        match self {
            BesselOrder::MinusQuarter => -0.25,
            BesselOrder::Zero => 0.0,
            BesselOrder::Quarter => 0.25,
            BesselOrder::One => 1.0,
        }
    }

    pub fn from_nu(nu: f64) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.nu() == nu)
    }
}

/// `K_nu(z)` on the principal branch. Errors for `z = 0` and on the closed
/// negative real axis.
pub fn bessel_k(order: BesselOrder, z: Complex64) -> Result<Complex64> {
    let sol = k_solution(order.nu(), z, Sheet::Principal)?;
    finite_product("bessel_k", z, sol)
}

/// `I_nu(z)` on the principal branch. Non-integer orders error on the
/// negative real axis, `I_{-1/4}` errors at the origin.
pub fn bessel_i(order: BesselOrder, z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return match order {
            BesselOrder::Zero => Ok(Complex64::new(1.0, 0.0)),
            BesselOrder::Quarter | BesselOrder::One => Ok(Complex64::new(0.0, 0.0)),
            BesselOrder::MinusQuarter => Err(crate::error::Error::BranchCut {
                function: "bessel_i",
                z,
            }),
        };
    }
    let sol = i_solution(order.nu(), z)?;
    finite_product("bessel_i", z, sol)
}

fn finite_product(function: &'static str, z: Complex64, sol: ScaledSolution) -> Result<Complex64> {
    let value = sol.value * sol.log_scale.exp();
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(crate::error::Error::NonFinite { function, z })
    }
}
