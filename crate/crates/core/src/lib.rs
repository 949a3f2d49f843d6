//! Closed-form relativistic electron wave packets in a semi-infinite
//! cylindrical waveguide, their Dirac density and current, and the
//! spin-dependent backflow they display on a detector cross-section.

#![allow(clippy::excessive_precision)]

pub mod backflow;
pub mod error;
mod jet;
pub mod kernels;
pub mod oracle;
pub mod quadrature;
pub mod specfun;
pub mod wavepacket;

pub use error::{Error, Result};
