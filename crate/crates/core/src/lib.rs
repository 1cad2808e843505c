//! Pseudo-spectral solver and verification suite for incompressible
//! Hall-MHD on the periodic box, in three dimensions and in the 2½D
//! setting.

pub mod diagnostics;
pub mod harness;
pub mod error;
mod integrator;
pub mod mhd25d;
pub mod mhd3d;
pub mod sobolev;
pub mod spectral;

pub use error::{Error, Result};
