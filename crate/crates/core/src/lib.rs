//! Pseudo-spectral laboratory for mild and mollified solutions of the
//! fractional Navier-Stokes equations on a periodic box.

pub mod config;
pub mod duhamel;
pub mod error;
pub mod experiment;
pub mod initial;
pub mod kernels;
pub mod norms;
pub mod params;
pub mod picard;
pub mod quadrature;
pub mod snapshot;
pub mod torus;

pub use error::{FgnsError, Result};
