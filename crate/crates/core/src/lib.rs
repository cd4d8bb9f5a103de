//! Poincaré geometry on the classical hyperbolic surfaces and left/right
//! iterated function systems of holomorphic self-maps.

pub mod error;
pub mod holmaps;
pub mod hypgeo;
pub mod ifs;
pub mod validators;

pub use error::{Error, Result};
pub use num_complex::Complex64;
