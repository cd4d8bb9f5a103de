//! Universal coverings of the doubly connected surfaces by the half-plane.
//!
//! Punctured disk: `w -> exp(2 pi i w)`, deck group `w -> w + k`.
//! Annulus `A(r, 1)`: strip `0 < Im zeta < h` with `h = ln(1/r)`, covering
//! `zeta -> exp(i zeta)` with deck group `zeta -> zeta + 2 pi k`, and the strip
//! is sent onto the half-plane by `zeta -> exp(pi zeta / h)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::SurfaceModel;
use crate::error::{Error, Result};

/// Principal lift of a punctured-disk point, with real part in `(-1/2, 1/2]`.
pub(super) fn punctured_lift(z: Complex64) -> Complex64 {
    Complex64::new(z.arg() / (2.0 * PI), -z.norm().ln() / (2.0 * PI))
}

/// Principal strip coordinate of an annulus point, with real part in `(-pi, pi]`.
pub(super) fn annulus_strip_lift(z: Complex64) -> Complex64 {
    Complex64::new(z.arg(), -z.norm().ln())
}

pub(super) fn lift(surface: &SurfaceModel, z: Complex64) -> Result<Complex64> {
    match *surface {
        SurfaceModel::PuncturedDisk => Ok(punctured_lift(z)),
        SurfaceModel::Annulus { inner_radius } => {
            let h = (1.0 / inner_radius).ln();
            Ok((annulus_strip_lift(z) * (PI / h)).exp())
        }
        _ => Err(unsupported(surface)),
    }
}

pub(super) fn project(surface: &SurfaceModel, w: Complex64) -> Result<Complex64> {
    match *surface {
        SurfaceModel::PuncturedDisk => Ok((Complex64::new(0.0, 2.0 * PI) * w).exp()),
        SurfaceModel::Annulus { inner_radius } => {
            let h = (1.0 / inner_radius).ln();
            let zeta = w.ln() * (h / PI);
            Ok((Complex64::new(0.0, 1.0) * zeta).exp())
        }
        _ => Err(unsupported(surface)),
    }
}

fn unsupported(surface: &SurfaceModel) -> Error {
    Error::Usage(format!("{surface} is simply connected; it has no half-plane lift"))
}
