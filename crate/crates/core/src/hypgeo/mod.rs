//! Concrete hyperbolic surfaces: the unit disk, the upper half-plane, the
//! punctured disk and the round annulus `A(r, 1)`.
//!
//! The metric convention is the one with disk density `1 / (1 - |z|^2)`, so
//! that `dist(Disk, 0, t) = artanh(t)`. The half-plane then carries density
//! `1 / (2 Im w)` and the Cayley map `u -> i (1 + u) / (1 - u)` is an isometry.
//! Doubly connected surfaces are handled through their universal covers:
//! distances are minima of half-plane distances over deck translates.

mod ball;
mod covering;

pub use ball::{bloch_radius, inradius, HyperbolicBall, InradiusConfig, SubdomainSpec};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when deciding membership of points that may sit on a rounding
/// boundary (images of maps, samples of closed balls).
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// Extra deck translates examined on each side of the nearest one.
const DECK_MARGIN: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "SurfaceRepr")]
pub enum SurfaceModel {
    Disk,
    HalfPlane,
    PuncturedDisk,
    Annulus { inner_radius: f64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum SurfaceRepr {
    Disk,
    HalfPlane,
    PuncturedDisk,
    Annulus { inner_radius: f64 },
}

impl TryFrom<SurfaceRepr> for SurfaceModel {
    type Error = Error;

    fn try_from(repr: SurfaceRepr) -> Result<Self> {
        Ok(match repr {
            SurfaceRepr::Disk => SurfaceModel::Disk,
            SurfaceRepr::HalfPlane => SurfaceModel::HalfPlane,
            SurfaceRepr::PuncturedDisk => SurfaceModel::PuncturedDisk,
            SurfaceRepr::Annulus { inner_radius } => SurfaceModel::annulus(inner_radius)?,
        })
    }
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceModel::Disk => write!(f, "the unit disk"),
            SurfaceModel::HalfPlane => write!(f, "the upper half-plane"),
            SurfaceModel::PuncturedDisk => write!(f, "the punctured disk"),
            SurfaceModel::Annulus { inner_radius } => write!(f, "the annulus A({inner_radius}, 1)"),
        }
    }
}

impl SurfaceModel {
    pub fn annulus(inner_radius: f64) -> Result<Self> {
        if inner_radius > 0.0 && inner_radius < 1.0 {
            Ok(SurfaceModel::Annulus { inner_radius })
        } else {
            Err(Error::Usage(format!(
                "annulus inner radius must lie in (0, 1), got {inner_radius}"
            )))
        }
    }

    /// Strict membership predicate.
    pub fn contains(&self, z: Complex64) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match *self {
            SurfaceModel::Disk => z.norm() < 1.0,
            SurfaceModel::HalfPlane => z.im > 0.0,
            SurfaceModel::PuncturedDisk => {
                let m = z.norm();
                m > 0.0 && m < 1.0
            }
            SurfaceModel::Annulus { inner_radius } => {
                let m = z.norm();
                m > inner_radius && m < 1.0
            }
        }
    }

    /// Membership with [`MEMBERSHIP_SLACK`] on the outer side of every
    /// boundary component.
    pub fn contains_loose(&self, z: Complex64) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        let s = MEMBERSHIP_SLACK;
        match *self {
            SurfaceModel::Disk => z.norm() < 1.0 + s,
            SurfaceModel::HalfPlane => z.im > -s,
            SurfaceModel::PuncturedDisk => z.norm() < 1.0 + s,
            SurfaceModel::Annulus { inner_radius } => {
                let m = z.norm();
                m > inner_radius - s && m < 1.0 + s
            }
        }
    }

    pub fn check(&self, z: Complex64) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::OffSurface {
                point: z,
                surface: self.to_string(),
            })
        }
    }

    /// A canonical interior point.
    pub fn base_point(&self) -> Complex64 {
        match *self {
            SurfaceModel::Disk => Complex64::new(0.0, 0.0),
            SurfaceModel::HalfPlane => Complex64::new(0.0, 1.0),
            SurfaceModel::PuncturedDisk => Complex64::new(0.5, 0.0),
            SurfaceModel::Annulus { inner_radius } => Complex64::new(inner_radius.sqrt(), 0.0),
        }
    }

    /// Euclidean distance from `z` to the boundary of the surface in the
    /// Riemann sphere. The half-plane boundary includes the point at infinity,
    /// which is measured by `1 / |z|`.
    pub fn boundary_gap(&self, z: Complex64) -> f64 {
        match *self {
            SurfaceModel::Disk => 1.0 - z.norm(),
            SurfaceModel::HalfPlane => z.im.min(1.0 / z.norm()),
            SurfaceModel::PuncturedDisk => z.norm().min(1.0 - z.norm()),
            SurfaceModel::Annulus { inner_radius } => {
                (z.norm() - inner_radius).min(1.0 - z.norm())
            }
        }
    }

    /// Poincaré distance between two points of the surface.
    pub fn dist(&self, z: Complex64, w: Complex64) -> Result<f64> {
        self.check(z)?;
        self.check(w)?;
        Ok(self.dist_on_surface(z, w, 0))
    }

    /// Poincaré distance, or `+inf` when either point is off the surface.
    pub fn dist_or_inf(&self, z: Complex64, w: Complex64) -> f64 {
        if self.contains(z) && self.contains(w) {
            self.dist_on_surface(z, w, 0)
        } else {
            f64::INFINITY
        }
    }

    /// Deck-minimized distance with `extra` additional translates examined on
    /// each side. For simply connected surfaces `extra` is ignored.
    pub fn dist_with_deck_window(&self, z: Complex64, w: Complex64, extra: usize) -> Result<f64> {
        self.check(z)?;
        self.check(w)?;
        Ok(self.dist_on_surface(z, w, extra as i64))
    }

    fn dist_on_surface(&self, z: Complex64, w: Complex64, extra: i64) -> f64 {
        match *self {
            SurfaceModel::Disk => disk_dist(z, w),
            SurfaceModel::HalfPlane => half_plane_dist(z, w),
            SurfaceModel::PuncturedDisk => {
                let a = covering::punctured_lift(z);
                let b = covering::punctured_lift(w);
                deck_min(a.re - b.re, 1.0, extra, |k| {
                    half_plane_dist(a, b + Complex64::new(k as f64, 0.0))
                })
            }
            SurfaceModel::Annulus { inner_radius } => {
                let h = (1.0 / inner_radius).ln();
                let a = covering::annulus_strip_lift(z);
                let b = covering::annulus_strip_lift(w);
                deck_min(a.re - b.re, 2.0 * PI, extra, |k| {
                    let shifted = b + Complex64::new(2.0 * PI * k as f64, 0.0);
                    strip_dist(a, shifted, h)
                })
            }
        }
    }

    /// Points spread over the surface in a deterministic golden-angle spiral,
    /// reaching out to hyperbolic radius about 6 around the base point.
    pub fn sample_points(&self, n: usize) -> Vec<Complex64> {
        const GOLDEN: f64 = 2.399_963_229_728_653;
        const REACH: f64 = 6.0;
        (0..n)
            .map(|j| {
                let s = (j as f64 + 0.5) / n as f64;
                let angle = GOLDEN * j as f64;
                match *self {
                    SurfaceModel::Disk | SurfaceModel::PuncturedDisk => {
                        Complex64::from_polar((REACH * s.sqrt()).tanh(), angle)
                    }
                    SurfaceModel::HalfPlane => {
                        let u = Complex64::from_polar((REACH * s.sqrt()).tanh(), angle);
                        cayley(u)
                    }
                    SurfaceModel::Annulus { inner_radius } => {
                        Complex64::from_polar(inner_radius.powf(s), angle)
                    }
                }
            })
            .collect()
    }

    /// The point at hyperbolic distance `radius` from `center` in direction
    /// `angle`, measured in geodesic polar coordinates of the universal cover.
    pub fn geodesic_polar(&self, center: Complex64, radius: f64, angle: f64) -> Complex64 {
        match *self {
            SurfaceModel::Disk => {
                let u = Complex64::from_polar(radius.tanh(), angle);
                (u + center) / (Complex64::new(1.0, 0.0) + center.conj() * u)
            }
            SurfaceModel::HalfPlane => half_plane_polar(center, radius, angle),
            SurfaceModel::PuncturedDisk | SurfaceModel::Annulus { .. } => {
                let lifted = covering::lift(self, center).expect("doubly connected surface");
                covering::project(self, half_plane_polar(lifted, radius, angle))
                    .expect("doubly connected surface")
            }
        }
    }

    /// Largest Euclidean distance from `z` to a point within Poincaré distance
    /// `m` of it. Tends to zero as `z` approaches the finite boundary, which is
    /// what makes bounded-distance companions of a boundary-convergent
    /// sequence share its limit.
    pub fn companion_radius(&self, z: Complex64, m: f64) -> Result<f64> {
        self.check(z)?;
        match *self {
            SurfaceModel::Disk => {
                let t = m.tanh();
                let r = z.norm();
                Ok((1.0 - r * r) * t / (1.0 - t * r))
            }
            SurfaceModel::HalfPlane => Ok(z.im * (2.0 * m).exp_m1()),
            _ => Err(Error::Usage(format!(
                "companion radius is only available in closed form on the disk and half-plane, not {self}"
            ))),
        }
    }

    pub fn lift_to_half_plane(&self, z: Complex64) -> Result<Complex64> {
        self.check(z)?;
        covering::lift(self, z)
    }

    pub fn project_from_half_plane(&self, w: Complex64) -> Result<Complex64> {
        covering::project(self, w)
    }
}

fn deck_min(re_gap: f64, period: f64, extra: i64, f: impl Fn(i64) -> f64) -> f64 {
    let reach = (re_gap.abs() / period).ceil() as i64 + DECK_MARGIN + extra;
    (-reach..=reach).map(f).fold(f64::INFINITY, f64::min)
}

/// Disk distance, `asinh(|z - w| / sqrt((1 - |z|^2)(1 - |w|^2)))`.
pub fn disk_dist(z: Complex64, w: Complex64) -> f64 {
    let (rz, rw) = (z.norm(), w.norm());
    let den = ((1.0 - rz) * (1.0 + rz) * (1.0 - rw) * (1.0 + rw)).sqrt();
    ((z - w).norm() / den).asinh()
}

/// Half-plane distance, `asinh(|z - w| / (2 sqrt(Im z Im w)))`.
pub fn half_plane_dist(z: Complex64, w: Complex64) -> f64 {
    ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

/// Distance between two points of the strip `0 < Im < h`, computed in the
/// half-plane after `exp(pi z / h)`, rescaled so the first image has modulus 1.
fn strip_dist(a: Complex64, b: Complex64, h: f64) -> f64 {
    let s = PI / h;
    let w1 = Complex64::from_polar(1.0, s * a.im);
    let w2 = Complex64::from_polar((s * (b.re - a.re)).exp(), s * b.im);
    half_plane_dist(w1, w2)
}

/// Cayley map from the disk onto the half-plane.
pub fn cayley(u: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    Complex64::new(0.0, 1.0) * (one + u) / (one - u)
}

/// Inverse Cayley map from the half-plane onto the disk.
pub fn cayley_inverse(w: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (w - i) / (w + i)
}

/// Geodesic polar coordinates around `center` in the half-plane, evaluated
/// without cancellation for large radii.
fn half_plane_polar(center: Complex64, radius: f64, angle: f64) -> Complex64 {
    // Disk point u = t e^{i angle}; C(u) = (-2 t sin + i (1 - t^2)) / |1 - u|^2.
    let t = radius.tanh();
    let one_minus_t = 2.0 / ((2.0 * radius).exp() + 1.0);
    let one_minus_t2 = 1.0 / radius.cosh().powi(2);
    let half = (0.5 * angle).sin();
    let den = one_minus_t * one_minus_t + 4.0 * t * half * half;
    let c = Complex64::new(-2.0 * t * angle.sin() / den, one_minus_t2 / den);
    Complex64::new(center.re + center.im * c.re, center.im * c.im)
}
