use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::SurfaceModel;
use crate::error::{Error, Result};

/// Open Poincaré ball `B_X(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicBall {
    pub surface: SurfaceModel,
    pub center: Complex64,
    pub radius: f64,
}

impl HyperbolicBall {
    pub fn new(surface: SurfaceModel, center: Complex64, radius: f64) -> Result<Self> {
        surface.check(center)?;
        if radius.is_nan() || radius < 0.0 {
            return Err(Error::Usage(format!("ball radius must be nonnegative, got {radius}")));
        }
        Ok(HyperbolicBall {
            surface,
            center,
            radius,
        })
    }

    pub fn contains(&self, z: Complex64) -> Result<bool> {
        Ok(self.surface.dist(self.center, z)? < self.radius)
    }

    /// `n` points on the boundary sphere, evenly spaced in geodesic angle.
    pub fn boundary_samples(&self, n: usize) -> Vec<Complex64> {
        ring(&self.surface, self.center, self.radius, n)
    }

    /// Sampling of the closed ball: the center plus `2^level` concentric rings
    /// with `8 * 2^level` points each. Level `l` is a subset of level `l + 1`,
    /// so any maximum taken over the samples is nondecreasing in `level`.
    pub fn samples(&self, level: u32) -> Vec<Complex64> {
        let rings = 1usize << level;
        let per_ring = 8 * rings;
        let mut out = Vec::with_capacity(1 + rings * per_ring);
        out.push(self.center);
        for k in 1..=rings {
            let r = self.radius * k as f64 / rings as f64;
            out.extend(ring(&self.surface, self.center, r, per_ring));
        }
        out
    }
}

fn ring(surface: &SurfaceModel, center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| surface.geodesic_polar(center, radius, 2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// A subdomain `Omega` of a surface `X`.
#[derive(Clone)]
pub enum SubdomainSpec {
    /// `Omega = X`.
    Whole,
    Ball(HyperbolicBall),
    /// A Euclidean disk intersected with the surface.
    EuclideanDisk { center: Complex64, radius: f64 },
    /// Arbitrary membership callback, with a sample grid covering the domain.
    Predicate {
        label: String,
        membership: Arc<dyn Fn(Complex64) -> bool + Send + Sync>,
        grid: Vec<Complex64>,
    },
}

impl fmt::Debug for SubdomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubdomainSpec::Whole => write!(f, "Whole"),
            SubdomainSpec::Ball(b) => f.debug_tuple("Ball").field(b).finish(),
            SubdomainSpec::EuclideanDisk { center, radius } => f
                .debug_struct("EuclideanDisk")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            SubdomainSpec::Predicate { label, grid, .. } => f
                .debug_struct("Predicate")
                .field("label", label)
                .field("grid_len", &grid.len())
                .finish(),
        }
    }
}

impl SubdomainSpec {
    pub fn predicate(
        label: impl Into<String>,
        membership: impl Fn(Complex64) -> bool + Send + Sync + 'static,
        grid: Vec<Complex64>,
    ) -> Self {
        SubdomainSpec::Predicate {
            label: label.into(),
            membership: Arc::new(membership),
            grid,
        }
    }

    /// Membership in `Omega`, with the surface part tested loosely.
    pub fn contains(&self, surface: &SurfaceModel, z: Complex64) -> bool {
        if !surface.contains_loose(z) {
            return false;
        }
        match self {
            SubdomainSpec::Whole => true,
            SubdomainSpec::Ball(b) => b.surface.dist_or_inf(b.center, z) < b.radius,
            SubdomainSpec::EuclideanDisk { center, radius } => (z - center).norm() < *radius,
            SubdomainSpec::Predicate { membership, .. } => membership(z),
        }
    }

    /// Checks that every sample point of a predicate domain lies on `surface`.
    pub fn validate(&self, surface: &SurfaceModel) -> Result<()> {
        if let SubdomainSpec::Predicate { label, grid, .. } = self {
            if let Some(p) = grid.iter().find(|p| !surface.contains_loose(**p)) {
                return Err(Error::Usage(format!(
                    "sample {p} of domain '{label}' is not on {surface}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InradiusConfig {
    /// Radii at or beyond the cap are reported as `+inf`.
    pub cap: f64,
    pub bisection_steps: u32,
    pub coarse_samples: usize,
    pub fine_samples: usize,
    /// Bracket width below which the fine sampling is used.
    pub refine_below: f64,
}

impl Default for InradiusConfig {
    fn default() -> Self {
        InradiusConfig {
            cap: 12.0,
            bisection_steps: 60,
            coarse_samples: 256,
            fine_samples: 4096,
            refine_below: 1e-3,
        }
    }
}

/// Hyperbolic inradius `R(z; Omega, X)`: the largest `r` with `B_X(z, r)`
/// inside `Omega`, found by bisection on sampled ball boundaries.
pub fn inradius(
    surface: &SurfaceModel,
    domain: &SubdomainSpec,
    z: Complex64,
    config: &InradiusConfig,
) -> Result<f64> {
    surface.check(z)?;
    if !domain.contains(surface, z) {
        return Err(Error::OffSurface {
            point: z,
            surface: format!("the subdomain {domain:?} of {surface}"),
        });
    }
    let fits = |r: f64, n: usize| {
        ring(surface, z, r, n)
            .into_iter()
            .all(|p| domain.contains(surface, p))
    };
    if fits(config.cap, config.fine_samples) {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0, config.cap);
    for _ in 0..config.bisection_steps {
        let mid = 0.5 * (lo + hi);
        let n = if hi - lo < config.refine_below {
            config.fine_samples
        } else {
            config.coarse_samples
        };
        if fits(mid, n) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Lower estimate of the Bloch radius `R(Omega, X)` as the maximum inradius
/// over a grid of points of `Omega`.
pub fn bloch_radius(
    surface: &SurfaceModel,
    domain: &SubdomainSpec,
    grid: &[Complex64],
    config: &InradiusConfig,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Usage("bloch radius needs a nonempty grid".into()));
    }
    let mut best: f64 = 0.0;
    for &z in grid {
        best = best.max(inradius(surface, domain, z, config)?);
        if best.is_infinite() {
            break;
        }
    }
    Ok(best)
}
