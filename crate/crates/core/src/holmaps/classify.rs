

use num_complex::Complex64;

use super::{ExtPoint, HolMap};
use crate::error::Result;
use crate::hypgeo::{HyperbolicBall, SurfaceModel};

/// Dynamical type of a self-map, following the Heins trichotomy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapClass {
    AttractingInterior { point: Complex64, multiplier: f64 },
    /// Finite-order automorphism.
    PeriodicAut { period: u32 },
    PseudoperiodicAut,
    CompactlyDivergent,
    Unknown,
}

const MAX_PERIOD: u32 = 64;
const PERIOD_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-10;
const PROBE_STEPS: usize = 200;

fn rotation_class(angle: f64) -> MapClass {
    (1..=MAX_PERIOD)
        .find(|&q| (Complex64::from_polar(1.0, q as f64 * angle) - 1.0).norm() < PERIOD_TOL)
        .map_or(MapClass::PseudoperiodicAut, |period| MapClass::PeriodicAut { period })
}

/// Classifies a self-map of `surface`. Mobius maps (and maps reducible to
/// them) are decided from their fixed points and multipliers; annulus
/// automorphisms in closed form; everything else by iterating from the base
/// point.
pub fn classify(map: &HolMap, surface: &SurfaceModel) -> MapClass {
    if let HolMap::AnnulusAut(a) = map {
        return if a.sign == -1 {
            // phi_{theta,-1} is an involution fixing the points with z^2 = r e^{i theta}.
            MapClass::PeriodicAut { period: 2 }
        } else {
            rotation_class(a.theta)
        };
    }
    if let Some(m) = map.as_mobius() {
        if m.is_identity() {
            return MapClass::PeriodicAut { period: 1 };
        }
        let interior = m
            .fixed_points()
            .map(|fp| {
                fp.points()
                    .into_iter()
                    .filter_map(ExtPoint::finite)
                    .find(|p| surface.contains(*p))
            })
            .unwrap_or(None);
        return match interior {
            None => MapClass::CompactlyDivergent,
            Some(point) => match m.derivative(point) {
                Ok(mult) if mult.norm() < 1.0 - UNIT_TOL => MapClass::AttractingInterior {
                    point,
                    multiplier: mult.norm(),
                },
                Ok(mult) if (mult.norm() - 1.0).abs() <= UNIT_TOL => rotation_class(mult.arg()),
                _ => MapClass::Unknown,
            },
        };
    }
    probe(map, surface)
}

fn probe(map: &HolMap, surface: &SurfaceModel) -> MapClass {
    let base = surface.base_point();
    let mut z = base;
    let mut prev = z;
    let mut base_dist = Vec::with_capacity(PROBE_STEPS);
    for _ in 0..PROBE_STEPS {
        prev = z;
        z = match map.eval(z) {
            Ok(w) if surface.contains(w) => w,
            _ => return MapClass::Unknown,
        };
        base_dist.push(surface.dist_or_inf(base, z));
    }
    let last_step = surface.dist_or_inf(prev, z);
    if last_step < 1e-9 {
        if let Ok(mult) = map.derivative(z) {
            if mult.norm() < 1.0 - UNIT_TOL {
                return MapClass::AttractingInterior {
                    point: z,
                    multiplier: mult.norm(),
                };
            }
        }
        return MapClass::Unknown;
    }
    // Escape: the distance to the base point keeps growing and the steps do
    // not shrink geometrically, as they would near an attracting point.
    let tail = &base_dist[PROBE_STEPS / 2..];
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    let n = tail.len();
    let (s1, s2) = (tail[n - 1] - tail[n - 2], tail[n - 2] - tail[n - 3]);
    if increasing && tail[n - 1] > 1.0 && s1 > 0.9 * s2 {
        MapClass::CompactlyDivergent
    } else {
        MapClass::Unknown
    }
}

/// True when every one of `samples` standard points of `surface` maps into it.
pub fn is_self_map(map: &HolMap, surface: &SurfaceModel, samples: usize) -> bool {
    surface
        .sample_points(samples.max(1))
        .into_iter()
        .all(|z| matches!(map.eval(z), Ok(w) if surface.contains_loose(w)))
}

/// Where a deviation supremum is sampled.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    /// Closed ball, sampled at the given refinement level.
    Ball(&'a HyperbolicBall, u32),
    Points(&'a [Complex64]),
}

/// `max_w dist(f(w), g(w))` over the sampled region.
pub fn sup_deviation(f: &HolMap, g: &HolMap, surface: &SurfaceModel, region: Region<'_>) -> Result<f64> {
    let owned;
    let points = match region {
        Region::Ball(ball, level) => {
            owned = ball.samples(level);
            &owned[..]
        }
        Region::Points(p) => p,
    };
    let mut best: f64 = 0.0;
    for &w in points {
        best = best.max(surface.dist(f.eval(w)?, g.eval(w)?)?);
    }
    Ok(best)
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f_delta(delta: f64, theta: f64) -> HolMap {
        HolMap::affine(c(0.5, 0.0), Complex64::from_polar(delta, theta)).unwrap()
    }

    #[test]
    fn halving_is_attracting() {
        let f = HolMap::affine(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        match classify(&f, &SurfaceModel::Disk) {
            MapClass::AttractingInterior { point, multiplier } => {
                assert!(point.norm() < 1e-15);
                assert!((multiplier - 0.5).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_translation_is_compactly_divergent() {
        let f = HolMap::translation(c(-1.0, 0.0));
        assert_eq!(classify(&f, &SurfaceModel::HalfPlane), MapClass::CompactlyDivergent);
    }

    #[test]
    fn elliptic_half_plane_maps() {
        let phi = |nu: f64| HolMap::mobius(c(nu, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(nu, 0.0)).unwrap();
        // nu = 1 rotates by a quarter turn around i.
        assert_eq!(classify(&phi(1.0), &SurfaceModel::HalfPlane), MapClass::PeriodicAut { period: 4 });
        assert_eq!(classify(&phi(3.0), &SurfaceModel::HalfPlane), MapClass::PseudoperiodicAut);
    }

    #[test]
    fn annulus_automorphisms() {
        let r = 0.2;
        let flip = HolMap::annulus_aut(0.4, -1, r).unwrap();
        assert_eq!(classify(&flip, &SurfaceModel::annulus(r).unwrap()), MapClass::PeriodicAut { period: 2 });
        let quarter = HolMap::annulus_aut(PI / 2.0, 1, r).unwrap();
        assert_eq!(
            classify(&quarter, &SurfaceModel::annulus(r).unwrap()),
            MapClass::PeriodicAut { period: 4 }
        );
        let irr = HolMap::annulus_aut(1.0, 1, r).unwrap();
        assert_eq!(classify(&irr, &SurfaceModel::annulus(r).unwrap()), MapClass::PseudoperiodicAut);
    }

    #[test]
    fn empirical_probe() {
        let e = HolMap::exp_affine(c(0.0, 1.0));
        assert!(matches!(
            classify(&e, &SurfaceModel::HalfPlane),
            MapClass::AttractingInterior { .. }
        ));
        let b = HolMap::blaschke(c(1.0, 0.0), vec![c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(classify(&b, &SurfaceModel::Disk), MapClass::AttractingInterior { .. }));
        // (3z^2 + 1) / (3 + z^2): parabolic, iterates run to 1.
        let a = c(0.0, 1.0 / 3f64.sqrt());
        let parabolic = HolMap::blaschke(c(1.0, 0.0), vec![a, -a]).unwrap();
        assert_eq!(classify(&parabolic, &SurfaceModel::Disk), MapClass::CompactlyDivergent);
    }

    #[test]
    fn self_map_guard() {
        let d = SurfaceModel::Disk;
        assert!(is_self_map(&f_delta(0.4, 0.3), &d, 64));
        assert!(!is_self_map(&f_delta(0.6, 0.3), &d, 64));
        let r = 0.1;
        let a = SurfaceModel::annulus(r).unwrap();
        for (theta, sign) in [(0.3, 1), (2.0, -1), (-1.0, -1)] {
            assert!(is_self_map(&HolMap::annulus_aut(theta, sign, r).unwrap(), &a, 256));
        }
    }

    #[test]
    fn deviation_examples() {
        let d = SurfaceModel::Disk;
        let ball = HyperbolicBall::new(d, c(0.0, 0.0), 1.0).unwrap();
        let big_f = HolMap::affine(c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(sup_deviation(&big_f, &big_f, &d, Region::Ball(&ball, 2)).unwrap(), 0.0);
        let mut last = f64::INFINITY;
        for delta in [0.1, 0.01, 0.001] {
            let dev = sup_deviation(&f_delta(delta, 0.0), &big_f, &d, Region::Ball(&ball, 2)).unwrap();
            assert!(dev > 0.0 && dev < last);
            last = dev;
        }
    }

    #[test]
    fn deviation_is_monotone_in_refinement() {
        let d = SurfaceModel::Disk;
        let ball = HyperbolicBall::new(d, c(0.1, 0.2), 1.5).unwrap();
        let f = HolMap::blaschke(c(0.9, 0.1), vec![c(0.2, 0.0), c(-0.1, 0.3)]).unwrap();
        let g = HolMap::affine(c(0.5, 0.0), c(0.0, 0.1)).unwrap();
        let devs: Vec<f64> = (0..4)
            .map(|l| sup_deviation(&f, &g, &d, Region::Ball(&ball, l)).unwrap())
            .collect();
        assert!(devs.windows(2).all(|w| w[1] >= w[0]), "{devs:?}");
    }
}
