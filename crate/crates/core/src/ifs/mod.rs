//! Left and right iterated function systems.
//!
//! A [`MapSequence`] generates `f_0, f_1, ...`; the engines below record
//! `L_nu = f_nu ∘ ... ∘ f_0` or `R_nu = f_0 ∘ ... ∘ f_nu` on a probe set.

mod detect;

pub use detect::{detect, Tolerances, Verdict};

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holmaps::{is_self_map, HolMap};
use crate::hypgeo::SurfaceModel;

/// Number of standard sample points used by the self-map guard.
pub const GUARD_SAMPLES: usize = 64;

type Generator = dyn Fn(usize) -> HolMap + Send + Sync;

/// How an explicit list of maps continues past its end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tail {
    Cycle,
    RepeatLast,
}

/// An indexed family `nu -> f_nu` of self-maps of one surface.
pub struct MapSequence {
    generator: Arc<Generator>,
    surface: SurfaceModel,
    limit: Option<HolMap>,
    guard: Mutex<GuardCache>,
}

#[derive(Default)]
struct GuardCache {
    by_index: HashMap<usize, bool>,
    last: Option<(HolMap, bool)>,
}

impl fmt::Debug for MapSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapSequence")
            .field("surface", &self.surface)
            .field("limit", &self.limit)
            .finish_non_exhaustive()
    }
}

impl Clone for MapSequence {
    fn clone(&self) -> Self {
        MapSequence {
            generator: Arc::clone(&self.generator),
            surface: self.surface,
            limit: self.limit.clone(),
            guard: Mutex::new(GuardCache::default()),
        }
    }
}

impl MapSequence {
    pub fn new(surface: SurfaceModel, generator: impl Fn(usize) -> HolMap + Send + Sync + 'static) -> Self {
        MapSequence {
            generator: Arc::new(generator),
            surface,
            limit: None,
            guard: Mutex::new(GuardCache::default()),
        }
    }

    /// `f_nu = f` for every `nu`; the declared limit is `f`.
    pub fn constant(surface: SurfaceModel, f: HolMap) -> Self {
        let g = f.clone();
        MapSequence::new(surface, move |_| g.clone()).with_limit(f)
    }

    pub fn from_list(surface: SurfaceModel, maps: Vec<HolMap>, tail: Tail) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::Usage("a map sequence needs at least one map".into()));
        }
        let n = maps.len();
        Ok(MapSequence::new(surface, move |nu| match tail {
            Tail::Cycle => maps[nu % n].clone(),
            Tail::RepeatLast => maps[nu.min(n - 1)].clone(),
        }))
    }

    pub fn with_limit(mut self, limit: HolMap) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn surface(&self) -> SurfaceModel {
        self.surface
    }

    pub fn limit(&self) -> Option<&HolMap> {
        self.limit.as_ref()
    }

    /// `f_nu`, without the self-map guard.
    pub fn map(&self, nu: usize) -> HolMap {
        (self.generator)(nu)
    }

    /// `f_nu`, after checking it maps the standard samples into the surface.
    /// The check result is cached per index.
    pub fn get(&self, nu: usize) -> Result<HolMap> {
        let f = self.map(nu);
        let mut cache = self.guard.lock().unwrap_or_else(|e| e.into_inner());
        let ok = match cache.by_index.get(&nu) {
            Some(&ok) => ok,
            None => {
                let ok = match &cache.last {
                    Some((g, ok)) if *g == f => *ok,
                    _ => is_self_map(&f, &self.surface, GUARD_SAMPLES),
                };
                cache.by_index.insert(nu, ok);
                cache.last = Some((f.clone(), ok));
                ok
            }
        };
        if ok {
            Ok(f)
        } else {
            Err(Error::NotSelfMap {
                index: nu,
                surface: self.surface.to_string(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

/// One step of an orbit, for all probes at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub images: Vec<Complex64>,
    /// Largest pairwise Poincaré distance between the images.
    pub diam: f64,
    /// Distance moved by the image of probe 0 in this step.
    pub step_disp: f64,
    /// Distance from the image of probe 0 to probe 0 itself.
    pub base_dist: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub side: Side,
    pub probes: Vec<Complex64>,
    pub steps: Vec<StepRecord>,
}

impl OrbitTrace {
    fn start(side: Side, surface: &SurfaceModel, probes: &[Complex64], n: usize) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::Usage("at least one probe is required".into()));
        }
        if n == 0 {
            return Err(Error::Usage("an orbit needs at least one step".into()));
        }
        for &z in probes {
            surface.check(z)?;
        }
        Ok(OrbitTrace {
            side,
            probes: probes.to_vec(),
            steps: Vec::with_capacity(n),
        })
    }

    fn push(&mut self, surface: &SurfaceModel, images: Vec<Complex64>) -> Result<()> {
        let step = self.steps.len();
        for &w in &images {
            surface.check(w).map_err(|e| e.at_step(step))?;
        }
        let z0 = self.probes[0];
        let prev = self.steps.last().map_or(z0, |r| r.images[0]);
        let mut diam: f64 = 0.0;
        for (i, &a) in images.iter().enumerate() {
            for &b in &images[i + 1..] {
                diam = diam.max(surface.dist_or_inf(a, b));
            }
        }
        self.steps.push(StepRecord {
            diam,
            step_disp: surface.dist_or_inf(prev, images[0]),
            base_dist: surface.dist_or_inf(z0, images[0]),
            images,
        });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Images of probe `k` along the orbit.
    pub fn path(&self, k: usize) -> Vec<Complex64> {
        self.steps.iter().map(|r| r.images[k]).collect()
    }
}

fn apply_all(f: &HolMap, points: &[Complex64], step: usize) -> Result<Vec<Complex64>> {
    points
        .iter()
        .map(|&z| f.eval(z).map_err(|e| e.at_step(step)))
        .collect()
}

fn fetch(seq: &MapSequence, nu: usize) -> Result<HolMap> {
    seq.get(nu).map_err(|e| match e {
        e @ Error::NotSelfMap { .. } => e,
        other => other.at_step(nu),
    })
}

/// `L_nu(probes)` for `nu = 0..n`, by forward application.
pub fn left_orbit(seq: &MapSequence, probes: &[Complex64], n: usize) -> Result<OrbitTrace> {
    let surface = seq.surface();
    let mut trace = OrbitTrace::start(Side::Left, &surface, probes, n)?;
    let mut current = probes.to_vec();
    for nu in 0..n {
        let f = fetch(seq, nu)?;
        current = apply_all(&f, &current, nu)?;
        trace.push(&surface, current.clone())?;
    }
    Ok(trace)
}

/// How the right engine realizes `R_nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RightStrategy {
    /// Keep `R_nu = R_{nu-1} ∘ f_nu` as one map, reduced where possible.
    #[default]
    RunningComposite,
    /// Evaluate `f_0(f_1(...f_nu(z)))` from scratch at every step.
    Reapply,
}

/// `R_nu(probes)` for `nu = 0..n`.
pub fn right_orbit(seq: &MapSequence, probes: &[Complex64], n: usize) -> Result<OrbitTrace> {
    right_orbit_with(seq, probes, n, RightStrategy::default())
}

pub fn right_orbit_with(
    seq: &MapSequence,
    probes: &[Complex64],
    n: usize,
    strategy: RightStrategy,
) -> Result<OrbitTrace> {
    right_engine(seq, probes, n, strategy, |_| Ok(None))
}

/// Shared right engine. `pre(nu)` may supply a map applied to the probes
/// before `R_nu`.
fn right_engine(
    seq: &MapSequence,
    probes: &[Complex64],
    n: usize,
    strategy: RightStrategy,
    pre: impl Fn(usize) -> Result<Option<HolMap>>,
) -> Result<OrbitTrace> {
    let surface = seq.surface();
    let mut trace = OrbitTrace::start(Side::Right, &surface, probes, n)?;
    let mut running = HolMap::identity();
    let mut maps = Vec::new();
    for nu in 0..n {
        let f = fetch(seq, nu)?;
        let points = match pre(nu)? {
            Some(g) => apply_all(&g, probes, nu)?,
            None => probes.to_vec(),
        };
        let images = match strategy {
            RightStrategy::RunningComposite => {
                running = running.compose(&f);
                apply_all(&running, &points, nu)?
            }
            RightStrategy::Reapply => {
                maps.push(f);
                let mut current = points;
                for g in maps.iter().rev() {
                    current = apply_all(g, &current, nu)?;
                }
                current
            }
        };
        trace.push(&surface, images)?;
    }
    Ok(trace)
}

/// `F^{-(nu+1)} ∘ L_nu` on the probes.
pub fn renormalized_left(
    seq: &MapSequence,
    f: &HolMap,
    probes: &[Complex64],
    n: usize,
) -> Result<OrbitTrace> {
    let surface = seq.surface();
    let mut trace = OrbitTrace::start(Side::Left, &surface, probes, n)?;
    f.inverse()?;
    let mut current = probes.to_vec();
    for nu in 0..n {
        let g = fetch(seq, nu)?;
        current = apply_all(&g, &current, nu)?;
        let back = f.power(-(nu as i64 + 1))?;
        trace.push(&surface, apply_all(&back, &current, nu)?)?;
    }
    Ok(trace)
}

/// `R_nu ∘ F^{-(nu+1)}` on the probes.
pub fn renormalized_right(
    seq: &MapSequence,
    f: &HolMap,
    probes: &[Complex64],
    n: usize,
) -> Result<OrbitTrace> {
    f.inverse()?;
    right_engine(seq, probes, n, RightStrategy::RunningComposite, |nu| {
        f.power(-(nu as i64 + 1)).map(Some)
    })
}

/// `(nu, distance from the probe-0 image to probe 0)` for every step.
pub fn divergence_profile(trace: &OrbitTrace) -> Vec<(usize, f64)> {
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(nu, r)| (nu, r.base_dist))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn half_scaled(delta: f64) -> MapSequence {
        MapSequence::new(SurfaceModel::Disk, move |nu| {
            let sign = if nu % 2 == 0 { 1.0 } else { -1.0 };
            HolMap::affine(c(0.5, 0.0), c(sign * delta, 0.0)).unwrap()
        })
    }

    #[test]
    fn identity_family_keeps_probes() {
        let seq = MapSequence::constant(SurfaceModel::Disk, HolMap::identity());
        let probes = [c(0.0, 0.0), c(0.3, -0.2)];
        for trace in [
            left_orbit(&seq, &probes, 10).unwrap(),
            right_orbit(&seq, &probes, 10).unwrap(),
        ] {
            for r in &trace.steps {
                assert_eq!(r.images, probes.to_vec());
                assert_eq!(r.base_dist, 0.0);
            }
        }
    }

    #[test]
    fn alternating_half_scaled_closed_form() {
        let delta = 0.1;
        let z = c(0.4, 0.3);
        let trace = left_orbit(&half_scaled(delta), &[c(0.0, 0.0), z], 64).unwrap();
        for (nu, r) in trace.steps.iter().enumerate() {
            let sign = if nu % 2 == 0 { 1.0 } else { -1.0 };
            let series: f64 = (0..=nu).map(|j| (-0.5f64).powi(j as i32)).sum();
            assert!((r.images[0] - c(delta * sign * series, 0.0)).norm() < 1e-12);
            let general = z / 2f64.powi(nu as i32 + 1)
                + (0..=nu)
                    .map(|j| {
                        let s = if (nu - j) % 2 == 0 { 1.0 } else { -1.0 };
                        c(delta * s / 2f64.powi(j as i32), 0.0)
                    })
                    .sum::<Complex64>();
            assert!((r.images[1] - general).norm() < 1e-12);
        }
    }

    #[test]
    fn right_constant_after_exp_affine() {
        let seq = MapSequence::new(SurfaceModel::HalfPlane, |nu| {
            if nu == 0 {
                HolMap::exp_affine(c(0.0, 1.0))
            } else {
                HolMap::translation(c(1.0, 0.0))
            }
        });
        let trace = right_orbit(&seq, &[c(0.0, 1.0), c(0.0, 2.0)], 65).unwrap();
        let first = &trace.steps[0].images;
        assert!((first[0] - c((-2.0 * PI).exp(), 1.0)).norm() < 1e-15);
        for r in &trace.steps {
            assert!((r.images[0] - first[0]).norm() < 1e-12);
            assert!((r.images[1] - first[1]).norm() < 1e-12);
        }
    }

    #[test]
    fn right_strategies_agree_on_mobius() {
        let seq = MapSequence::new(SurfaceModel::Disk, |nu| {
            let a = c(0.3 * (nu as f64).sin(), 0.2 * (nu as f64).cos());
            HolMap::blaschke(Complex64::from_polar(1.0, nu as f64), vec![a])
                .unwrap()
                .as_mobius()
                .unwrap()
                .into()
        });
        let probes = [c(0.1, 0.2), c(-0.5, 0.1)];
        let a = right_orbit_with(&seq, &probes, 40, RightStrategy::RunningComposite).unwrap();
        let b = right_orbit_with(&seq, &probes, 40, RightStrategy::Reapply).unwrap();
        for (x, y) in a.steps.iter().zip(&b.steps) {
            for (p, q) in x.images.iter().zip(&y.images) {
                assert!((p - q).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn constant_family_left_equals_right() {
        let f = HolMap::mobius(c(2.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let seq = MapSequence::constant(SurfaceModel::HalfPlane, f.clone());
        let probes = [c(0.0, 1.0), c(1.0, 3.0)];
        let l = left_orbit(&seq, &probes, 20).unwrap();
        let r = right_orbit(&seq, &probes, 20).unwrap();
        for (nu, (x, y)) in l.steps.iter().zip(&r.steps).enumerate() {
            let fp = f.power(nu as i64 + 1).unwrap();
            for (k, &z) in probes.iter().enumerate() {
                let want = fp.eval(z).unwrap();
                assert!((x.images[k] - want).norm() < 1e-10 * want.norm().max(1.0));
                assert!((y.images[k] - want).norm() < 1e-10 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn renormalized_constant_family_is_identity() {
        let f = HolMap::rotation(1.0);
        let seq = MapSequence::constant(SurfaceModel::Disk, f.clone());
        let probes = [c(0.0, 0.0), c(0.5, 0.0)];
        for trace in [
            renormalized_left(&seq, &f, &probes, 50).unwrap(),
            renormalized_right(&seq, &f, &probes, 50).unwrap(),
        ] {
            for r in &trace.steps {
                for (p, q) in r.images.iter().zip(&probes) {
                    assert!((p - q).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn self_map_guard_names_index() {
        let seq = MapSequence::new(SurfaceModel::Disk, |nu| {
            if nu == 3 {
                HolMap::translation(c(0.5, 0.0))
            } else {
                HolMap::identity()
            }
        });
        match left_orbit(&seq, &[c(0.0, 0.0)], 10) {
            Err(Error::NotSelfMap { index, .. }) => assert_eq!(index, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eventually_identity_right_orbit_is_frozen() {
        let seq = MapSequence::new(SurfaceModel::Disk, |nu| {
            if nu < 5 {
                HolMap::blaschke(c(1.0, 0.0), vec![c(0.1 * nu as f64, 0.2), c(-0.3, 0.0)]).unwrap()
            } else {
                HolMap::identity()
            }
        });
        let trace = right_orbit(&seq, &[c(0.2, 0.1)], 30).unwrap();
        for r in &trace.steps[5..] {
            assert_eq!(r.images, trace.steps[4].images);
        }
    }

    #[test]
    fn profile_of_translation_grows() {
        let seq = MapSequence::constant(SurfaceModel::HalfPlane, HolMap::translation(c(-1.0, 0.0)));
        let trace = left_orbit(&seq, &[c(0.0, 1.0)], 100).unwrap();
        let profile = divergence_profile(&trace);
        for (nu, d) in profile {
            let want = ((nu as f64 + 1.0) / 2.0).asinh();
            assert!((d - want).abs() < 1e-12);
        }
    }
}
