use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OrbitTrace;
use crate::holmaps::ExtPoint;
use crate::hypgeo::SurfaceModel;

/// Detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_diam: f64,
    pub tol_step: f64,
    pub tol_gap: f64,
    /// Escape ladder height: base distance must cross `1, 2, ..., ladder`.
    pub ladder: u32,
    pub min_window: usize,
    /// Treat the surface as sitting inside the Riemann sphere, so orbits
    /// may be reported as converging to a boundary point.
    pub embedded: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_diam: 1e-6,
            tol_step: 1e-8,
            tol_gap: 1e-2,
            ladder: 8,
            min_window: 32,
            embedded: false,
        }
    }
}

impl Tolerances {
    pub fn embedded(self) -> Self {
        Tolerances {
            embedded: true,
            ..self
        }
    }

    pub fn window(&self, len: usize) -> usize {
        (len / 4).max(self.min_window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    InteriorConstant { point: Complex64, residual: f64 },
    BoundaryPoint { point: ExtPoint, residual: f64 },
    /// `growth_rate` is the slope of base distance against `ln(nu + 1)`
    /// over the window.
    CompactlyDivergent { growth_rate: f64 },
    Oscillating { clusters: [Complex64; 2], gap: f64 },
    Undecided { reason: String },
}

impl Verdict {
    pub fn is_interior_constant(&self) -> bool {
        matches!(self, Verdict::InteriorConstant { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::InteriorConstant { .. } => "interior-constant",
            Verdict::BoundaryPoint { .. } => "boundary-point",
            Verdict::CompactlyDivergent { .. } => "compactly-divergent",
            Verdict::Oscillating { .. } => "oscillating",
            Verdict::Undecided { .. } => "undecided",
        }
    }
}

/// Classifies the tail behaviour of an orbit trace.
///
/// Checks run in order: interior constant, oscillation, boundary point (only
/// when `tol.embedded`), compact divergence. The first that holds wins.
pub fn detect(trace: &OrbitTrace, surface: &SurfaceModel, tol: &Tolerances) -> Verdict {
    let len = trace.steps.len();
    let window = tol.window(len);
    if len < window {
        return Verdict::Undecided {
            reason: format!("trace has {len} records, window needs {window}"),
        };
    }
    let tail = &trace.steps[len - window..];
    let mut reasons = Vec::new();

    let max_diam = tail.iter().map(|r| r.diam).fold(0.0, f64::max);
    let max_step = tail.iter().map(|r| r.step_disp).fold(0.0, f64::max);
    let bounded = tail.iter().all(|r| r.base_dist.is_finite());
    if max_diam < tol.tol_diam && max_step < tol.tol_step && bounded {
        return Verdict::InteriorConstant {
            point: tail[window - 1].images[0],
            residual: max_diam.max(max_step),
        };
    }
    reasons.push(format!(
        "not constant: diameter {max_diam:e}, step {max_step:e}"
    ));

    let path: Vec<Complex64> = tail.iter().map(|r| r.images[0]).collect();
    match two_clusters(&path, tol.tol_gap) {
        Ok((clusters, gap)) => return Verdict::Oscillating { clusters, gap },
        Err(why) => reasons.push(why),
    }

    if tol.embedded {
        match boundary_limit(trace, surface, window, tol.tol_gap) {
            Ok((point, residual)) => return Verdict::BoundaryPoint { point, residual },
            Err(why) => reasons.push(why),
        }
    }

    match ladder(trace, tol.ladder) {
        Ok(()) => {
            let first = len - window;
            let (d0, d1) = (tail[0].base_dist, tail[window - 1].base_dist);
            let span = ((len as f64) / (first as f64 + 1.0)).ln();
            let growth_rate = if span > 0.0 { (d1 - d0) / span } else { 0.0 };
            return Verdict::CompactlyDivergent { growth_rate };
        }
        Err(why) => reasons.push(why),
    }

    Verdict::Undecided {
        reason: reasons.join("; "),
    }
}

/// Two-means split of the window path. Succeeds when both clusters are
/// tight, far apart, and each is visited repeatedly to the end.
fn two_clusters(path: &[Complex64], tol_gap: f64) -> Result<([Complex64; 2], f64), String> {
    let far = |from: Complex64| {
        path.iter()
            .copied()
            .max_by(|a, b| (a - from).norm().total_cmp(&(b - from).norm()))
            .expect("nonempty window")
    };
    let mut a = far(path[0]);
    let mut b = far(a);
    let mut label = vec![false; path.len()];
    for _ in 0..50 {
        for (l, z) in label.iter_mut().zip(path) {
            *l = (z - b).norm() < (z - a).norm();
        }
        let mean = |side: bool| {
            let pts: Vec<_> = path.iter().zip(&label).filter(|(_, &l)| l == side).collect();
            if pts.is_empty() {
                None
            } else {
                Some(pts.iter().map(|(z, _)| **z).sum::<Complex64>() / pts.len() as f64)
            }
        };
        match (mean(false), mean(true)) {
            (Some(na), Some(nb)) if na == a && nb == b => break,
            (Some(na), Some(nb)) => (a, b) = (na, nb),
            _ => return Err("no oscillation: orbit occupies a single cluster".into()),
        }
    }
    let gap = (a - b).norm();
    if gap.is_nan() || gap <= tol_gap {
        return Err(format!("no oscillation: cluster gap {gap:e} below {tol_gap:e}"));
    }
    let spread = path
        .iter()
        .zip(&label)
        .map(|(z, &l)| (z - if l { b } else { a }).norm())
        .fold(0.0, f64::max);
    if spread >= gap / 4.0 {
        return Err(format!("no oscillation: cluster spread {spread:e} vs gap {gap:e}"));
    }
    let switches = label.windows(2).filter(|w| w[0] != w[1]).count();
    let half = &label[label.len() / 2..];
    if switches < 4 || !half.contains(&true) || !half.contains(&false) {
        return Err(format!("no oscillation: only {switches} cluster switches"));
    }
    Ok(([a, b], gap))
}

/// The boundary coordinate nearest to `z`.
fn nearest_boundary(surface: &SurfaceModel, z: Complex64) -> ExtPoint {
    match *surface {
        SurfaceModel::Disk => ExtPoint::Finite(z / z.norm()),
        SurfaceModel::HalfPlane => {
            if z.im * z.norm() > 1.0 {
                ExtPoint::Infinity
            } else {
                ExtPoint::Finite(Complex64::new(z.re, 0.0))
            }
        }
        SurfaceModel::PuncturedDisk => {
            if z.norm() < 1.0 - z.norm() {
                ExtPoint::Finite(Complex64::new(0.0, 0.0))
            } else {
                ExtPoint::Finite(z / z.norm())
            }
        }
        SurfaceModel::Annulus { inner_radius } => {
            if z.norm() - inner_radius < 1.0 - z.norm() {
                ExtPoint::Finite(z * (inner_radius / z.norm()))
            } else {
                ExtPoint::Finite(z / z.norm())
            }
        }
    }
}

/// Probe 0 must approach a single boundary coordinate in the Euclidean
/// sense, and every other probe must follow it there.
fn boundary_limit(
    trace: &OrbitTrace,
    surface: &SurfaceModel,
    window: usize,
    tol: f64,
) -> Result<(ExtPoint, f64), String> {
    let tail = &trace.steps[trace.steps.len() - window..];
    let last = &tail[window - 1];
    let z = last.images[0];
    if tail[0].base_dist >= last.base_dist {
        return Err("no boundary limit: base distance not growing".into());
    }
    let gap = surface.boundary_gap(z);
    if gap >= tol {
        return Err(format!("no boundary limit: boundary gap {gap:e}"));
    }
    let target = nearest_boundary(surface, z);
    let quarter = &tail[3 * window / 4..];
    match target {
        ExtPoint::Infinity => {
            let spread = quarter
                .iter()
                .map(|r| angle_between(r.images[0], z))
                .fold(0.0, f64::max);
            if spread >= tol {
                return Err(format!("no boundary limit: argument spread {spread:e}"));
            }
            let lagging = last.images.iter().map(|w| 1.0 / w.norm()).fold(0.0, f64::max);
            if lagging >= tol {
                return Err(format!("no boundary limit: companion probe at 1/|w| = {lagging:e}"));
            }
            Ok((ExtPoint::Infinity, lagging))
        }
        ExtPoint::Finite(tau) => {
            let drift = quarter
                .iter()
                .map(|r| match nearest_boundary(surface, r.images[0]) {
                    ExtPoint::Finite(t) => (t - tau).norm(),
                    ExtPoint::Infinity => f64::INFINITY,
                })
                .fold(0.0, f64::max);
            if drift >= tol {
                return Err(format!("no boundary limit: boundary coordinate drift {drift:e}"));
            }
            let lagging = last.images.iter().map(|w| (w - tau).norm()).fold(0.0, f64::max);
            if lagging >= tol {
                return Err(format!("no boundary limit: companion probe {lagging:e} from {tau}"));
            }
            Ok((ExtPoint::Finite(tau), lagging))
        }
    }
}

fn angle_between(a: Complex64, b: Complex64) -> f64 {
    (a * b.conj()).arg().abs()
}

/// Escape ladder: for each threshold `k` in `1..=height`, base distance
/// exceeds `k` at some step after which it never falls below `k - 0.5`.
fn ladder(trace: &OrbitTrace, height: u32) -> Result<(), String> {
    let dist: Vec<f64> = trace.steps.iter().map(|r| r.base_dist).collect();
    for k in 1..=height {
        let level = f64::from(k);
        let settled = dist
            .iter()
            .rposition(|&d| d < level - 0.5)
            .map_or(0, |i| i + 1);
        if !dist[settled..].iter().any(|&d| d > level) {
            let max = dist.iter().copied().fold(0.0, f64::max);
            return Err(format!(
                "not divergent: base distance does not settle above {level} (max {max:.3}, last dip below {} at step {})",
                level - 0.5,
                settled.saturating_sub(1)
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holmaps::HolMap;
    use crate::ifs::{left_orbit, MapSequence};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn alternating_half_scaled_oscillates() {
        let seq = MapSequence::new(SurfaceModel::Disk, |nu| {
            let s = if nu % 2 == 0 { 0.1 } else { -0.1 };
            HolMap::affine(c(0.5, 0.0), c(s, 0.0)).unwrap()
        });
        let trace = left_orbit(&seq, &[c(0.0, 0.0), c(0.5, 0.5)], 64).unwrap();
        match detect(&trace, &SurfaceModel::Disk, &Tolerances::default()) {
            Verdict::Oscillating { clusters, gap } => {
                assert!((gap - 0.4 / 3.0).abs() < 1e-3);
                let mut re = [clusters[0].re, clusters[1].re];
                re.sort_by(f64::total_cmp);
                assert!((re[0] + 0.2 / 3.0).abs() < 1e-3 && (re[1] - 0.2 / 3.0).abs() < 1e-3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn halving_is_interior_constant() {
        let seq = MapSequence::constant(SurfaceModel::Disk, HolMap::affine(c(0.5, 0.0), c(0.0, 0.0)).unwrap());
        let trace = left_orbit(&seq, &[c(0.0, 0.0), c(0.5, 0.0), c(0.0, -0.7)], 128).unwrap();
        match detect(&trace, &SurfaceModel::Disk, &Tolerances::default()) {
            Verdict::InteriorConstant { point, residual } => {
                assert!(point.norm() < 1e-12);
                assert!(residual < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn translation_diverges_and_reaches_infinity_when_embedded() {
        let h = SurfaceModel::HalfPlane;
        let seq = MapSequence::constant(h, HolMap::translation(c(-1.0, 0.0)));
        let trace = left_orbit(&seq, &[c(0.0, 1.0), c(1.0, 2.0)], 4096).unwrap();
        match detect(&trace, &h, &Tolerances::default()) {
            Verdict::CompactlyDivergent { growth_rate } => assert!(growth_rate > 0.5),
            other => panic!("{other:?}"),
        }
        match detect(&trace, &h, &Tolerances::default().embedded()) {
            Verdict::BoundaryPoint { point, .. } => assert_eq!(point, ExtPoint::Infinity),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_translation_orbit_is_undecided() {
        let h = SurfaceModel::HalfPlane;
        let seq = MapSequence::constant(h, HolMap::translation(c(-1.0, 0.0)));
        let trace = left_orbit(&seq, &[c(0.0, 1.0)], 64).unwrap();
        match detect(&trace, &h, &Tolerances::default()) {
            Verdict::Undecided { reason } => assert!(reason.contains("does not settle above")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn disk_boundary_limit() {
        // Hyperbolic automorphism of the disk with attracting boundary point 1.
        let d = SurfaceModel::Disk;
        let m = HolMap::mobius(c(3.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        let seq = MapSequence::constant(d, m);
        let trace = left_orbit(&seq, &[c(0.0, 0.0), c(0.0, 0.5)], 40).unwrap();
        let tol = Tolerances {
            ladder: 4,
            ..Tolerances::default()
        }
        .embedded();
        match detect(&trace, &d, &tol) {
            Verdict::BoundaryPoint { point: ExtPoint::Finite(t), .. } => {
                assert!((t - c(1.0, 0.0)).norm() < 1e-9)
            }
            other => panic!("{other:?}"),
        }
    }
}
