use num_complex::Complex64;

use super::{ScenarioParams, ScenarioReport, HYPOTHESIS};
use crate::error::{Error, Result};
use crate::holmaps::{classify, sup_deviation, HolMap, MapClass, Region};
use crate::hypgeo::{HyperbolicBall, SurfaceModel};
use crate::ifs::{detect, left_orbit, right_orbit, MapSequence, Tolerances, Verdict};

/// Sampling level of the closed ball used for deviations and membership.
const BALL_LEVEL: u32 = 3;
/// Offset of the companion point in the local-stretch pairs.
const NEAR: f64 = 1e-6;

/// The neighborhood `U = { h : h(closed B(z0, r)) ⊂ B(z0, t) }` of an
/// attracting map, with `k` its measured contraction on the closed ball.
#[derive(Debug, Clone)]
pub struct AttractingNeighborhood {
    pub ball: HyperbolicBall,
    pub k: f64,
    pub t: f64,
}

impl AttractingNeighborhood {
    /// True when `h` sends every sample of the closed ball into `B(z0, t)`.
    pub fn contains(&self, h: &HolMap) -> Result<bool> {
        let s = &self.ball.surface;
        for z in self.ball.samples(BALL_LEVEL) {
            let w = h.eval(z)?;
            if !s.contains(w) || s.dist(self.ball.center, w)? >= self.t {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Measures the contraction of `f` on the closed ball `B(z0, r)` and sets
/// `t = (k r + r) / 2`.
pub fn attracting_neighborhood(
    f: &HolMap,
    surface: &SurfaceModel,
    z0: Complex64,
    r: f64,
) -> Result<AttractingNeighborhood> {
    match classify(f, surface) {
        MapClass::AttractingInterior { point, .. } if surface.dist(point, z0)? < 1e-9 => {}
        other => {
            return Err(Error::Usage(format!(
                "map is not attracting at {z0}: {other:?}"
            )))
        }
    }
    let ball = HyperbolicBall::new(*surface, z0, r)?;
    let samples = ball.samples(BALL_LEVEL - 1);
    let mut k: f64 = 0.0;
    let mut ratio = |a: Complex64, b: Complex64| -> Result<()> {
        let d = surface.dist(a, b)?;
        if d > 0.0 {
            k = k.max(surface.dist(f.eval(a)?, f.eval(b)?)? / d);
        }
        Ok(())
    };
    for (i, &a) in samples.iter().enumerate() {
        for &b in &samples[i + 1..] {
            ratio(a, b)?;
        }
        for dir in 0..4 {
            let angle = std::f64::consts::FRAC_PI_2 * dir as f64;
            let b = surface.geodesic_polar(a, NEAR, angle);
            if surface.dist(z0, b)? <= r {
                ratio(a, b)?;
            }
        }
    }
    if k >= 1.0 {
        return Err(Error::Scenario(format!(
            "measured contraction {k} on the closed ball is not below 1"
        )));
    }
    Ok(AttractingNeighborhood {
        ball,
        k,
        t: (k * r + r) / 2.0,
    })
}

/// Checks `dist(L_nu(z), F^{nu+1}(z)) <= sum_j k^j sup_{w in D} dist(f_{nu-j}(w), F(w))`
/// at every step, and that the left system converges to the fixed point.
///
/// Hypotheses checked first: every `f_nu` lies in the neighborhood and the
/// deviations from `F` tend to zero.
pub fn attracting_left_ifs(
    f: &HolMap,
    seq: &MapSequence,
    nbhd: &AttractingNeighborhood,
    probes: &[Complex64],
    n: usize,
    tol: &Tolerances,
) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new("attracting-left");
    let s = seq.surface();
    report.param("steps", n);
    report.param("radius", nbhd.ball.radius);
    report.measure("k", nbhd.k);
    report.measure("t", nbhd.t);

    let mut deviation = Vec::with_capacity(n);
    let mut outside = Vec::new();
    for nu in 0..n {
        let g = seq.get(nu)?;
        if !nbhd.contains(&g)? {
            outside.push(nu);
        }
        deviation.push(sup_deviation(&g, f, &s, Region::Ball(&nbhd.ball, BALL_LEVEL))?);
    }
    let late = deviation[3 * n / 4..].iter().copied().fold(0.0, f64::max);
    report.measure("maps_outside_neighborhood", &outside);
    report.measure("late_deviation", late);
    report.check(&format!("{HYPOTHESIS}: every map in the neighborhood"), outside.is_empty());
    report.check_le(&format!("{HYPOTHESIS}: deviations tend to 0"), late, tol.tol_diam);
    if !report.pass {
        return Ok(report);
    }

    let trace = left_orbit(seq, probes, n)?;
    let mut bound = 0.0;
    let mut worst = (f64::INFINITY, 0);
    for (nu, rec) in trace.steps.iter().enumerate() {
        bound = deviation[nu] + nbhd.k * bound;
        let power = f.power(nu as i64 + 1)?;
        for (&z, &img) in probes.iter().zip(&rec.images) {
            let margin = bound - s.dist(img, power.eval(z)?)?;
            if margin < worst.0 {
                worst = (margin, nu);
            }
        }
    }
    report.measure("worst_margin_step", worst.1);
    report.check_le("deviation sum bounds the tracking error", -worst.0, 1e-9);

    let verdict = detect(&trace, &s, tol);
    report.measure("verdict", &verdict);
    report.check("left system is interior constant", verdict.is_interior_constant());
    if let Verdict::InteriorConstant { point, .. } = verdict {
        report.check_le("limit is the fixed point", s.dist(point, nbhd.ball.center)?, 1e-4);
    }
    Ok(report)
}

fn affine(c: Complex64) -> HolMap {
    HolMap::affine(Complex64::new(0.5, 0.0), c).expect("nonzero scale")
}

const STEPS: usize = 128;

fn probes() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, -0.3),
        Complex64::from_polar(0.6, 2.0),
    ]
}

fn halving() -> HolMap {
    affine(Complex64::new(0.0, 0.0))
}

fn summable_family() -> MapSequence {
    MapSequence::new(SurfaceModel::Disk, |nu| {
        affine(Complex64::new(0.5f64.powi(nu as i32 + 2), 0.0))
    })
    .with_limit(halving())
}

pub(super) fn left_scenario(params: &ScenarioParams) -> Result<ScenarioReport> {
    let tol = &params.tolerances;
    let d = SurfaceModel::Disk;
    let f = halving();
    let nbhd = attracting_neighborhood(&f, &d, Complex64::new(0.0, 0.0), 1.0)?;
    let mut report = ScenarioReport::new("attracting-left");
    report.check_le("contraction on the ball below 1", nbhd.k, 1.0 - 1e-9);
    report.check("F lies in its neighborhood", nbhd.contains(&f)?);
    report.check("identity is outside the neighborhood", !nbhd.contains(&HolMap::identity())?);

    report.absorb(
        "summable",
        attracting_left_ifs(&f, &summable_family(), &nbhd, &probes(), STEPS, tol)?,
    );
    report.absorb(
        "constant",
        attracting_left_ifs(&f, &MapSequence::constant(d, f.clone()), &nbhd, &probes(), STEPS, tol)?,
    );

    let control = MapSequence::new(d, |nu| {
        let sign = if nu % 2 == 0 { 1.0 } else { -1.0 };
        affine(Complex64::new(0.1 * sign, 0.0))
    });
    let control = attracting_left_ifs(&f, &control, &nbhd, &probes(), STEPS, tol)?;
    let flagged = control.hypothesis_failed_only();
    report.measure("control_failures", control.failures());
    report.check("alternating control fails only its hypothesis", flagged);
    Ok(report)
}

/// Right system for the same attracting data: converges to a constant that
/// depends on `f_0`. The two limits are recorded, not compared with targets.
pub(super) fn right_scenario(params: &ScenarioParams) -> Result<ScenarioReport> {
    let tol = &params.tolerances;
    let d = SurfaceModel::Disk;
    let f = halving();
    let nbhd = attracting_neighborhood(&f, &d, Complex64::new(0.0, 0.0), 1.0)?;
    let mut report = ScenarioReport::new("attracting-right");
    let firsts = [
        ("f0_summable", affine(Complex64::new(0.25, 0.0))),
        ("f0_shifted", affine(Complex64::new(-0.2, 0.0))),
    ];
    let mut limits = Vec::new();
    for (name, first) in firsts {
        report.check(&format!("{name} lies in the neighborhood"), nbhd.contains(&first)?);
        let seq = MapSequence::new(d, move |nu| {
            if nu == 0 {
                first.clone()
            } else {
                affine(Complex64::new(0.5f64.powi(nu as i32 + 2), 0.0))
            }
        });
        let trace = right_orbit(&seq, &probes(), STEPS)?;
        let verdict = detect(&trace, &d, tol);
        report.measure(&format!("{name}.verdict"), &verdict);
        report.check(&format!("{name}: right system is interior constant"), verdict.is_interior_constant());
        if let Verdict::InteriorConstant { point, .. } = verdict {
            limits.push(point);
        }
    }
    if let [a, b] = limits[..] {
        report.measure("limit_gap", d.dist(a, b)?);
    }
    Ok(report)
}
