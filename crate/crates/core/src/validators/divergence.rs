use num_complex::Complex64;

use super::{ScenarioParams, ScenarioReport};
use crate::error::{Error, Result};
use crate::holmaps::{classify, sup_deviation, ExtPoint, HolMap, MapClass, Region};
use crate::hypgeo::{HyperbolicBall, SurfaceModel};
use crate::ifs::{detect, divergence_profile, left_orbit, MapSequence, Tolerances, Verdict};

const BALL_LEVEL: u32 = 2;
/// Bisection steps on the base-2 exponent of a shift.
const BISECTION: usize = 60;
/// How far below the cap the shift search looks before settling for zero.
const SEARCH_OCTAVES: i32 = 64;

/// The admissibility test for step `nu`: a map is admissible when its sampled
/// deviation from `F` on `region` is below `2^{-(nu+1)}`.
#[derive(Debug, Clone)]
pub struct DivergenceBudget {
    pub index: usize,
    /// `closed B(z0, 1 + dist(F^nu(z0), z0))`.
    pub region: HyperbolicBall,
    /// Base-2 logarithm of the cap; the cap itself underflows for large `nu`.
    pub cap_log2: i32,
}

impl DivergenceBudget {
    pub fn cap(&self) -> f64 {
        2f64.powi(self.cap_log2)
    }

    pub fn deviation(&self, g: &HolMap, f: &HolMap) -> Result<f64> {
        sup_deviation(g, f, &self.region.surface, Region::Ball(&self.region, BALL_LEVEL))
    }

    /// `deviation < cap`, compared on the log scale so that a vanishing cap
    /// still admits a map with zero deviation.
    pub fn admits(&self, deviation: f64) -> bool {
        deviation.log2() < f64::from(self.cap_log2)
    }
}

pub fn divergence_budget(
    f: &HolMap,
    surface: &SurfaceModel,
    z0: Complex64,
    nu: usize,
) -> Result<DivergenceBudget> {
    if classify(f, surface) != MapClass::CompactlyDivergent {
        return Err(Error::Usage("budgets need a compactly divergent map".into()));
    }
    let reach = surface.dist(f.power(nu as i64)?.eval(z0)?, z0)?;
    Ok(DivergenceBudget {
        index: nu,
        region: HyperbolicBall::new(*surface, z0, 1.0 + reach)?,
        cap_log2: -(nu as i32 + 1),
    })
}

/// Largest real `eps` for which `w -> F(w) + eps` is admissible, found by
/// bisection on `log2 eps`. Zero when even `2^{cap_log2 - 64}` is too large.
pub fn max_admissible_shift(f: &HolMap, budget: &DivergenceBudget) -> Result<f64> {
    let admits = |x: f64| -> Result<bool> {
        let g = HolMap::translation(Complex64::new(2f64.powf(x), 0.0)).compose(f);
        Ok(budget.admits(budget.deviation(&g, f)?))
    };
    let mut lo = f64::from(budget.cap_log2 - SEARCH_OCTAVES);
    if lo < -1000.0 || !admits(lo)? {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    if admits(hi)? {
        return Ok(2f64.powf(hi));
    }
    for _ in 0..BISECTION {
        let mid = 0.5 * (lo + hi);
        if admits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(2f64.powf(lo))
}

/// Runs the left system of `seq` from `z0`, checking first that every map is
/// within its budget, then that `dist(L_nu(z0), F^{nu+1}(z0)) < 1 - 2^{-(nu+1)}`
/// at every step and that the orbit escapes.
pub fn divergence_left_ifs(
    f: &HolMap,
    seq: &MapSequence,
    z0: Complex64,
    companions: &[Complex64],
    n: usize,
    tol: &Tolerances,
) -> Result<ScenarioReport> {
    let s = seq.surface();
    let mut report = ScenarioReport::new("divergence");
    report.param("steps", n);
    report.param("base", z0);
    let mut largest_ratio: f64 = 0.0;
    for nu in 0..n {
        let g = seq.get(nu)?;
        let budget = divergence_budget(f, &s, z0, nu)?;
        let deviation = budget.deviation(&g, f)?;
        if !budget.admits(deviation) {
            return Err(Error::Inadmissible {
                index: nu,
                deviation,
                cap: budget.cap(),
            });
        }
        if deviation > 0.0 {
            largest_ratio = largest_ratio.max((deviation.log2() - f64::from(budget.cap_log2)).exp2());
        }
    }
    report.measure("largest_deviation_to_cap", largest_ratio);

    let mut probes = vec![z0];
    probes.extend_from_slice(companions);
    let trace = left_orbit(seq, &probes, n)?;
    let mut worst = (f64::INFINITY, 0);
    let mut worst_lower = (f64::INFINITY, 0);
    for (nu, rec) in trace.steps.iter().enumerate() {
        let target = f.power(nu as i64 + 1)?.eval(z0)?;
        let tracking = s.dist(rec.images[0], target)?;
        let margin = 1.0 - 0.5f64.powi(nu as i32 + 1) - tracking;
        if margin < worst.0 {
            worst = (margin, nu);
        }
        let lower = s.dist(target, z0)? - 1.0;
        if rec.base_dist - lower < worst_lower.0 {
            worst_lower = (rec.base_dist - lower, nu);
        }
    }
    report.measure("tracking_worst_step", worst.1);
    report.check_le("tracking stays below 1 - 2^-(nu+1)", -worst.0, 0.0);
    report.measure("lower_bound_worst_step", worst_lower.1);
    report.check_le("base distance above dist(F^(nu+1) z0, z0) - 1", -worst_lower.0, 1e-9);
    let profile = divergence_profile(&trace);
    report.measure("final_base_distance", profile[profile.len() - 1].1);

    let verdict = detect(&trace, &s, &Tolerances { embedded: false, ..*tol });
    report.measure("verdict", &verdict);
    report.check(
        "left system is compactly divergent",
        matches!(verdict, Verdict::CompactlyDivergent { .. }),
    );
    if tol.embedded {
        let limit = f.as_mobius().and_then(|m| m.fixed_points().ok()).map(|fp| fp.points());
        report.measure("limit_of_iterates", &limit);
        let boundary = detect(&trace, &s, tol);
        report.measure("embedded_verdict", &boundary);
        let matches = match (&boundary, limit.as_deref()) {
            (Verdict::BoundaryPoint { point, .. }, Some([only])) => point_eq(*point, *only),
            _ => false,
        };
        report.check("embedded verdict is the boundary limit of the iterates", matches);
    }
    Ok(report)
}

fn point_eq(a: ExtPoint, b: ExtPoint) -> bool {
    match (a, b) {
        (ExtPoint::Infinity, ExtPoint::Infinity) => true,
        (ExtPoint::Finite(x), ExtPoint::Finite(y)) => (x - y).norm() < 1e-6,
        _ => false,
    }
}

const STEPS: usize = 4096;

fn shift() -> HolMap {
    HolMap::translation(Complex64::new(-1.0, 0.0))
}

fn perturbed(eps: &[f64]) -> MapSequence {
    let eps = eps.to_vec();
    MapSequence::new(SurfaceModel::HalfPlane, move |nu| {
        HolMap::translation(Complex64::new(-1.0 + eps.get(nu).copied().unwrap_or(0.0), 0.0))
    })
    .with_limit(shift())
}

pub(super) fn scenario(params: &ScenarioParams) -> Result<ScenarioReport> {
    let h = SurfaceModel::HalfPlane;
    let f = shift();
    let z0 = Complex64::new(0.0, 1.0);
    let companions = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.5)];
    let tol = params.tolerances.embedded();
    let mut report = ScenarioReport::new("divergence");

    let mut maximal = Vec::new();
    for nu in 0..STEPS {
        let budget = divergence_budget(&f, &h, z0, nu)?;
        let m = max_admissible_shift(&f, &budget)?;
        if m == 0.0 {
            break;
        }
        maximal.push(m);
    }
    report.measure("maximal_shift_first", &maximal[..maximal.len().min(8)]);
    report.measure("shift_search_depth", maximal.len());
    let caps: Vec<f64> = (0..8).map(|nu| 0.5f64.powi(nu + 1)).collect();
    report.measure("caps_first", &caps);

    let half: Vec<f64> = maximal.iter().map(|m| m / 2.0).collect();
    report.absorb(
        "half-cap",
        divergence_left_ifs(&f, &perturbed(&half), z0, &companions, STEPS, &tol)?,
    );
    let unperturbed = divergence_left_ifs(&f, &MapSequence::constant(h, f.clone()), z0, &companions, STEPS, &tol)?;
    report.absorb("unperturbed", unperturbed);

    let mut violating = half.clone();
    violating[3] = 4.0 * maximal[3];
    match divergence_left_ifs(&f, &perturbed(&violating), z0, &companions, STEPS, &tol) {
        Err(Error::Inadmissible { index, .. }) => {
            report.measure("violation_flagged_at", index);
            report.check("inflated step 3 is flagged inadmissible", index == 3);
        }
        other => {
            report.measure("violation_outcome", format!("{other:?}"));
            report.check("inflated step 3 is flagged inadmissible", false);
        }
    }
    let trace = left_orbit(&perturbed(&violating), &[z0], 64)?;
    let worst = trace
        .steps
        .iter()
        .enumerate()
        .map(|(nu, rec)| {
            let target = f.power(nu as i64 + 1)?.eval(z0)?;
            Ok(h.dist(rec.images[0], target)? - (1.0 - 0.5f64.powi(nu as i32 + 1)))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    report.measure("violation_tracking_excess", worst);
    Ok(report)
}
