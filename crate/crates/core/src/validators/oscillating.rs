use num_complex::Complex64;

use super::{ScenarioParams, ScenarioReport};
use crate::error::{Error, Result};
use crate::holmaps::{HolMap, Mobius};
use crate::hypgeo::SurfaceModel;
use crate::ifs::{detect, divergence_profile, left_orbit, MapSequence, Tolerances, Verdict};

/// Iteration cap for each search phase.
const STEP_CAP: usize = 10_000_000;

/// Output of the oscillating construction.
#[derive(Debug, Clone)]
pub struct OscillatingRun {
    pub sequence: MapSequence,
    /// `nu_0, nu_1, ..., nu_{2J+1}`.
    pub breakpoints: Vec<usize>,
    pub report: ScenarioReport,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `w -> (j w - 1) / (w + j)`, the elliptic automorphism fixing `i`.
fn phi(j: usize) -> Mobius {
    let j = j as f64;
    Mobius::new(real(j), real(-1.0), real(1.0), real(j)).expect("determinant j^2 + 1")
}

fn shift() -> Mobius {
    Mobius::translation(real(-1.0))
}

/// `g_j = phi_j ∘ F ∘ phi_j^{-1}`, reduced to a single matrix.
fn g(j: usize) -> Mobius {
    let p = phi(j);
    p.compose(&shift()).compose(&p.inverse())
}

/// The stretch of the sequence ending at `last` on which `f_nu = map`.
#[derive(Debug, Clone)]
struct Stretch {
    last: usize,
    map: HolMap,
}

/// Builds `f_nu` and the breakpoints `nu_k` so that `|L_{nu_2j}(i)| < 2^-j`
/// and `|L_{nu_{2j+1}}(i)| > j` for `j <= rounds`.
///
/// Round `j` applies `g_j` until the orbit is within `2^-j` of `j`, then `F`
/// exactly `j` times, then `F` until the orbit leaves the disk of radius `j`.
pub fn oscillating_construction(rounds: usize, tol: &Tolerances) -> Result<OscillatingRun> {
    if !(1..=6).contains(&rounds) {
        return Err(Error::Usage(format!("rounds must be in 1..=6, got {rounds}")));
    }
    let f = shift();
    let mut report = ScenarioReport::new("oscillating");
    report.param("rounds", rounds);

    let mut stretches = vec![
        Stretch { last: 0, map: g(0).into() },
        Stretch { last: 1, map: f.into() },
    ];
    let mut breakpoints = vec![0, 1];
    let mut w = f.eval(g(0).eval(Complex64::i())?)?;
    let mut nu = 1;
    let mut counts = Vec::new();
    for j in 1..=rounds {
        let gj = g(j);
        let target = real(j as f64);
        report.check_le(&format!("g_{j} fixes {j}"), (gj.eval(target)? - target).norm(), 1e-10);

        let radius = 0.5f64.powi(j as i32);
        let mut n = 0;
        while (w - target).norm() >= radius {
            if n == STEP_CAP {
                return Err(Error::Scenario(format!(
                    "round {j}: g_{j} did not reach {target} within {STEP_CAP} steps, orbit at {w}"
                )));
            }
            w = gj.eval(w)?;
            n += 1;
        }
        for _ in 0..j {
            w = f.eval(w)?;
        }
        let mut m = 0;
        while m == 0 || w.norm() <= j as f64 {
            if m == STEP_CAP {
                return Err(Error::Scenario(format!(
                    "round {j}: F did not leave radius {j} within {STEP_CAP} steps, orbit at {w}"
                )));
            }
            w = f.eval(w)?;
            m += 1;
        }
        if n > 0 {
            stretches.push(Stretch { last: nu + n, map: gj.into() });
        }
        stretches.push(Stretch { last: nu + n + j + m, map: f.into() });
        let even = nu + n + j;
        let odd = even + m;
        breakpoints.extend([even, odd]);
        counts.push((n, m));
        nu = odd;
    }
    report.measure("breakpoints", &breakpoints);
    report.measure("phase_lengths", &counts);

    let table = stretches.clone();
    let tail = HolMap::from(f);
    let sequence = MapSequence::new(SurfaceModel::HalfPlane, move |nu| {
        let k = table.partition_point(|s| s.last < nu);
        table.get(k).map_or_else(|| tail.clone(), |s| s.map.clone())
    })
    .with_limit(f.into());

    // (a), (b)
    report.check("nu_0 = 0 and nu_1 = 1", breakpoints[..2] == [0, 1]);
    report.check(
        "f_0 = g_0 and f_1 = F",
        sequence.map(0) == g(0).into() && sequence.map(1) == f.into(),
    );
    // (c), (d)
    for j in 1..=rounds {
        let (prev, even, odd) = (breakpoints[2 * j - 1], breakpoints[2 * j], breakpoints[2 * j + 1]);
        report.check_le(&format!("nu_{} >= nu_{} + {j}", 2 * j, 2 * j - 1), (prev + j) as f64, even as f64);
        let gj: HolMap = g(j).into();
        let fj: HolMap = f.into();
        let layout = (prev + 1..=even - j).all(|nu| sequence.map(nu) == gj)
            && (even - j + 1..=odd).all(|nu| sequence.map(nu) == fj);
        report.check(&format!("round {j} uses g_{j} then F on the prescribed ranges"), layout);
    }

    // (e), measured on an independent left orbit of the stitched sequence.
    let last = *breakpoints.last().expect("breakpoints");
    let trace = left_orbit(&sequence, &[Complex64::i()], last + 1)?;
    let at = |k: usize| trace.steps[breakpoints[k]].images[0].norm();
    let mut small = Vec::new();
    let mut large = Vec::new();
    for j in 0..=rounds {
        small.push(at(2 * j));
        large.push(at(2 * j + 1));
        report.check_le(&format!("|L_nu_{}(i)| < 2^-{j}", 2 * j), at(2 * j), 0.5f64.powi(j as i32));
        report.check_le(&format!("|L_nu_{}(i)| > {j}", 2 * j + 1), j as f64, at(2 * j + 1));
    }
    report.measure("modulus_at_even_breakpoints", &small);
    report.measure("modulus_at_odd_breakpoints", &large);
    // The inline text of the construction claims |L_nu_3(i)| > 2.
    report.measure("modulus_at_nu_3_exceeds_2", at(3) > 2.0);
    let profile = divergence_profile(&trace);
    let at_breaks: Vec<f64> = breakpoints.iter().map(|&b| profile[b].1).collect();
    report.measure("base_distance_at_breakpoints", &at_breaks);

    let verdict = detect(&trace, &SurfaceModel::HalfPlane, tol);
    report.measure("verdict", &verdict);
    report.check(
        "left system is compactly divergent",
        matches!(verdict, Verdict::CompactlyDivergent { .. }),
    );
    report.check(
        "left system does not converge",
        small[rounds] < 1.0 && large[rounds] > rounds as f64,
    );
    Ok(OscillatingRun {
        sequence,
        breakpoints,
        report,
    })
}

pub(super) fn scenario(params: &ScenarioParams) -> Result<ScenarioReport> {
    Ok(oscillating_construction(params.j, &params.tolerances)?.report)
}
