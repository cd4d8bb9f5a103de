use num_complex::Complex64;
use rand::Rng;

use super::{random_point, tail_motion, ScenarioParams, ScenarioReport, HYPOTHESIS};
use crate::error::Result;
use crate::holmaps::HolMap;
use crate::hypgeo::{cayley, disk_dist, half_plane_dist, SurfaceModel};
use crate::ifs::{
    detect, left_orbit, renormalized_left, renormalized_right, right_orbit, MapSequence, Tolerances,
    Verdict,
};

/// `f_nu(z) = z/2 + delta * e^{i theta_nu}` on the disk.
pub fn half_scaled(delta: f64, angle: impl Fn(usize) -> f64 + Send + Sync + 'static) -> MapSequence {
    MapSequence::new(SurfaceModel::Disk, move |nu| {
        HolMap::affine(Complex64::new(0.5, 0.0), Complex64::from_polar(delta, angle(nu)))
            .expect("nonzero scale")
    })
}

fn alternating(nu: usize) -> f64 {
    if nu.is_multiple_of(2) {
        0.0
    } else {
        std::f64::consts::PI
    }
}

const PAIRS: usize = 200;
const REACH: f64 = 4.0;

pub(super) fn metric(rng: &mut impl Rng) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new("metric");
    report.param("pairs", PAIRS);
    report.param("reach", REACH);
    let surfaces = [
        ("disk", SurfaceModel::Disk),
        ("half-plane", SurfaceModel::HalfPlane),
        ("punctured-disk", SurfaceModel::PuncturedDisk),
        ("annulus", SurfaceModel::annulus(0.1)?),
    ];
    for (name, s) in surfaces {
        let (mut sym, mut tri, mut deck, mut lift): (f64, f64, f64, f64) = (0.0, f64::NEG_INFINITY, 0.0, 0.0);
        for _ in 0..PAIRS {
            let z = random_point(&s, rng, REACH);
            let w = random_point(&s, rng, REACH);
            let u = random_point(&s, rng, REACH);
            let d = s.dist(z, w)?;
            sym = sym.max((d - s.dist(w, z)?).abs());
            tri = tri.max(d - s.dist(z, u)? - s.dist(u, w)?);
            if matches!(s, SurfaceModel::PuncturedDisk | SurfaceModel::Annulus { .. }) {
                deck = deck.max((s.dist_with_deck_window(z, w, 2)? - d).abs());
                let back = s.project_from_half_plane(s.lift_to_half_plane(z)?)?;
                lift = lift.max((back - z).norm());
            }
        }
        report.check_le(&format!("{name}: symmetry"), sym, 1e-12);
        report.check_le(&format!("{name}: triangle inequality"), tri, 1e-10);
        if matches!(s, SurfaceModel::PuncturedDisk | SurfaceModel::Annulus { .. }) {
            report.check_le(&format!("{name}: deck window +2 is stable"), deck, 1e-12);
            report.check_le(&format!("{name}: lift round trip"), lift, 1e-12);
        }
    }
    let mut cay: f64 = 0.0;
    for _ in 0..PAIRS {
        let z = random_point(&SurfaceModel::Disk, rng, REACH);
        let w = random_point(&SurfaceModel::Disk, rng, REACH);
        cay = cay.max((disk_dist(z, w) - half_plane_dist(cayley(z), cayley(w))).abs());
    }
    report.check_le("Cayley transform is an isometry", cay, 1e-12);
    Ok(report)
}

const PRODUCTS: usize = 50;
const AUTOMORPHISMS: usize = 20;

fn random_factor(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU))
}

fn unimodular(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

pub(super) fn schwarz_pick(rng: &mut impl Rng) -> Result<ScenarioReport> {
    let d = SurfaceModel::Disk;
    let mut report = ScenarioReport::new("schwarz-pick");
    report.param("products", PRODUCTS);
    report.param("automorphisms", AUTOMORPHISMS);
    report.param("pairs", 50);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..PRODUCTS {
        let degree = rng.gen_range(1..=4);
        let factors = (0..degree).map(|_| random_factor(rng)).collect();
        let f = HolMap::blaschke(unimodular(rng), factors)?;
        for _ in 0..50 {
            let z = random_point(&d, rng, 3.0);
            let w = random_point(&d, rng, 3.0);
            excess = excess.max(d.dist(f.eval(z)?, f.eval(w)?)? - d.dist(z, w)?);
        }
    }
    report.check_le("Blaschke products do not expand distances", excess, 1e-10);
    let mut defect: f64 = 0.0;
    for _ in 0..AUTOMORPHISMS {
        let f = HolMap::blaschke(unimodular(rng), vec![random_factor(rng)])?;
        for _ in 0..50 {
            let z = random_point(&d, rng, 3.0);
            let w = random_point(&d, rng, 3.0);
            defect = defect.max((d.dist(f.eval(z)?, f.eval(w)?)? - d.dist(z, w)?).abs());
        }
    }
    report.check_le("automorphisms preserve distances", defect, 1e-10);
    Ok(report)
}

pub(super) fn half_scaled_scenario(params: &ScenarioParams) -> Result<ScenarioReport> {
    const DELTA: f64 = 0.1;
    const STEPS: usize = 64;
    let mut report = ScenarioReport::new("half-scaled");
    report.param("delta", DELTA);
    report.param("steps", STEPS);
    let z = Complex64::new(0.3, -0.4);
    let trace = left_orbit(&half_scaled(DELTA, alternating), &[Complex64::new(0.0, 0.0), z], STEPS)?;
    let (mut at_zero, mut general): (f64, f64) = (0.0, 0.0);
    for (nu, rec) in trace.steps.iter().enumerate() {
        let sign = if nu % 2 == 0 { 1.0 } else { -1.0 };
        let series: f64 = (0..=nu).map(|j| (-0.5f64).powi(j as i32)).sum();
        at_zero = at_zero.max((rec.images[0] - Complex64::new(DELTA * sign * series, 0.0)).norm());
        let closed = z * 0.5f64.powi(nu as i32 + 1)
            + (0..=nu)
                .map(|j| Complex64::from_polar(DELTA * 0.5f64.powi(j as i32), alternating(nu - j)))
                .sum::<Complex64>();
        general = general.max((rec.images[1] - closed).norm());
    }
    report.check_le("probe 0 matches the alternating series", at_zero, 1e-12);
    report.check_le("general probe matches the closed form", general, 1e-12);
    let verdict = detect(&trace, &SurfaceModel::Disk, &params.tolerances);
    report.measure("verdict", &verdict);
    match verdict {
        Verdict::Oscillating { gap, .. } => {
            report.check("verdict is oscillating", true);
            report.check_le("cluster gap is 4 delta / 3", (gap - 4.0 * DELTA / 3.0).abs(), 1e-3);
        }
        _ => {
            report.check("verdict is oscillating", false);
        }
    }
    Ok(report)
}

pub(super) fn right_constant(params: &ScenarioParams) -> Result<ScenarioReport> {
    const STEPS: usize = 65;
    let h = SurfaceModel::HalfPlane;
    let mut report = ScenarioReport::new("right-constant");
    report.param("steps", STEPS);
    let seq = MapSequence::new(h, |nu| {
        if nu == 0 {
            HolMap::exp_affine(Complex64::i())
        } else {
            HolMap::translation(Complex64::new(1.0, 0.0))
        }
    });
    let probes = [Complex64::i(), Complex64::new(0.0, 2.0), Complex64::new(0.3, 0.7)];
    let right = right_orbit(&seq, &probes, STEPS)?;
    let f0 = seq.map(0);
    let mut drift: f64 = 0.0;
    for rec in &right.steps {
        for (img, &z) in rec.images.iter().zip(&probes) {
            drift = drift.max((img - f0.eval(z)?).norm());
        }
    }
    report.check_le("R_nu equals f_0 on the probes", drift, 1e-12);
    let first = &right.steps[0].images;
    let expected = [
        Complex64::new((-2.0 * std::f64::consts::PI).exp(), 1.0),
        Complex64::new((-4.0 * std::f64::consts::PI).exp(), 1.0),
    ];
    for (k, want) in expected.iter().enumerate() {
        report.check_le(&format!("R_nu at probe {k} in closed form"), (first[k] - want).norm(), 1e-12);
    }
    let verdict = detect(&right, &h, &params.tolerances);
    report.measure("right_verdict", &verdict);
    report.check(
        "right system is not compactly divergent",
        !matches!(verdict, Verdict::CompactlyDivergent { .. }),
    );

    let left = left_orbit(&seq, &probes[..1], STEPS)?;
    let dist: Vec<f64> = left.steps.iter().map(|r| r.base_dist).collect();
    let prefix = (0..dist.len() - 1)
        .rev()
        .find(|&k| dist[k + 1] <= dist[k])
        .map_or(0, |k| k + 1);
    report.measure("left_growth_prefix", prefix);
    report.measure("left_final_base_distance", dist[dist.len() - 1]);
    report.check_le("left base distance grows strictly after a short prefix", prefix as f64, (STEPS / 2) as f64);
    Ok(report)
}

/// Checks the summability condition at `a` and `b` and, when it holds, that
/// both renormalized systems are Cauchy with non-constant limits.
pub fn summable_perturbation(
    f: &HolMap,
    seq: &MapSequence,
    a: Complex64,
    b: Complex64,
    n: usize,
    tol: &Tolerances,
) -> Result<ScenarioReport> {
    let s = seq.surface();
    let mut report = ScenarioReport::new("summable-perturbation");
    report.param("steps", n);
    report.param("a", a);
    report.param("b", b);
    let mut sums = [0.0, 0.0];
    let mut late = [0.0f64, 0.0];
    for nu in 0..n {
        let g = seq.get(nu)?;
        for (k, &p) in [a, b].iter().enumerate() {
            let inc = s.dist(g.eval(p)?, f.eval(p)?)?;
            sums[k] += inc;
            if nu >= 3 * n / 4 {
                late[k] = late[k].max(inc);
            }
        }
    }
    report.measure("partial_sums", sums);
    report.measure("late_increments", late);
    let met_a = report.check_le(&format!("{HYPOTHESIS}: increments at a vanish"), late[0], 1e-10);
    let met_b = report.check_le(&format!("{HYPOTHESIS}: increments at b vanish"), late[1], 1e-10);

    let probes = [a, b];
    let left = renormalized_left(seq, f, &probes, n)?;
    let right = renormalized_right(seq, f, &probes, n)?;
    let verdict = detect(&left, &s, tol);
    report.measure("left_verdict", &verdict);
    report.check(
        "renormalized left is never a tight constant",
        !matches!(verdict, Verdict::InteriorConstant { residual, .. } if residual < 1e-6),
    );
    if !(met_a && met_b) {
        return Ok(report);
    }
    for (name, trace) in [("left", &left), ("right", &right)] {
        let motion = tail_motion(trace, &s);
        let diam = trace.steps[3 * n / 4..].iter().map(|r| r.diam).fold(f64::INFINITY, f64::min);
        report.measure(&format!("{name}_tail_motion"), motion);
        report.measure(&format!("{name}_limit"), &trace.steps[n - 1].images);
        report.check_le(&format!("renormalized {name} is Cauchy"), motion, 1e-8);
        report.check_le(&format!("renormalized {name} limit is non-constant"), 1e-6, diam);
    }
    Ok(report)
}

pub(super) fn summable_scenario(params: &ScenarioParams) -> Result<ScenarioReport> {
    const STEPS: usize = 256;
    let d = SurfaceModel::Disk;
    let f = HolMap::rotation(1.0);
    let (a, b) = (Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0));
    let tol = &params.tolerances;
    let mut report = ScenarioReport::new("summable-perturbation");

    let summable = MapSequence::new(d, |nu| HolMap::rotation(1.0 + 0.5f64.powi(nu as i32)));
    report.absorb("summable", summable_perturbation(&f, &summable, a, b, STEPS, tol)?);

    let same = MapSequence::constant(d, f.clone());
    let sub = summable_perturbation(&f, &same, a, b, STEPS, tol)?;
    let zero = sub.measured.get("partial_sums") == Some(&serde_json::json!([0.0, 0.0]));
    report.check("unperturbed sums vanish", zero);
    report.absorb("unperturbed", sub);
    let frozen = renormalized_left(&same, &f, &[a, b], STEPS)?
        .steps
        .iter()
        .flat_map(|r| [(r.images[0] - a).norm(), (r.images[1] - b).norm()])
        .fold(0.0, f64::max);
    report.check_le("unperturbed renormalized orbit stays on the probes", frozen, 1e-10);

    let harmonic = MapSequence::new(d, |nu| HolMap::rotation(1.0 + 1.0 / (nu as f64 + 1.0)));
    let control = summable_perturbation(&f, &harmonic, a, b, STEPS, tol)?;
    report.measure("control_failures", control.failures());
    report.check("harmonic control is reported as hypothesis not met", control.hypothesis_failed_only());
    Ok(report)
}
