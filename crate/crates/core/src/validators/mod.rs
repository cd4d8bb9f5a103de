//! Executable scenarios that exhibit convergence results and
//! counterexamples on concrete instances, each producing a [`ScenarioReport`].

mod attracting;
mod bloch;
mod divergence;
mod examples;
mod oscillating;

pub use attracting::{attracting_left_ifs, attracting_neighborhood, AttractingNeighborhood};
pub use bloch::{bloch_left_ifs, contraction_bound_report, estimate_contraction, BlochInstance};
pub use divergence::{divergence_budget, divergence_left_ifs, max_admissible_shift, DivergenceBudget};
pub use examples::{half_scaled, summable_perturbation};
pub use oscillating::{oscillating_construction, OscillatingRun};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::hypgeo::SurfaceModel;
use crate::ifs::Tolerances;

/// `lhs <= rhs`, with `margin = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub params: BTreeMap<String, Value>,
    pub measured: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
}

impl ScenarioReport {
    pub fn new(scenario: &str) -> Self {
        ScenarioReport {
            scenario: scenario.to_string(),
            params: BTreeMap::new(),
            measured: BTreeMap::new(),
            assertions: Vec::new(),
            pass: true,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.params.insert(key.to_string(), to_value(value));
    }

    pub fn measure(&mut self, key: &str, value: impl Serialize) {
        self.measured.insert(key.to_string(), to_value(value));
    }

    /// Records `lhs <= rhs`. Non-finite or NaN sides are stored as the
    /// largest finite value of matching sign so the report stays valid JSON.
    pub fn check_le(&mut self, name: &str, lhs: f64, rhs: f64) -> bool {
        let lhs = finite(lhs, f64::MAX);
        let rhs = finite(rhs, f64::MIN);
        let margin = rhs - lhs;
        let pass = margin >= 0.0;
        self.assertions.push(Assertion {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            pass,
        });
        self.pass &= pass;
        pass
    }

    /// Records a boolean condition as `0 <= 0` (holds) or `1 <= 0` (fails).
    pub fn check(&mut self, name: &str, ok: bool) -> bool {
        self.check_le(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    /// Merges a sub-report, prefixing its keys and assertion names.
    pub fn absorb(&mut self, prefix: &str, sub: ScenarioReport) {
        for (k, v) in sub.params {
            self.params.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in sub.measured {
            self.measured.insert(format!("{prefix}.{k}"), v);
        }
        for mut a in sub.assertions {
            a.name = format!("{prefix}: {}", a.name);
            self.pass &= a.pass;
            self.assertions.push(a);
        }
    }

    /// Recomputes every assertion from its stored sides.
    pub fn recheck(&self) -> bool {
        self.assertions
            .iter()
            .all(|a| a.margin == a.rhs - a.lhs && a.pass == (a.margin >= 0.0))
            && self.pass == self.assertions.iter().all(|a| a.pass)
    }

    /// The names of failed assertions.
    pub fn failures(&self) -> Vec<&str> {
        self.assertions
            .iter()
            .filter(|a| !a.pass)
            .map(|a| a.name.as_str())
            .collect()
    }

    /// True when the report fails and every failure is a hypothesis check.
    pub fn hypothesis_failed_only(&self) -> bool {
        let failures = self.failures();
        !failures.is_empty() && failures.iter().all(|n| n.starts_with(HYPOTHESIS))
    }
}

/// Prefix of assertion names that test a claim's hypotheses rather than
/// its conclusion.
pub const HYPOTHESIS: &str = "hypothesis";

fn finite(x: f64, fallback: f64) -> f64 {
    if x.is_nan() {
        fallback
    } else {
        x.clamp(f64::MIN, f64::MAX)
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).unwrap_or(Value::Null)
}

/// Run-wide scenario settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub seed: u64,
    /// Number of oscillation rounds for the oscillating construction.
    pub j: usize,
    pub tolerances: Tolerances,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            seed: 0,
            j: 4,
            tolerances: Tolerances::default(),
        }
    }
}

pub const SCENARIOS: &[&str] = &[
    "metric",
    "schwarz-pick",
    "half-scaled",
    "bloch-left",
    "contraction-bound",
    "attracting-left",
    "attracting-right",
    "divergence",
    "oscillating",
    "right-constant",
    "summable-perturbation",
];

pub fn run_scenario(id: &str, params: &ScenarioParams) -> Result<ScenarioReport> {
    let stream = SCENARIOS
        .iter()
        .position(|s| *s == id)
        .ok_or_else(|| Error::Usage(format!("unknown scenario {id:?}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(stream as u64);
    let mut report = match id {
        "metric" => examples::metric(&mut rng),
        "schwarz-pick" => examples::schwarz_pick(&mut rng),
        "half-scaled" => examples::half_scaled_scenario(params),
        "bloch-left" => bloch::scenario(params, &mut rng),
        "contraction-bound" => bloch::bound_scenario(params, &mut rng),
        "attracting-left" => attracting::left_scenario(params),
        "attracting-right" => attracting::right_scenario(params),
        "divergence" => divergence::scenario(params),
        "oscillating" => oscillating::scenario(params),
        "right-constant" => examples::right_constant(params),
        "summable-perturbation" => examples::summable_scenario(params),
        _ => unreachable!("listed scenario"),
    }?;
    report.param("seed", params.seed);
    Ok(report)
}

/// A point at hyperbolic distance at most `reach` from the base point,
/// uniform in the geodesic polar square root of the radius.
pub(crate) fn random_point(surface: &SurfaceModel, rng: &mut impl Rng, reach: f64) -> Complex64 {
    let r = reach * rng.gen::<f64>().sqrt();
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    surface.geodesic_polar(surface.base_point(), r, angle)
}

/// Largest displacement of any probe between consecutive records over the
/// last quarter of a trace.
pub(crate) fn tail_motion(trace: &crate::ifs::OrbitTrace, surface: &SurfaceModel) -> f64 {
    let n = trace.steps.len();
    let start = (3 * n / 4).max(1);
    (start..n)
        .flat_map(|nu| {
            let (prev, cur) = (&trace.steps[nu - 1].images, &trace.steps[nu].images);
            prev.iter()
                .zip(cur)
                .map(|(a, b)| surface.dist_or_inf(*a, *b))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_records_margins() {
        let mut r = ScenarioReport::new("x");
        assert!(r.check_le("a", 1.0, 2.0));
        assert!(r.pass);
        assert!(!r.check("b", false));
        assert!(!r.pass);
        assert_eq!(r.assertions[0].margin, 1.0);
        assert_eq!(r.assertions[1].margin, -1.0);
        assert!(r.recheck());
        assert_eq!(r.failures(), vec!["b"]);
    }

    #[test]
    fn non_finite_sides_stay_valid_json() {
        let mut r = ScenarioReport::new("x");
        r.check_le("inf", f64::INFINITY, 1.0);
        r.check_le("nan", f64::NAN, 1.0);
        let text = serde_json::to_string(&r).unwrap();
        let back: ScenarioReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(!r.pass);
    }

    #[test]
    fn absorb_prefixes() {
        let mut sub = ScenarioReport::new("s");
        sub.measure("m", 1.5);
        sub.check("hypothesis: decays", false);
        assert!(sub.hypothesis_failed_only());
        let mut top = ScenarioReport::new("t");
        top.absorb("ctl", sub);
        assert!(top.measured.contains_key("ctl.m"));
        assert_eq!(top.failures(), vec!["ctl: hypothesis: decays"]);
    }

    #[test]
    fn unknown_scenario_is_usage_error() {
        assert!(matches!(
            run_scenario("no-such", &ScenarioParams::default()),
            Err(Error::Usage(_))
        ));
    }
}
