//! Command-line front end: distances, orbit traces and validation scenarios.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hypifs::hypgeo::SurfaceModel;
use hypifs::ifs::{detect, left_orbit, right_orbit, Side, Tolerances};
use hypifs::validators::{run_scenario, ScenarioParams, ScenarioReport, SCENARIOS};
use hypifs::{Complex64, Error};
use rayon::prelude::*;

use config::{ConfigError, ExperimentConfig};

pub mod exit {
    pub const OK: i32 = 0;
    /// At least one scenario ran to completion and failed an assertion.
    pub const FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const GUARD: i32 = 3;
    pub const IO: i32 = 4;
    pub const SCENARIO: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "hypifs", version, about = "Hyperbolic distances, IFS orbit traces and validation scenarios")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for traces, plots and reports.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Largest diameter of the probe images over the tail for a constant limit [default: 1e-6]
    #[arg(long, global = true)]
    pub tol_diam: Option<f64>,
    /// Largest step displacement over the tail for a constant limit [default: 1e-8]
    #[arg(long, global = true)]
    pub tol_step: Option<f64>,
    /// Least separation between two limit clusters [default: 1e-2]
    #[arg(long, global = true)]
    pub tol_gap: Option<f64>,
    /// Also write an SVG of the orbit.
    #[arg(long, global = true)]
    pub plot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poincaré distance between two points, e.g. `0.3-0.4i` or `2i`.
    Dist {
        #[arg(long, value_enum)]
        surface: SurfaceArg,
        /// Inner radius of the annulus.
        #[arg(long)]
        inner_radius: Option<f64>,
        #[arg(allow_hyphen_values = true)]
        z: String,
        #[arg(allow_hyphen_values = true)]
        w: String,
    },
    /// Run the orbit described by a JSON config and write its CSV trace.
    Orbit { config: PathBuf },
    /// Run one scenario, or `all` of them.
    Validate {
        scenario: String,
        /// Rounds of the oscillating construction.
        #[arg(long = "J", default_value_t = 4)]
        j: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceArg {
    Disk,
    HalfPlane,
    PuncturedDisk,
    Annulus,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl std::fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::OffSurface { .. } => exit::USAGE,
        Error::NotSelfMap { .. } => exit::GUARD,
        _ => exit::SCENARIO,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(code_for(&e), e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match &e {
            ConfigError::Io(..) => exit::IO,
            ConfigError::Map(inner) => code_for(inner),
            _ => exit::USAGE,
        };
        Failure::new(code, e)
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new(exit::IO, format!("cannot write {}: {e}", path.display()))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match &cli.command {
        Command::Dist {
            surface,
            inner_radius,
            z,
            w,
        } => cmd_dist(*surface, *inner_radius, z, w),
        Command::Orbit { config } => cmd_orbit(&cli, config),
        Command::Validate { scenario, j } => cmd_validate(&cli, scenario, *j),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn tolerances(cli: &Cli, base: Tolerances) -> Tolerances {
    Tolerances {
        tol_diam: cli.tol_diam.unwrap_or(base.tol_diam),
        tol_step: cli.tol_step.unwrap_or(base.tol_step),
        tol_gap: cli.tol_gap.unwrap_or(base.tol_gap),
        ..base
    }
}

fn parse_point(s: &str) -> Result<Complex64, Failure> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|_| Failure::new(exit::USAGE, format!("malformed point {s:?}")))
}

fn cmd_dist(surface: SurfaceArg, inner_radius: Option<f64>, z: &str, w: &str) -> Result<i32, Failure> {
    let surface = match (surface, inner_radius) {
        (SurfaceArg::Annulus, Some(r)) => SurfaceModel::annulus(r)?,
        (SurfaceArg::Annulus, None) => {
            return Err(Failure::new(exit::USAGE, "the annulus needs --inner-radius"));
        }
        (_, Some(_)) => return Err(Failure::new(exit::USAGE, "--inner-radius only applies to the annulus")),
        (SurfaceArg::Disk, None) => SurfaceModel::Disk,
        (SurfaceArg::HalfPlane, None) => SurfaceModel::HalfPlane,
        (SurfaceArg::PuncturedDisk, None) => SurfaceModel::PuncturedDisk,
    };
    let d = surface.dist(parse_point(z)?, parse_point(w)?)?;
    println!("{}", output::format_significant(d));
    Ok(exit::OK)
}

fn cmd_orbit(cli: &Cli, path: &Path) -> Result<i32, Failure> {
    let config = ExperimentConfig::load(path)?;
    let seq = config.build_sequence()?;
    let trace = match config.side {
        Side::Left => left_orbit(&seq, &config.probes, config.steps)?,
        Side::Right => right_orbit(&seq, &config.probes, config.steps)?,
    };
    let stem = path.file_stem().map_or_else(|| "orbit".into(), |s| s.to_string_lossy().into_owned());
    let csv_path = cli.out.join(config.output.trace.clone().unwrap_or_else(|| format!("{stem}.csv").into()));
    output::write_atomic(&csv_path, &output::trace_csv(&trace)).map_err(|e| io_failure(&csv_path, e))?;
    println!("trace: {}", csv_path.display());
    // A plot path in the config asks for the plot on its own.
    if cli.plot || config.output.plot.is_some() {
        let svg_path = cli.out.join(config.output.plot.clone().unwrap_or_else(|| format!("{stem}.svg").into()));
        output::write_atomic(&svg_path, output::trace_svg(&trace).as_bytes()).map_err(|e| io_failure(&svg_path, e))?;
        println!("plot: {}", svg_path.display());
    }
    let verdict = detect(&trace, &config.surface, &tolerances(cli, config.tolerances));
    println!("verdict: {}", serde_json::to_string(&verdict).expect("verdict serializes"));
    Ok(exit::OK)
}

pub fn report_json(report: &ScenarioReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_validate(cli: &Cli, scenario: &str, j: usize) -> Result<i32, Failure> {
    let ids: Vec<&str> = if scenario == "all" {
        SCENARIOS.to_vec()
    } else if SCENARIOS.contains(&scenario) {
        vec![scenario]
    } else {
        return Err(Failure::new(
            exit::USAGE,
            format!("unknown scenario {scenario:?}; known: all, {}", SCENARIOS.join(", ")),
        ));
    };
    let params = ScenarioParams {
        seed: cli.seed,
        j,
        tolerances: tolerances(cli, Tolerances::default()),
    };
    let results: Vec<(&str, Result<ScenarioReport, Error>)> =
        ids.par_iter().map(|id| (*id, run_scenario(id, &params))).collect();

    let mut code = exit::OK;
    for (id, result) in results {
        match result {
            Ok(report) => {
                let path = cli.out.join(format!("{id}.json"));
                output::write_atomic(&path, report_json(&report).as_bytes()).map_err(|e| io_failure(&path, e))?;
                let n = report.assertions.len();
                if report.pass {
                    println!("PASS {id} ({n} assertions)");
                } else {
                    println!("FAIL {id}: {}", report.failures().join("; "));
                    code = code.max(exit::FAILED);
                }
                if let Some(b) = report.measured.get("breakpoints") {
                    println!("  breakpoints {b}");
                }
            }
            Err(e) => {
                eprintln!("ERROR {id}: {e}");
                code = code.max(code_for(&e));
            }
        }
    }
    Ok(code)
}
