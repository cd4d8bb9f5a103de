//! Experiment configs for the `orbit` subcommand.

use std::path::{Path, PathBuf};

use hypifs::holmaps::HolMap;
use hypifs::hypgeo::SurfaceModel;
use hypifs::ifs::{MapSequence, Side, Tail, Tolerances};
use hypifs::validators::half_scaled;
use hypifs::{Complex64, Error};
use serde::{Deserialize, Serialize};

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub surface: SurfaceModel,
    pub sequence: SequenceSpec,
    pub probes: Vec<Complex64>,
    pub steps: usize,
    #[serde(default = "default_side")]
    pub side: Side,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_side() -> Side {
    Side::Left
}

/// Output file names, resolved against the `--out` directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signs {
    Alternating,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    /// `amplitude * 2^-nu`
    Summable,
    /// `amplitude / (nu + 1)`
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceSpec {
    Identity,
    Constant {
        map: HolMap,
    },
    /// `z -> z/2 + delta e^{i theta_nu}` on the disk, `theta_nu` in `{0, pi}`.
    HalfScaled {
        delta: f64,
        signs: Signs,
    },
    Explicit {
        maps: Vec<HolMap>,
        #[serde(default = "default_tail")]
        tail: Tail,
    },
    /// Disk rotations by `angle + p_nu`.
    RotationPerturbed {
        angle: f64,
        amplitude: f64,
        perturbation: Perturbation,
    },
}

fn default_tail() -> Tail {
    Tail::RepeatLast
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        if config.version != VERSION {
            return Err(ConfigError::Invalid(format!(
                "unsupported config version {}, expected {VERSION}",
                config.version
            )));
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build_sequence(&self) -> Result<MapSequence, ConfigError> {
        let surface = self.surface;
        let needs_disk = |family: &str| {
            if surface == SurfaceModel::Disk {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("family {family} lives on the disk, not {surface}")))
            }
        };
        Ok(match &self.sequence {
            SequenceSpec::Identity => MapSequence::constant(surface, HolMap::identity()),
            SequenceSpec::Constant { map } => MapSequence::constant(surface, map.clone()),
            SequenceSpec::HalfScaled { delta, signs } => {
                needs_disk("half-scaled")?;
                let signs = *signs;
                half_scaled(*delta, move |nu| match signs {
                    Signs::Alternating if nu % 2 == 1 => std::f64::consts::PI,
                    _ => 0.0,
                })
            }
            SequenceSpec::Explicit { maps, tail } => MapSequence::from_list(surface, maps.clone(), *tail)?,
            SequenceSpec::RotationPerturbed {
                angle,
                amplitude,
                perturbation,
            } => {
                needs_disk("rotation-perturbed")?;
                let (angle, amplitude, perturbation) = (*angle, *amplitude, *perturbation);
                MapSequence::new(surface, move |nu| {
                    let p = match perturbation {
                        Perturbation::Summable => amplitude * 0.5f64.powi(nu as i32),
                        Perturbation::Harmonic => amplitude / (nu as f64 + 1.0),
                    };
                    HolMap::rotation(angle + p)
                })
                .with_limit(HolMap::rotation(angle))
            }
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Map(#[from] Error),
}
