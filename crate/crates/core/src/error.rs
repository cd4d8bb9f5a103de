use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point does not lie on the surface it was handed to.
    #[error("point {point} is not on {surface}")]
    OffSurface { point: Complex64, surface: String },

    /// A closed-form map was evaluated at one of its poles.
    #[error("pole hit at {location}")]
    Pole { location: Complex64 },

    /// The caller asked for something the operation does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// Orbit computation failed at a given step.
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    /// A generated map failed the self-map guard.
    #[error("map {index} is not a self-map of {surface}")]
    NotSelfMap { index: usize, surface: String },

    /// A perturbation exceeded its deviation budget.
    #[error("map {index} is inadmissible: deviation {deviation:e} >= cap {cap:e}")]
    Inadmissible {
        index: usize,
        deviation: f64,
        cap: f64,
    },

    #[error("scenario error: {0}")]
    Scenario(String),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
