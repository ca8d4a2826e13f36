use std::path::PathBuf;

use thiserror::Error;

/// Phase of a time step, used to tag solver failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Flow,
    Transport,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Flow => f.write_str("flow"),
            Phase::Transport => f.write_str("transport"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} index {index} out of range (len {len})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("unsupported polynomial degree {0}")]
    UnsupportedDegree(usize),

    #[error("dispersion tensor is singular (d_m = 0 and zero velocity)")]
    SingularTensor,

    #[error("{what} region {region} is not resolvable by the mesh")]
    MisalignedRegion { what: &'static str, region: String },

    #[error("nonpositive coefficient on element {element}: {detail}")]
    Coefficient { element: usize, detail: String },

    #[error("interior block of element {element} is singular")]
    ElementSingular { element: usize },

    #[error("dense matrix is singular (pivot {pivot})")]
    SingularMatrix { pivot: usize },

    #[error("skeleton solver failed: {0}")]
    SolverSingular(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: format error: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("{path}: data error: {detail}")]
    Data { path: PathBuf, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("step {step} ({phase}): {source}")]
    Step {
        step: usize,
        phase: Phase,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wrap an error with the step and phase it happened in.
    pub fn at_step(step: usize, phase: Phase) -> impl FnOnce(Error) -> Error {
        move |e| Error::Step {
            step,
            phase,
            source: Box::new(e),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
