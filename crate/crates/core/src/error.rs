use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Every variant belongs to one pipeline stage (see [`Error::stage`]); the
/// command-line front end maps stages onto distinct exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("field configuration: {0}")]
    Fields(String),
    #[error("{what} must be real-valued (max imaginary part {max_imag:e})")]
    NotReal { what: &'static str, max_imag: f64 },
    #[error("admissibility violated: hbar^-d * sum(lambda^2) = {value} > C = {bound}")]
    Admissibility { value: f64, bound: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error(
        "Krylov propagator did not converge (error estimate {estimate:e} with subspace {dim})"
    )]
    KrylovNotConverged { estimate: f64, dim: usize },
    #[error(
        "relative energy drift {drift:e} exceeded abort threshold {threshold:e} at t = {time}"
    )]
    EnergyDrift {
        drift: f64,
        threshold: f64,
        time: f64,
    },
    #[error("invalid time step: {0}")]
    TimeStep(String),
    #[error("phase space: {0}")]
    PhaseSpace(String),
    #[error("kinetic: {0}")]
    Kinetic(String),
    #[error("sweep stage `{stage}` failed: {source}")]
    Sweep {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Pipeline stage tag used for exit-code mapping and diagnostics.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) | Error::ShapeMismatch(_) | Error::AxisOutOfRange { .. } => {
                "spectral"
            }
            Error::Fields(_) | Error::NotReal { .. } => "fields",
            Error::Admissibility { .. }
            | Error::InvalidState(_)
            | Error::KrylovNotConverged { .. }
            | Error::EnergyDrift { .. }
            | Error::TimeStep(_) => "quantum",
            Error::UnderResolved(_) | Error::PhaseSpace(_) => "wigner",
            Error::Kinetic(_) => "kinetic",
            Error::Sweep { .. } => "limitlab",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
