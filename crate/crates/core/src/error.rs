use thiserror::Error;

/// Every failure the library reports. Numerical failures carry the numbers
/// that triggered them so callers can decide whether to retry with a bigger
/// grid or a looser tolerance.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    QuadratureFailure { achieved: f64, requested: f64 },

    #[error("integrand is not integrable against the measure near the origin")]
    SingularIntegrand,

    #[error("scale equation t*psi_star(r) = 1 has no root in [{lo:.3e}, {hi:.3e}]")]
    ScaleUnreachable { lo: f64, hi: f64 },

    #[error("characteristic function too large at grid boundary: {boundary_magnitude:.3e}")]
    InsufficientDecay { boundary_magnitude: f64 },

    #[error("grid too small: needs extent {required_extent:.3e}, captured mass fraction {captured_fraction:.6}")]
    GridCoverage {
        required_extent: f64,
        captured_fraction: f64,
    },

    #[error("model has only finitely many jumps; density does not exist")]
    FiniteMeasure,

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("precondition refused: {0}")]
    Refused(String),

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
