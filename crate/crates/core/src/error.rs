use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {m} not supported here: {reason}")]
    Dimension { m: usize, reason: String },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance: achieved {achieved:.3e}, requested {requested:.3e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("oscillation parameter {value} exceeds the cap {cap}")]
    Range { value: f64, cap: f64 },

    #[error("decay exponent {found} too small, need more than {needed}")]
    Decay { found: f64, needed: f64 },

    #[error("grid or profile mismatch: {0}")]
    Grid(String),

    #[error("no threshold resonance: {0}")]
    NoResonance(String),

    #[error("ambiguous threshold cluster near tolerance {tol:.3e}: {cluster:?}")]
    Ambiguity { tol: f64, cluster: Vec<f64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("tail not asymptotic: {0}")]
    Asymptotics(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
