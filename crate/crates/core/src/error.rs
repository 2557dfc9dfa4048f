use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("coupling must satisfy mu * kappa > 0 (got mu = {mu}, kappa = {kappa})")]
    InvalidCoupling { mu: f64, kappa: f64 },

    #[error("invalid control region: {0}")]
    InvalidRegion(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("singular step matrix at time level {level}")]
    SingularStep { level: usize },

    #[error("conjugate gradient breakdown at iteration {iteration}: <gbar, w> = {curvature:e} is not positive")]
    CgBreakdown { iteration: usize, curvature: f64 },

    #[error("observability ratio undefined: control-region energy {0:e} is zero")]
    UndefinedRatio(f64),

    #[error("grid misalignment: {0}")]
    GridMisalignment(String),

    #[error("initial data violate y0(0) = mu z0 (mismatch {0:e})")]
    Incompatible(f64),

    #[error("expression `{expr}`: {message}")]
    Expression { expr: String, message: String },

    #[error("unknown preset `{0}` (expected test1, test2 or test3)")]
    UnknownPreset(String),

    #[error("invalid experiment configuration: {0}")]
    Validation(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
