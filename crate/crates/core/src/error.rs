use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("inner curve intersects or lies outside the outer curve")]
    CurvesIntersect,

    #[error("deformation step inverts or flattens triangle {triangle} (signed area {area:.3e} <= floor {floor:.3e})")]
    StepTooLarge { triangle: usize, area: f64, floor: f64 },

    #[error("step still inverts elements after {halvings} halvings")]
    StepStalled { halvings: usize },

    #[error("coefficient evaluates to a non-finite value at ({x}, {y})")]
    NonFiniteCoefficient { x: f64, y: f64 },

    #[error("coercivity margin sigma0 - C_P*|b|_inf = {margin:.4} is not positive")]
    CoercivityViolated { margin: f64 },

    #[error("linear system is singular or ill-conditioned: {0}")]
    SingularSystem(String),

    #[error("descent field has vanishing H1 norm")]
    ZeroDescentField,

    #[error("field does not belong to this mesh: {0}")]
    FieldMismatch(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("unknown expression `{0}`")]
    UnknownExpression(String),

    #[error("invalid range for `{key}`: {message}")]
    InvalidRange { key: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse { context: context.into(), message: message.into() }
    }

    pub(crate) fn range(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidRange { key: key.into(), message: message.into() }
    }
}
