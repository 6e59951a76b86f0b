use thiserror::Error;

/// Errors raised by mesh construction, assembly and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element count must be at least 1")]
    NoElements,
    #[error("curve endpoints coincide")]
    DegenerateCurve,
    #[error("logarithmic capacity guard violated: enclosing radius {radius} is not below 1")]
    CapacityViolation { radius: f64 },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("polygon is not positively oriented (signed area {0})")]
    NegativeOrientation(f64),
    #[error("element index {index} out of range for mesh with {count} elements")]
    InvalidElement { index: usize, count: usize },
    #[error("{what} matrix is not positive definite")]
    NotPositiveDefinite { what: &'static str },
    #[error("{what} system is singular")]
    Singular { what: &'static str },
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
