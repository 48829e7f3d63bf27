use std::path::PathBuf;

/// Errors produced by the solver pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("argument {name} = {value} outside domain: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: String,
        reason: String,
    },

    #[error("invalid basis index: {0}")]
    InvalidIndex(String),

    #[error("coefficient vector has length {got}, basis table expects {expected}")]
    CoefficientLength { got: usize, expected: usize },

    #[error("invalid domain: radius r = {radius:.6e} <= 0 at angles ({angles:.4?})")]
    InvalidDomain { radius: f64, angles: Vec<f64> },

    #[error("degenerate surface element ({element:.3e}) at node {node}")]
    DegenerateSurface { element: f64, node: usize },

    #[error("first fundamental form singular at node (det = {det:.3e})")]
    DegenerateMetric { det: f64 },

    #[error("coincident points: pair ({i}, {j}) at distance {dist:.3e}")]
    CoincidentPoints { i: usize, j: usize, dist: f64 },

    #[error("source point {index} lies inside the domain (|y| = {radius:.6}, boundary r = {boundary:.6}); increase delta or reduce concavity")]
    SourceInsideDomain {
        index: usize,
        radius: f64,
        boundary: f64,
    },

    #[error("fundamental solution evaluated at a singular point (|x| = {norm:.3e})")]
    SingularPoint { norm: f64 },

    #[error("generalized eigensolver failed: {0}")]
    EigensolveFailed(String),

    #[error("only {got} real eigenvalues survived filtering, need {needed}; increase collocation count")]
    InsufficientEigenvalues { got: usize, needed: usize },

    #[error("hyperplane cut is empty")]
    EmptyCut,

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
