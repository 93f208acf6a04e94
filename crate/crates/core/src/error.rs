//! Error taxonomy shared by the library and mapped onto CLI exit codes.

use thiserror::Error;

/// All failure modes surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a precondition (bad dimension, empty input, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A size guard tripped (brute-force complex too large, cluster too big).
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// Torus point spread too large for isometric local embedding.
    #[error("not embeddable: {0}")]
    NotEmbeddable(String),

    /// Geometric degeneracy (collinear circumsphere input, degenerate Delaunay input).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A Monte Carlo table cannot resolve the requested target.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A statistical acceptance check failed (distinct from a runtime error).
    #[error("statistical fail: {0}")]
    StatisticalFail(String),

    /// An experiment hit a degenerate data condition (constant sample, empty survival grid).
    #[error("experiment error: {0}")]
    Experiment(String),

    /// A stated conjecture was numerically violated; never silently ignored.
    #[error("conjecture falsified: {0}")]
    ConjectureFalsified(String),

    /// Loop extraction failed on a degenerate feature.
    #[error("loop extraction error: {0}")]
    LoopExtraction(String),

    /// Density spec inconsistency (κ(y) above its declared bound, bad support).
    #[error("density spec error: {0}")]
    DensitySpec(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code for this error per the interface contract:
    /// 2 usage/invalid-input, 3 resolution, 4 statistical fail, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Resolution(_) => 3,
            Error::StatisticalFail(_) => 4,
            _ => 1,
        }
    }
}
