use std::path::PathBuf;

use thiserror::Error;

use crate::model::DualModel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("the plain Gaussian kernel has an infinite-dimensional feature map")]
    InfiniteDimensional,

    #[error("matrix is numerically singular: pivot {index} is {value:e}")]
    Singular { index: usize, value: f64 },

    #[error("solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    SolveResidual { residual: f64, tolerance: f64 },

    /// The boundary sampler could not find enough roots with independent feature images.
    #[error(
        "boundary search found {achieved} of {requested} independent roots \
         (the target may violate the orthogonal-polynomial assumption)"
    )]
    BoundarySearch {
        achieved: usize,
        requested: usize,
        points: Vec<Vec<f64>>,
    },

    #[error("no anchor point found: {0}")]
    AnchorSearch(String),

    /// The learner stopped above its loss tolerance. The best iterate is kept.
    #[error("learner did not converge: best loss {loss:e} after {iterations} iterations")]
    NotConverged {
        model: Box<DualModel>,
        loss: f64,
        iterations: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
