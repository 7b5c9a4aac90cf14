use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures of the geometry and metric computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("need at least {needed} points, cloud has {actual}")]
    TooFewPoints { needed: usize, actual: usize },
    #[error("negative coordinate {value} at point {index}; bit depth is undefined")]
    NegativeCoordinate { index: usize, value: f64 },
    #[error("normal at point {index} has norm {norm}, expected 1")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("normals length {normals} does not match point count {points}")]
    NormalCountMismatch { points: usize, normals: usize },
    #[error("point-to-plane error needs normals on the target cloud")]
    MissingNormals,
    #[error("bit depth is unknown and cannot be inferred: {0}")]
    MissingBitDepth(String),
    #[error("peak value is zero ({0})")]
    ZeroPeak(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
