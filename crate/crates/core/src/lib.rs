//! Geometry quality metrics for point clouds.
//!
//! The crate covers the PSNR family used to score decoded point clouds
//! against their originals:
//!
//! * benchmark D1/D2 PSNR with a precision peak or a bounding-box diagonal peak,
//! * I-PSNR, where an intrinsic resolution estimate of the reference
//!   (MNN, ANN, ANN_k) or its rendering resolution (APD_k) is the peak,
//! * RA-PSNR, which further scales the error by the density coefficient
//!   `p_c / r`.
//!
//! The [`evaluation`] module fits objective scores to subjective MOS with a
//! cubic mapping and reports PLCC/SROCC per stimulus group.
//!
//! Per-point loops run on rayon when the `parallel` feature is enabled (the
//! default). Every reduction is performed sequentially over an ordered
//! buffer, so parallel and sequential runs agree bit for bit.

pub mod cloud;
pub mod degrade;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod geom;
pub mod index;
pub mod metrics;
pub mod normals;
pub mod ply;

pub use cloud::{infer_bit_depth, PointCloud};
pub use error::{Error, Result};
pub use exec::Execution;
pub use index::{Neighbor, NeighborIndex, Neighborhood};
pub use metrics::{
    evaluate, evaluate_clouds, psnr, ra_psnr, ErrorKind, MetricOptions, MetricResult,
    MetricVariant, NormalSource, Peak, PeakSpec, Pooling, PreparedCloud, Resolution,
};
pub use normals::{estimate_normals, NormalEstimate, DEFAULT_NORMAL_K};

/// 3D point or vector in source units.
pub type Point3 = [f64; 3];
