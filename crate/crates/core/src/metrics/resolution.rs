//! Intrinsic and rendering resolution estimators.
//!
//! All estimators exclude a point from its own neighborhood. Duplicate
//! points are kept, so a duplicated point contributes a zero distance.

use serde::{Deserialize, Serialize};

use crate::cloud::{coordinate_peak, PointCloud};
use crate::error::{Error, Result};
use crate::exec::{ordered_sum, Execution};
use crate::geom::{dot, norm, norm_sq, scale, sub};
use crate::index::NeighborIndex;
use crate::normals::{normals_from_index, DEFAULT_NORMAL_K};
use crate::Point3;

const UNIT_TOLERANCE: f64 = 1e-9;

/// A resolution estimator over the reference cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// Maximum nearest-neighbor distance.
    Mnn,
    /// Root mean square nearest-neighbor distance.
    Ann,
    /// Root mean square distance to the `k` nearest neighbors.
    AnnK(usize),
    /// Root mean square tangent-plane distance to the `k` nearest neighbors
    /// (rendering resolution).
    ApdK(usize),
    /// `ApdK` without the outer square root, i.e. a mean squared length.
    ApdKMeanSquare(usize),
}

impl Resolution {
    pub fn label(self) -> &'static str {
        match self {
            Resolution::Mnn => "mnn",
            Resolution::Ann => "ann",
            Resolution::AnnK(_) => "annk",
            Resolution::ApdK(_) => "apdk",
            Resolution::ApdKMeanSquare(_) => "apdk-ms",
        }
    }

    pub fn k(self) -> Option<usize> {
        match self {
            Resolution::Mnn | Resolution::Ann => None,
            Resolution::AnnK(k) | Resolution::ApdK(k) | Resolution::ApdKMeanSquare(k) => Some(k),
        }
    }

    pub fn needs_normals(self) -> bool {
        matches!(self, Resolution::ApdK(_) | Resolution::ApdKMeanSquare(_))
    }

    pub(crate) fn validate(self) -> Result<()> {
        match self.k() {
            Some(0) => Err(Error::InvalidParameter(format!(
                "{} needs k >= 1",
                self.label()
            ))),
            _ => Ok(()),
        }
    }

    /// Evaluates the estimator over an indexed cloud. `normals` is required
    /// for the planar estimators.
    pub fn evaluate(
        self,
        index: &NeighborIndex,
        normals: Option<&[Point3]>,
        exec: Execution,
    ) -> Result<f64> {
        self.validate()?;
        match self {
            Resolution::Mnn => mnn_with(index, exec),
            Resolution::Ann => ann_k_with(index, 1, exec),
            Resolution::AnnK(k) => ann_k_with(index, k, exec),
            Resolution::ApdK(k) => {
                apd_k_mean_square_with(index, normals.ok_or(Error::MissingNormals)?, k, exec)
                    .map(f64::sqrt)
            }
            Resolution::ApdKMeanSquare(k) => {
                apd_k_mean_square_with(index, normals.ok_or(Error::MissingNormals)?, k, exec)
            }
        }
    }
}

/// Length of the bounding-box diagonal.
pub fn largest_diagonal(cloud: &PointCloud) -> Result<f64> {
    let (lo, hi) = cloud.bounding_box().ok_or(Error::EmptyCloud)?;
    Ok(norm(sub(hi, lo)))
}

/// Per-point mean squared distance to the `k` nearest neighbors.
pub fn ann_k_per_point_with(index: &NeighborIndex, k: usize, exec: Execution) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if index.len() < k + 1 {
        return Err(Error::TooFewPoints {
            needed: k + 1,
            actual: index.len(),
        });
    }
    let points = index.points();
    Ok(exec.map(index.len(), |i| {
        let hood = index.knn(points[i], k, Some(i));
        hood.iter().map(|n| n.distance_sq).sum::<f64>() / k as f64
    }))
}

pub fn mnn_with(index: &NeighborIndex, exec: Execution) -> Result<f64> {
    let d2 = ann_k_per_point_with(index, 1, exec)?;
    Ok(d2.into_iter().fold(0.0, f64::max).sqrt())
}

pub fn ann_k_with(index: &NeighborIndex, k: usize, exec: Execution) -> Result<f64> {
    let d2 = ann_k_per_point_with(index, k, exec)?;
    Ok((ordered_sum(&d2) / d2.len() as f64).sqrt())
}

/// Maximum nearest-neighbor distance over all points.
pub fn mnn(cloud: &PointCloud) -> Result<f64> {
    mnn_with(&NeighborIndex::build(cloud)?, Execution::default())
}

/// Root mean square nearest-neighbor distance.
pub fn ann(cloud: &PointCloud) -> Result<f64> {
    ann_k(cloud, 1)
}

/// Root mean square distance to the `k` nearest neighbors. `ann_k(c, 1)`
/// equals `ann(c)` exactly.
pub fn ann_k(cloud: &PointCloud, k: usize) -> Result<f64> {
    ann_k_with(&NeighborIndex::build(cloud)?, k, Execution::default())
}

/// Planar distance vector: the component of `neighbor - center` orthogonal
/// to the unit normal.
pub fn planar_distance_vector(center: Point3, normal: Point3, neighbor: Point3) -> Result<Point3> {
    let len = norm(normal);
    if (len - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitNormal {
            index: 0,
            norm: len,
        });
    }
    Ok(planar_vector_unchecked(center, normal, neighbor))
}

#[inline]
fn planar_vector_unchecked(center: Point3, normal: Point3, neighbor: Point3) -> Point3 {
    let d = sub(neighbor, center);
    sub(d, scale(normal, dot(d, normal)))
}

/// Distance between `center` and `neighbor` once both are projected on the
/// plane through `center` orthogonal to `normal`.
pub fn planar_distance(center: Point3, normal: Point3, neighbor: Point3) -> Result<f64> {
    planar_distance_vector(center, normal, neighbor).map(norm)
}

/// Mean over all points of the mean squared planar distance to the `k`
/// nearest neighbors.
pub fn apd_k_mean_square_with(
    index: &NeighborIndex,
    normals: &[Point3],
    k: usize,
    exec: Execution,
) -> Result<f64> {
    let per_point = apd_k_per_point_with(index, normals, k, exec)?;
    Ok(ordered_sum(&per_point) / per_point.len() as f64)
}

/// Per-point mean squared planar distance to the `k` nearest neighbors.
pub fn apd_k_per_point_with(
    index: &NeighborIndex,
    normals: &[Point3],
    k: usize,
    exec: Execution,
) -> Result<Vec<f64>> {
    if normals.len() != index.len() {
        return Err(Error::NormalCountMismatch {
            points: index.len(),
            normals: normals.len(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if index.len() < k + 1 {
        return Err(Error::TooFewPoints {
            needed: k + 1,
            actual: index.len(),
        });
    }
    if let Some((i, n)) = normals
        .iter()
        .enumerate()
        .find(|(_, n)| (norm(**n) - 1.0).abs() > UNIT_TOLERANCE)
    {
        return Err(Error::NonUnitNormal {
            index: i,
            norm: norm(*n),
        });
    }
    let points = index.points();
    Ok(exec.map(index.len(), |i| {
        let hood = index.knn(points[i], k, Some(i));
        hood.iter()
            .map(|n| {
                norm_sq(planar_vector_unchecked(
                    points[i],
                    normals[i],
                    points[n.index],
                ))
            })
            .sum::<f64>()
            / k as f64
    }))
}

fn normals_or_estimate(cloud: &PointCloud, index: &NeighborIndex) -> Result<Vec<Point3>> {
    match cloud.normals() {
        Some(n) => Ok(n.to_vec()),
        None => Ok(normals_from_index(index, DEFAULT_NORMAL_K, Execution::default())?.0),
    }
}

/// Rendering resolution: root mean square tangent-plane distance to the `k`
/// nearest neighbors. Uses the cloud's normals, estimating them with
/// [`DEFAULT_NORMAL_K`] neighbors when absent.
pub fn apd_k(cloud: &PointCloud, k: usize) -> Result<f64> {
    apd_k_mean_square(cloud, k).map(f64::sqrt)
}

/// [`apd_k`] without the outer square root.
pub fn apd_k_mean_square(cloud: &PointCloud, k: usize) -> Result<f64> {
    let index = NeighborIndex::build(cloud)?;
    let normals = normals_or_estimate(cloud, &index)?;
    apd_k_mean_square_with(&index, &normals, k, Execution::default())
}

/// Precision peak divided by the resolution, `(2^b - 1) / r`.
pub fn density_coefficient(bit_depth: u32, resolution: f64) -> Result<f64> {
    if bit_depth == 0 {
        return Err(Error::InvalidParameter("bit depth must be >= 1".into()));
    }
    if resolution.is_nan() || resolution <= 0.0 {
        return Err(Error::ZeroPeak("resolution must be positive"));
    }
    Ok(coordinate_peak(bit_depth) / resolution)
}
