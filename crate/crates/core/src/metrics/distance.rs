//! Point-to-point and point-to-plane errors between two clouds.

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::exec::{ordered_sum, Execution};
use crate::geom::{dot, norm_sq, sub};
use crate::index::NeighborIndex;
use crate::Point3;

/// How the error between a point and its nearest neighbor is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorKind {
    /// Squared length of the error vector (D1).
    #[serde(rename = "po2po")]
    Po2Po,
    /// Squared projection of the error vector on the target normal (D2).
    #[serde(rename = "po2pl")]
    Po2Pl,
}

impl ErrorKind {
    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::Po2Po => "po2po",
            ErrorKind::Po2Pl => "po2pl",
        }
    }
}

/// Squared error of `point` against `target` (with normal `target_normal`
/// for point-to-plane).
#[inline]
pub fn squared_error(
    kind: ErrorKind,
    point: Point3,
    target: Point3,
    target_normal: Option<Point3>,
) -> f64 {
    let e = sub(point, target);
    match kind {
        ErrorKind::Po2Po => norm_sq(e),
        ErrorKind::Po2Pl => {
            let n = target_normal.expect("point-to-plane needs a normal");
            let p = dot(e, n);
            p * p
        }
    }
}

/// Per-point squared errors of `from` against the cloud indexed by `to`.
pub fn squared_errors(
    from: &[Point3],
    to: &NeighborIndex,
    to_normals: Option<&[Point3]>,
    kind: ErrorKind,
    exec: Execution,
) -> Result<Vec<f64>> {
    if from.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if kind == ErrorKind::Po2Pl {
        match to_normals {
            None => return Err(Error::MissingNormals),
            Some(n) if n.len() != to.len() => {
                return Err(Error::NormalCountMismatch {
                    points: to.len(),
                    normals: n.len(),
                })
            }
            Some(_) => {}
        }
    }
    let targets = to.points();
    exec.try_map(from.len(), |i| {
        let hit = to.nearest(from[i], None)?;
        let normal = to_normals.map(|n| n[hit.index]);
        Ok(squared_error(kind, from[i], targets[hit.index], normal))
    })
}

/// Mean squared error from every point of `from` to its nearest neighbor in
/// the indexed cloud.
pub fn mse_against_index(
    from: &[Point3],
    to: &NeighborIndex,
    to_normals: Option<&[Point3]>,
    kind: ErrorKind,
    exec: Execution,
) -> Result<f64> {
    let errors = squared_errors(from, to, to_normals, kind, exec)?;
    Ok(ordered_sum(&errors) / errors.len() as f64)
}

/// Directional MSE of `a` measured against `b`. Point-to-plane uses the
/// normals stored on `b`.
pub fn directional_mse(a: &PointCloud, b: &PointCloud, kind: ErrorKind) -> Result<f64> {
    a.ensure_non_empty()?;
    let index = NeighborIndex::build(b)?;
    mse_against_index(a.points(), &index, b.normals(), kind, Execution::default())
}
