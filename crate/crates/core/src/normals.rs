//! Per-point surface normals from local principal component analysis.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::index::NeighborIndex;
use crate::Point3;

/// Neighborhood size used when normals have to be estimated.
pub const DEFAULT_NORMAL_K: usize = 10;

/// Normal assigned to points whose neighborhood collapses to a single
/// location.
pub const FALLBACK_NORMAL: Point3 = [0.0, 0.0, 1.0];

/// Result of [`estimate_normals`].
#[derive(Debug, Clone)]
pub struct NormalEstimate {
    /// Input cloud with the estimated normals attached.
    pub cloud: PointCloud,
    /// Indices of points whose neighborhood was degenerate; they carry
    /// [`FALLBACK_NORMAL`].
    pub degenerate: Vec<usize>,
}

/// Estimates a unit normal for every point as the least-variance direction
/// of the point together with its `k` nearest neighbors. Orientation is
/// canonical (largest component positive) but not consistent across the
/// surface.
pub fn estimate_normals(cloud: &PointCloud, k: usize) -> Result<NormalEstimate> {
    let index = NeighborIndex::build(cloud)?;
    let (normals, degenerate) = normals_from_index(&index, k, Execution::default())?;
    let cloud = cloud
        .clone()
        .with_normals(normals)
        .expect("estimated normals are unit length");
    Ok(NormalEstimate { cloud, degenerate })
}

/// Normal estimation over an existing index. Returns the normals and the
/// indices of degenerate neighborhoods.
pub fn normals_from_index(
    index: &NeighborIndex,
    k: usize,
    exec: Execution,
) -> Result<(Vec<Point3>, Vec<usize>)> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "normal estimation needs k >= 3, got {k}"
        )));
    }
    if index.len() < k + 1 {
        return Err(Error::TooFewPoints {
            needed: k + 1,
            actual: index.len(),
        });
    }
    let points = index.points();
    let estimates = exec.map(index.len(), |i| {
        let hood = index.knn(points[i], k, Some(i));
        let members = std::iter::once(points[i]).chain(hood.iter().map(|n| points[n.index]));
        pca_normal(members)
    });
    let mut normals = Vec::with_capacity(estimates.len());
    let mut degenerate = Vec::new();
    for (i, n) in estimates.into_iter().enumerate() {
        match n {
            Some(n) => normals.push(n),
            None => {
                normals.push(FALLBACK_NORMAL);
                degenerate.push(i);
            }
        }
    }
    Ok((normals, degenerate))
}

/// Smallest-eigenvalue eigenvector of the covariance of `members`, or `None`
/// when all members coincide.
pub fn pca_normal(members: impl Iterator<Item = Point3> + Clone) -> Option<Point3> {
    let mut count = 0.0;
    let mut mean = [0.0; 3];
    for p in members.clone() {
        count += 1.0;
        for a in 0..3 {
            mean[a] += p[a];
        }
    }
    if count == 0.0 {
        return None;
    }
    for m in &mut mean {
        *m /= count;
    }
    let mut cov = Matrix3::<f64>::zeros();
    for p in members {
        let d = nalgebra::Vector3::new(p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]);
        cov += d * d.transpose();
    }
    cov /= count;
    if cov.trace() <= 0.0 {
        return None;
    }
    let eig = SymmetricEigen::new(cov);
    let smallest = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("three eigenvalues");
    let v = eig.eigenvectors.column(smallest).normalize();
    Some(canonical_sign([v[0], v[1], v[2]]))
}

fn canonical_sign(n: Point3) -> Point3 {
    let dominant = (0..3)
        .max_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()).then(b.cmp(&a)))
        .expect("three components");
    if n[dominant] < 0.0 {
        [-n[0], -n[1], -n[2]]
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{dot, norm};

    fn plane_grid(basis_u: Point3, basis_v: Point3) -> PointCloud {
        let mut pts = Vec::new();
        for i in -6..=6 {
            for j in -6..=6 {
                let (a, b) = (i as f64 * 0.7, j as f64 * 1.3);
                pts.push([
                    a * basis_u[0] + b * basis_v[0],
                    a * basis_u[1] + b * basis_v[1],
                    a * basis_u[2] + b * basis_v[2],
                ]);
            }
        }
        PointCloud::new(pts)
    }

    #[test]
    fn plane_z0() {
        let est = estimate_normals(&plane_grid([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), 10).unwrap();
        assert!(est.degenerate.is_empty());
        for n in est.cloud.normals().unwrap() {
            assert!((n[2].abs() - 1.0).abs() < 1e-6, "{n:?}");
        }
    }

    #[test]
    fn plane_x_plus_y_plus_z() {
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        let u = [1.0 / s2, -1.0 / s2, 0.0];
        let v = [1.0 / s6, 1.0 / s6, -2.0 / s6];
        let est = estimate_normals(&plane_grid(u, v), 10).unwrap();
        let expected = [1.0 / 3f64.sqrt(); 3];
        for n in est.cloud.normals().unwrap() {
            assert!((norm(*n) - 1.0).abs() < 1e-9);
            assert!((dot(*n, expected).abs() - 1.0).abs() < 1e-6, "{n:?}");
            assert!(dot(*n, u).abs() <= 1e-6 && dot(*n, v).abs() <= 1e-6);
        }
    }

    #[test]
    fn coincident_points_are_flagged() {
        let mut pts = vec![[1.0, 1.0, 1.0]; 5];
        pts.extend((0..6).map(|i| [10.0 + i as f64, 3.0 * i as f64, (i * i) as f64]));
        let est = estimate_normals(&PointCloud::new(pts), 3).unwrap();
        assert_eq!(est.degenerate, vec![0, 1, 2, 3, 4]);
        assert_eq!(est.cloud.normals().unwrap()[0], FALLBACK_NORMAL);
    }

    #[test]
    fn preconditions() {
        let c = plane_grid([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(matches!(
            estimate_normals(&c, 2),
            Err(Error::InvalidParameter(_))
        ));
        let small = PointCloud::new(c.points()[..5].to_vec());
        assert!(matches!(
            estimate_normals(&small, 5),
            Err(Error::TooFewPoints {
                needed: 6,
                actual: 5
            })
        ));
    }
}
