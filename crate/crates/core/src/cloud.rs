//! The point cloud container and coordinate precision helpers.

use crate::error::{Error, Result};
use crate::Point3;

const UNIT_TOLERANCE: f64 = 1e-9;

/// Ordered set of 3D points with optional unit normals and a coordinate
/// bit depth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point3>,
    normals: Option<Vec<Point3>>,
    bit_depth: Option<u32>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self {
            points,
            normals: None,
            bit_depth: None,
        }
    }

    /// Attaches normals. Each must already have unit length.
    pub fn with_normals(mut self, normals: Vec<Point3>) -> Result<Self> {
        validate_normals(&self.points, &normals)?;
        self.normals = Some(normals);
        Ok(self)
    }

    /// Declares the coordinate precision. Every coordinate must lie in
    /// `[0, 2^b - 1]`.
    pub fn with_bit_depth(mut self, bit_depth: u32) -> Result<Self> {
        if bit_depth == 0 || bit_depth > 52 {
            return Err(Error::InvalidParameter(format!(
                "bit depth {bit_depth} outside 1..=52"
            )));
        }
        let peak = coordinate_peak(bit_depth);
        for (i, p) in self.points.iter().enumerate() {
            if let Some(&v) = p.iter().find(|&&v| !(0.0..=peak).contains(&v)) {
                return Err(Error::InvalidParameter(format!(
                    "coordinate {v} of point {i} outside [0, {peak}] for {bit_depth}-bit precision"
                )));
            }
        }
        self.bit_depth = Some(bit_depth);
        Ok(self)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Point3]> {
        self.normals.as_deref()
    }

    pub fn bit_depth(&self) -> Option<u32> {
        self.bit_depth
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn without_normals(mut self) -> Self {
        self.normals = None;
        self
    }

    /// Splits the cloud into its parts.
    pub fn into_parts(self) -> (Vec<Point3>, Option<Vec<Point3>>, Option<u32>) {
        (self.points, self.normals, self.bit_depth)
    }

    pub(crate) fn ensure_non_empty(&self) -> Result<()> {
        if self.points.is_empty() {
            Err(Error::EmptyCloud)
        } else {
            Ok(())
        }
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounding_box(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        Some(
            self.points
                .iter()
                .fold((first, first), |(mut lo, mut hi), p| {
                    for a in 0..3 {
                        lo[a] = lo[a].min(p[a]);
                        hi[a] = hi[a].max(p[a]);
                    }
                    (lo, hi)
                }),
        )
    }
}

fn validate_normals(points: &[Point3], normals: &[Point3]) -> Result<()> {
    if normals.len() != points.len() {
        return Err(Error::NormalCountMismatch {
            points: points.len(),
            normals: normals.len(),
        });
    }
    for (index, n) in normals.iter().enumerate() {
        let norm = crate::geom::norm(*n);
        if (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitNormal { index, norm });
        }
    }
    Ok(())
}

/// Largest representable coordinate for `bit_depth` bits, `2^b - 1`.
pub fn coordinate_peak(bit_depth: u32) -> f64 {
    (2f64).powi(bit_depth as i32) - 1.0
}

/// Smallest `b >= 1` such that every coordinate is at most `2^b - 1`.
pub fn infer_bit_depth(cloud: &PointCloud) -> Result<u32> {
    cloud.ensure_non_empty()?;
    let mut max = 0.0f64;
    for (index, p) in cloud.points.iter().enumerate() {
        for &v in p {
            if v < 0.0 || v.is_nan() {
                return Err(Error::NegativeCoordinate { index, value: v });
            }
            max = max.max(v);
        }
    }
    let mut b = 1u32;
    while coordinate_peak(b) < max {
        b += 1;
        if b > 1024 {
            return Err(Error::InvalidParameter(format!(
                "coordinate {max} is not representable with a finite bit depth"
            )));
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud_with_max(v: f64) -> PointCloud {
        PointCloud::new(vec![[0.0, 0.0, 0.0], [v, 0.5, 1.0]])
    }

    #[test]
    fn bit_depth_examples() {
        assert_eq!(infer_bit_depth(&cloud_with_max(1023.0)).unwrap(), 10);
        assert_eq!(infer_bit_depth(&cloud_with_max(1024.0)).unwrap(), 11);
        let origin = PointCloud::new(vec![[0.0; 3]]);
        assert_eq!(infer_bit_depth(&origin).unwrap(), 1);
    }

    #[test]
    fn bit_depth_rejects_negative() {
        let c = PointCloud::new(vec![[1.0, -0.5, 2.0]]);
        assert!(matches!(
            infer_bit_depth(&c),
            Err(Error::NegativeCoordinate { index: 0, .. })
        ));
    }

    // Holds for integer (voxelized) coordinates.
    #[test]
    fn doubling_adds_one_bit() {
        for max in [1.0, 3.0, 7.0, 8.0, 100.0, 1023.0, 4000.0] {
            let c = cloud_with_max(max);
            let doubled = PointCloud::new(
                c.points()
                    .iter()
                    .map(|p| [p[0] * 2.0, p[1] * 2.0, p[2] * 2.0])
                    .collect(),
            );
            assert_eq!(
                infer_bit_depth(&doubled).unwrap(),
                infer_bit_depth(&c).unwrap() + 1,
                "max {max}"
            );
        }
    }

    #[test]
    fn normals_must_be_unit_and_match() {
        let pts = vec![[0.0; 3], [1.0, 0.0, 0.0]];
        assert!(PointCloud::new(pts.clone())
            .with_normals(vec![[0.0, 0.0, 1.0]])
            .is_err());
        assert!(matches!(
            PointCloud::new(pts.clone()).with_normals(vec![[0.0, 0.0, 1.0], [0.0, 2.0, 0.0]]),
            Err(Error::NonUnitNormal { index: 1, .. })
        ));
        assert!(PointCloud::new(pts)
            .with_normals(vec![[0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
            .is_ok());
    }

    #[test]
    fn declared_bit_depth_bounds_coordinates() {
        assert!(cloud_with_max(1023.0).with_bit_depth(10).is_ok());
        assert!(cloud_with_max(1024.0).with_bit_depth(10).is_err());
    }
}
