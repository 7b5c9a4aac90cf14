//! Synthetic geometry degradations for building quality ladders.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cloud::{coordinate_peak, PointCloud};
use crate::error::{Error, Result};

/// Adds i.i.d. zero-mean Gaussian noise with standard deviation `sigma` to
/// every coordinate. Normals are dropped.
pub fn gaussian_jitter(cloud: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    cloud.ensure_non_empty()?;
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = cloud
        .points()
        .iter()
        .map(|p| {
            [
                p[0] + normal.sample(&mut rng),
                p[1] + normal.sample(&mut rng),
                p[2] + normal.sample(&mut rng),
            ]
        })
        .collect();
    Ok(PointCloud::new(points))
}

/// Snaps coordinates to the grid of a `bit_depth - bits_dropped` bit octree
/// (step `2^bits_dropped`, expressed in the original units) and removes the
/// points that collapse onto an occupied cell. The first point of each cell
/// is kept, in input order. Normals are dropped.
pub fn octree_quantize(
    cloud: &PointCloud,
    bits_dropped: u32,
    bit_depth: u32,
) -> Result<PointCloud> {
    if bits_dropped < 1 || bits_dropped >= bit_depth {
        return Err(Error::InvalidParameter(format!(
            "bits dropped must satisfy 1 <= d < {bit_depth}, got {bits_dropped}"
        )));
    }
    cloud.ensure_non_empty()?;
    let step = (2f64).powi(bits_dropped as i32);
    let grid_max = (coordinate_peak(bit_depth) / step).floor() * step;
    let mut seen = HashSet::with_capacity(cloud.len());
    let mut points = Vec::new();
    for (index, p) in cloud.points().iter().enumerate() {
        if let Some(&value) = p.iter().find(|v| **v < 0.0) {
            return Err(Error::NegativeCoordinate { index, value });
        }
        let q = p.map(|v| ((v / step).round() * step).min(grid_max));
        if seen.insert(q.map(f64::to_bits)) {
            points.push(q);
        }
    }
    PointCloud::new(points).with_bit_depth(bit_depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PointCloud {
        PointCloud::new(
            (0..100)
                .map(|i| {
                    [
                        (i % 7) as f64 * 2.0,
                        (i % 11) as f64 * 2.0,
                        (i / 10) as f64 * 2.0,
                    ]
                })
                .collect(),
        )
    }

    #[test]
    fn sigma_must_be_positive() {
        assert!(gaussian_jitter(&sample(), 0.0, 1).is_err());
        assert!(gaussian_jitter(&sample(), -1.0, 1).is_err());
        assert!(gaussian_jitter(&sample(), f64::NAN, 1).is_err());
    }

    #[test]
    fn jitter_is_seeded() {
        let a = gaussian_jitter(&sample(), 1.0, 42).unwrap();
        let b = gaussian_jitter(&sample(), 1.0, 42).unwrap();
        let c = gaussian_jitter(&sample(), 1.0, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn even_cloud_survives_one_dropped_bit() {
        let c = sample();
        let q = octree_quantize(&c, 1, 8).unwrap();
        let mut expected: Vec<_> = c.points().to_vec();
        let mut seen = HashSet::new();
        expected.retain(|p| seen.insert(p.map(f64::to_bits)));
        assert_eq!(q.points(), expected.as_slice());
    }

    #[test]
    fn quantization_merges_and_clamps() {
        let c = PointCloud::new(vec![
            [1.0, 1.0, 1.0],
            [2.0, 2.0, 2.0],
            [255.0, 0.0, 0.0],
            [3.0, 0.0, 0.0],
        ]);
        let q = octree_quantize(&c, 2, 8).unwrap();
        // Step 4: (1,1,1)->(0,0,0); (2,2,2)->(4,4,4); 255 clamps to 252; 3->4.
        assert_eq!(
            q.points(),
            &[
                [0.0, 0.0, 0.0],
                [4.0, 4.0, 4.0],
                [252.0, 0.0, 0.0],
                [4.0, 0.0, 0.0]
            ]
        );
        let merged =
            octree_quantize(&PointCloud::new(vec![[1.0; 3], [0.5; 3], [9.0; 3]]), 2, 8).unwrap();
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn quantization_parameter_bounds() {
        assert!(octree_quantize(&sample(), 0, 8).is_err());
        assert!(octree_quantize(&sample(), 8, 8).is_err());
        assert!(octree_quantize(&PointCloud::new(vec![[-1.0, 0.0, 0.0]]), 1, 8).is_err());
    }
}
