//! Brute-force oracles and fixture generators shared by the integration
//! tests. Nothing here goes through the kd-tree or the library estimators.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type P3 = [f64; 3];

fn d2(a: P3, b: P3) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}

/// Exhaustive k-NN: (index, squared distance) sorted by distance then index.
pub fn brute_knn(points: &[P3], q: P3, k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, p)| (i, d2(q, *p)))
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

pub fn brute_mnn(points: &[P3]) -> f64 {
    (0..points.len())
        .map(|i| brute_knn(points, points[i], 1, Some(i))[0].1.sqrt())
        .fold(0.0, f64::max)
}

pub fn brute_ann_k(points: &[P3], k: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..points.len() {
        let hood = brute_knn(points, points[i], k, Some(i));
        let mut inner = 0.0;
        for (_, dsq) in hood {
            let d = dsq.sqrt();
            inner += d * d;
        }
        total += inner / k as f64;
    }
    (total / points.len() as f64).sqrt()
}

/// Mean squared tangent-plane distance (no outer root).
pub fn brute_apd_k_mean_square(points: &[P3], normals: &[P3], k: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..points.len() {
        let n = normals[i];
        let mut inner = 0.0;
        for (j, _) in brute_knn(points, points[i], k, Some(i)) {
            let d = [
                points[j][0] - points[i][0],
                points[j][1] - points[i][1],
                points[j][2] - points[i][2],
            ];
            let along = d[0] * n[0] + d[1] * n[1] + d[2] * n[2];
            let pd = [
                d[0] - along * n[0],
                d[1] - along * n[1],
                d[2] - along * n[2],
            ];
            inner += pd[0] * pd[0] + pd[1] * pd[1] + pd[2] * pd[2];
        }
        total += inner / k as f64;
    }
    total / points.len() as f64
}

/// Directional MSE of `a` against `b`; point-to-plane when `b_normals` is set.
pub fn brute_mse(a: &[P3], b: &[P3], b_normals: Option<&[P3]>) -> f64 {
    let mut total = 0.0;
    for &p in a {
        let (j, dsq) = brute_knn(b, p, 1, None)[0];
        total += match b_normals {
            None => dsq,
            Some(n) => {
                let e = [p[0] - b[j][0], p[1] - b[j][1], p[2] - b[j][2]];
                let proj = e[0] * n[j][0] + e[1] * n[j][1] + e[2] * n[j][2];
                proj * proj
            }
        };
    }
    total / a.len() as f64
}

pub fn brute_diagonal(points: &[P3]) -> f64 {
    let mut lo = [f64::MAX; 3];
    let mut hi = [f64::MIN; 3];
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    d2(lo, hi).sqrt()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

pub fn random_points(n: usize, extent: f64, seed: u64) -> Vec<P3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            [
                rng.random::<f64>() * extent,
                rng.random::<f64>() * extent,
                rng.random::<f64>() * extent,
            ]
        })
        .collect()
}

/// Roughly uniform points on the unit sphere (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<P3> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let y = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - y * y).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), y, r * t.sin()]
        })
        .collect()
}

pub fn grid(n: usize, spacing: f64) -> Vec<P3> {
    let mut pts = Vec::with_capacity(n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                pts.push([x as f64 * spacing, y as f64 * spacing, z as f64 * spacing]);
            }
        }
    }
    pts
}

/// Voxels of an 8-bit grid whose center lies within half a voxel of the
/// zero set of `sdf`.
fn voxelize(sdf: impl Fn(f64, f64, f64) -> f64, lo: usize, hi: usize) -> Vec<P3> {
    let mut pts = Vec::new();
    for x in lo..=hi {
        for y in lo..=hi {
            for z in lo..=hi {
                let (fx, fy, fz) = (x as f64, y as f64, z as f64);
                if sdf(fx, fy, fz).abs() <= 0.5 {
                    pts.push([fx, fy, fz]);
                }
            }
        }
    }
    pts
}

pub fn voxel_sphere() -> Vec<P3> {
    voxelize(
        |x, y, z| ((x - 128.0).powi(2) + (y - 128.0).powi(2) + (z - 128.0).powi(2)).sqrt() - 40.0,
        80,
        176,
    )
}

/// Small shell for the quadratic oracles.
pub fn small_voxel_sphere() -> Vec<P3> {
    voxelize(
        |x, y, z| ((x - 64.0).powi(2) + (y - 64.0).powi(2) + (z - 64.0).powi(2)).sqrt() - 11.0,
        50,
        78,
    )
}

pub fn voxel_torus() -> Vec<P3> {
    voxelize(
        |x, y, z| {
            let ring = ((x - 128.0).powi(2) + (y - 128.0).powi(2)).sqrt() - 42.0;
            (ring * ring + (z - 128.0).powi(2)).sqrt() - 14.0
        },
        64,
        192,
    )
}

/// One voxel per column of a smooth height field.
pub fn voxel_terrain() -> Vec<P3> {
    let mut pts = Vec::new();
    for x in 40..200 {
        for y in 40..200 {
            let (fx, fy) = (x as f64, y as f64);
            let z = 128.0 + 12.0 * (fx / 14.0).sin() * (fy / 17.0).cos();
            pts.push([fx, fy, z.round()]);
        }
    }
    pts
}

pub fn shapes() -> Vec<(&'static str, Vec<P3>)> {
    vec![
        ("sphere", voxel_sphere()),
        ("torus", voxel_torus()),
        ("terrain", voxel_terrain()),
    ]
}
