//! Sequential vs parallel execution of the per-point loops.

#[path = "../tests/common/mod.rs"]
mod common;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pcqa::degrade::gaussian_jitter;
use pcqa::exec::Execution;
use pcqa::metrics::resolution::{ann_k_with, apd_k_mean_square_with};
use pcqa::metrics::{mse_against_index, ErrorKind};
use pcqa::normals::normals_from_index;
use pcqa::{NeighborIndex, PointCloud};

fn modes() -> Vec<(&'static str, Execution)> {
    let mut m = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        m.push(("parallel", Execution::Parallel));
    }
    m
}

fn per_point_loops(c: &mut Criterion) {
    let reference = PointCloud::new(common::voxel_torus());
    let degraded = gaussian_jitter(&reference, 1.0, 1).unwrap();
    let ref_index = NeighborIndex::build(&reference).unwrap();
    let deg_index = NeighborIndex::build(&degraded).unwrap();
    let (normals, _) = normals_from_index(&ref_index, 10, Execution::Sequential).unwrap();

    let mut group = c.benchmark_group(format!("torus_{}_points", reference.len()));
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::new("normals", name), &exec, |b, &exec| {
            b.iter(|| normals_from_index(&ref_index, 10, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("ann_k", name), &exec, |b, &exec| {
            b.iter(|| ann_k_with(&ref_index, 10, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("apd_k", name), &exec, |b, &exec| {
            b.iter(|| apd_k_mean_square_with(&ref_index, &normals, 10, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("mse_po2pl", name), &exec, |b, &exec| {
            b.iter(|| {
                mse_against_index(
                    deg_index.points(),
                    &ref_index,
                    Some(&normals),
                    ErrorKind::Po2Pl,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, per_point_loops);
criterion_main!(benches);
