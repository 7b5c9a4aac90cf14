#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use pcqa::degrade::gaussian_jitter;
use pcqa::ply::{read_ply, write_ply, PlyFormat};
use pcqa::{estimate_normals, MetricResult, PointCloud};

fn pcqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcqa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn save(dir: &Path, name: &str, cloud: &PointCloud) -> String {
    let path = dir.join(name);
    let f = std::fs::File::create(&path).unwrap();
    write_ply(
        cloud,
        PlyFormat::BinaryLittleEndian,
        std::io::BufWriter::new(f),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn self_comparison_is_infinite_quality() {
    let dir = tempfile::tempdir().unwrap();
    let a = save(dir.path(), "a.ply", &PointCloud::new(small_voxel_sphere()));
    let out = pcqa(&["compare", "--ref", &a, "--deg", &a, "--format", "jsonl"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: MetricResult = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!(r.infinite_quality && r.psnr_pooled.is_none());
    assert_eq!(r.peak.label(), "ra-apdk");
    let human = pcqa(&["compare", "--ref", &a, "--deg", &a]);
    assert!(stdout(&human).contains("infinite quality"));
}

#[test]
fn jsonl_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let reference = PointCloud::new(small_voxel_sphere());
    let a = save(dir.path(), "a.ply", &reference);
    let b = save(
        dir.path(),
        "b.ply",
        &gaussian_jitter(&reference, 0.8, 2).unwrap(),
    );
    for peak in ["precision", "ld", "mnn", "ann", "annk", "apdk", "apdk-ms"] {
        for extra in [
            &[][..],
            &["--ra"][..],
            &["--pooling", "mpeg-min", "--error", "po2po"][..],
        ] {
            if extra == ["--ra"] && (peak == "precision" || peak == "ld") {
                continue;
            }
            let mut args = vec![
                "compare", "--ref", &a, "--deg", &b, "--peak", peak, "--format", "jsonl",
            ];
            args.extend_from_slice(extra);
            let out = pcqa(&args);
            assert_eq!(out.status.code(), Some(0), "{peak}: {}", stderr(&out));
            let line = stdout(&out);
            let parsed: MetricResult = serde_json::from_str(line.trim()).unwrap();
            assert_eq!(serde_json::to_string(&parsed).unwrap(), line.trim());
        }
    }
}

#[test]
fn exit_codes_partition_failures() {
    let dir = tempfile::tempdir().unwrap();
    let good = save(dir.path(), "good.ply", &PointCloud::new(grid(4, 1.0)));
    let garbage = dir.path().join("garbage.ply");
    std::fs::write(
        &garbage,
        "ply\nformat ascii 1.0\nelement vertex 2\nend_header\n",
    )
    .unwrap();
    let negative = save(
        dir.path(),
        "neg.ply",
        &PointCloud::new(
            grid(4, 1.0)
                .into_iter()
                .map(|p| [p[0] - 2.0, p[1], p[2]])
                .collect(),
        ),
    );
    let collapsed = save(dir.path(), "dot.ply", &PointCloud::new(vec![[1.0; 3]; 12]));
    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (
            vec!["compare", "--ref", &good, "--deg", "/nonexistent.ply"],
            3,
            "io",
        ),
        (
            vec!["compare", "--ref", &good, "--deg", s(&garbage)],
            4,
            "parse",
        ),
        (
            vec![
                "compare",
                "--ref",
                &negative,
                "--deg",
                &good,
                "--peak",
                "precision",
            ],
            2,
            "usage",
        ),
        (
            vec![
                "compare", "--ref", &good, "--deg", &good, "--peak", "ld", "--ra",
            ],
            2,
            "usage",
        ),
        (
            vec![
                "compare", "--ref", &collapsed, "--deg", &good, "--peak", "ld",
            ],
            5,
            "zero-peak",
        ),
        (
            vec![
                "compare", "--ref", &good, "--deg", &good, "--peak", "annk", "--k", "500",
            ],
            6,
            "compute",
        ),
        (
            vec![
                "compare",
                "--ref",
                &good,
                "--deg",
                &good,
                "--bitdepth",
                "99",
            ],
            2,
            "usage",
        ),
        (vec!["compare", "--ref", &good], 2, ""),
    ];
    for (args, code, category) in cases {
        let out = pcqa(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(&format!("error[{category}")) || category.is_empty());
        assert!(stdout(&out).is_empty());
    }
}

#[test]
fn flags_are_checked_before_reading_files() {
    let out = pcqa(&[
        "compare",
        "--ref",
        "/nonexistent.ply",
        "--deg",
        "/nonexistent.ply",
        "--peak",
        "precision",
        "--ra",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = pcqa(&[
        "degrade",
        "--ref",
        "/nonexistent.ply",
        "--gaussian",
        "0",
        "--out",
        "/tmp/x.ply",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--gaussian"));
}

#[test]
fn resolution_examples() {
    let dir = tempfile::tempdir().unwrap();
    let g = save(dir.path(), "grid.ply", &PointCloud::new(grid(5, 1.0)));
    let out = pcqa(&["resolution", "--ref", &g, "--estimator", "ann"]);
    assert!(
        stdout(&out).starts_with("ann 1.000000000 "),
        "{}",
        stdout(&out)
    );

    let value = |path: &str, est: &str| -> f64 {
        let out = pcqa(&[
            "resolution",
            "--ref",
            path,
            "--estimator",
            est,
            "--format",
            "jsonl",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
        v["value"].as_f64().unwrap()
    };
    let random = save(
        dir.path(),
        "r.ply",
        &PointCloud::new(random_points(400, 5.0, 3)),
    );
    assert!(value(&random, "mnn") >= value(&random, "ann"));

    let sphere = PointCloud::new(fibonacci_sphere(800));
    let path = save(dir.path(), "s.ply", &sphere);
    let with = estimate_normals(&sphere, 10).unwrap().cloud;
    let oracle = brute_apd_k_mean_square(with.points(), with.normals().unwrap(), 10).sqrt();
    assert!(rel_err(value(&path, "apdk"), oracle) <= 1e-9);
}

#[test]
fn degrade_examples() {
    let dir = tempfile::tempdir().unwrap();
    let even = PointCloud::new(grid(6, 2.0));
    let src = save(dir.path(), "even.ply", &even);
    let q = dir.path().join("q.ply");
    let out = pcqa(&[
        "degrade",
        "--ref",
        &src,
        "--octree-drop",
        "1",
        "--out",
        s(&q),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let back = read_ply(std::fs::File::open(&q).unwrap()).unwrap();
    assert_eq!(back.points(), even.points());

    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let p = dir.path().join(format!("j{i}.ply"));
            let out = pcqa(&[
                "degrade",
                "--ref",
                &src,
                "--gaussian",
                "0.7",
                "--seed",
                "42",
                "--out",
                s(&p),
            ]);
            assert_eq!(out.status.code(), Some(0));
            std::fs::read(p).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);

    let bad = pcqa(&[
        "degrade",
        "--ref",
        &src,
        "--octree-drop",
        "4",
        "--out",
        s(&q),
    ]);
    assert_eq!(bad.status.code(), Some(2), "{}", stderr(&bad));
}

fn ladder_manifest(dir: &Path, drop: Option<usize>) -> PathBuf {
    let reference = PointCloud::new(small_voxel_sphere());
    save(dir, "ref.ply", &reference);
    let mut rows = String::from("stimulus_id,group,reference,degraded,mos\n");
    for i in 0..8 {
        let sigma = 0.25 * 2f64.powf(i as f64 / 2.0);
        let name = format!("d{i}.ply");
        if Some(i) != drop {
            save(
                dir,
                &name,
                &gaussian_jitter(&reference, sigma, i as u64).unwrap(),
            );
        }
        rows += &format!("s{i},jitter,ref.ply,{name},{}\n", 5.0 - 0.5 * i as f64);
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, rows).unwrap();
    path
}

#[test]
fn benchmark_examples() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = ladder_manifest(dir.path(), None);
    let out_dir = dir.path().join("out");
    let out = pcqa(&[
        "benchmark",
        "--manifest",
        s(&manifest),
        "--metric",
        "all",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("correlation.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 32);
    for row in rows {
        let srocc = row.split(',').nth(6).unwrap();
        assert_eq!(srocc, "1", "{row}");
    }

    let out = pcqa(&[
        "benchmark",
        "--manifest",
        s(&manifest),
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = pcqa(&[
        "benchmark",
        "--manifest",
        s(&manifest),
        "--metric",
        "po2pl:nope",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let missing = tempfile::tempdir().unwrap();
    let manifest = ladder_manifest(missing.path(), Some(3));
    let out = pcqa(&[
        "benchmark",
        "--manifest",
        s(&manifest),
        "--metric",
        "po2pl:apdk:10:ra",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("stimulus s3"), "{}", stderr(&out));
}

#[test]
fn metric_tokens_accept_report_labels() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = ladder_manifest(dir.path(), None);
    let run = |token: &str| {
        let out_dir = dir.path().join(token.replace(':', "_"));
        let out = pcqa(&[
            "benchmark",
            "--manifest",
            s(&manifest),
            "--metric",
            token,
            "--out",
            s(&out_dir),
        ]);
        assert_eq!(out.status.code(), Some(0), "{token}: {}", stderr(&out));
        std::fs::read_to_string(out_dir.join("correlation.csv")).unwrap()
    };
    assert_eq!(run("po2pl:apdk:10:ra"), run("po2pl:ra-apdk"));
    assert_eq!(run("po2po:annk:7"), run("po2po:i-annk:7"));
}
