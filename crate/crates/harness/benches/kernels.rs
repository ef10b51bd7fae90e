use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use xrsim_core::geometry::{Quat, Vec3};
use xrsim_core::par::{set_exec, Exec};
use xrsim_core::Pose;
use xrsim_metrics::{flip, ssim, DEFAULT_PPD};
use xrsim_visual::{gsw_hologram, render_app, reproject, CameraModel, DepthPoint, HologramProblem};

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn poses() -> (Pose, Pose) {
    let a = Pose::new(Vec3::new(0.0, 0.0, 1.6), Quat::identity());
    let b = Pose::new(
        Vec3::new(0.01, -0.005, 1.6),
        Quat::from_euler_angles(0.0, 0.01, 0.02),
    );
    (a, b)
}

fn bench_visual(c: &mut Criterion) {
    let cam = CameraModel::from_fov(640, 360, 90.0);
    let (render_pose, display_pose) = poses();
    let frame = render_app(7, &render_pose, &cam);

    let mut group = c.benchmark_group("visual_640x360");
    for (name, mode) in MODES {
        set_exec(mode);
        group.bench_function(BenchmarkId::new("render", name), |b| {
            b.iter(|| render_app(7, black_box(&render_pose), &cam))
        });
        group.bench_function(BenchmarkId::new("reproject", name), |b| {
            b.iter(|| reproject(&frame, black_box(&display_pose), &cam))
        });
    }
    group.finish();
    set_exec(Exec::Parallel);
}

fn bench_metrics(c: &mut Criterion) {
    let cam = CameraModel::from_fov(640, 360, 90.0);
    let (a, b) = poses();
    let reference = render_app(7, &a, &cam).image;
    let test = render_app(7, &b, &cam).image;

    let mut group = c.benchmark_group("image_metrics_640x360");
    for (name, mode) in MODES {
        set_exec(mode);
        group.bench_function(BenchmarkId::new("ssim", name), |bch| {
            bch.iter(|| ssim(black_box(&reference), black_box(&test)).unwrap())
        });
        group.bench_function(BenchmarkId::new("flip", name), |bch| {
            bch.iter(|| flip(black_box(&reference), black_box(&test), DEFAULT_PPD).unwrap())
        });
    }
    group.finish();
    set_exec(Exec::Parallel);
}

fn bench_hologram(c: &mut Criterion) {
    let points = vec![
        DepthPoint { x: 40e-6, y: -24e-6, plane: 0, amplitude: 1.0 },
        DepthPoint { x: -56e-6, y: 16e-6, plane: 4, amplitude: 1.0 },
        DepthPoint { x: 8e-6, y: 64e-6, plane: 9, amplitude: 1.0 },
    ];
    let problem = HologramProblem::new(128, 128, points);

    let mut group = c.benchmark_group("gsw_128x128");
    group.sample_size(10);
    for (name, mode) in MODES {
        set_exec(mode);
        group.bench_function(BenchmarkId::new("10_iterations", name), |b| {
            b.iter(|| gsw_hologram(black_box(&problem), 10).unwrap())
        });
    }
    group.finish();
    set_exec(Exec::Parallel);
}

criterion_group!(benches, bench_visual, bench_metrics, bench_hologram);
criterion_main!(benches);
