use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rearrange_core::reactive::navigate_step;
use rearrange_core::scenarios::{packed_world, walled_world, PackedLattice};
use rearrange_core::sensing::local_free_space;
use rearrange_core::world::Scene;
use rearrange_core::{lidar_scan, Drive, NavConfig, NavState, RefPath, Vec2};

fn projection(c: &mut Criterion) {
    let s = walled_world();
    let objects = s.initial_object_positions();
    let scene = Scene::new(&s, &objects, None);
    let x = Vec2::new(9.0, 4.0);
    let scan = lidar_scan(&scene, x, 360).unwrap();
    let lf = local_free_space(&scan, s.robot.radius).unwrap();
    let goal = Vec2::new(16.0, 4.5);
    c.bench_function("project/exact", |b| b.iter(|| lf.project(black_box(goal)).unwrap()));
    c.bench_function("project/dykstra", |b| {
        b.iter(|| lf.project_dykstra(black_box(goal), 1e-10, 100_000).unwrap())
    });
}

fn scanning(c: &mut Criterion) {
    let s = packed_world();
    let objects = s.initial_object_positions();
    let scene = Scene::new(&s, &objects, None);
    let x = PackedLattice::new().hole(2, 2);
    let mut group = c.benchmark_group("lidar_scan");
    for rays in [90, 360, 1440] {
        group.bench_with_input(BenchmarkId::from_parameter(rays), &rays, |b, &n| {
            b.iter(|| lidar_scan(&scene, black_box(x), n).unwrap())
        });
    }
    group.finish();
}

fn navigation(c: &mut Criterion) {
    let s = packed_world();
    let objects = s.initial_object_positions();
    let scene = Scene::new(&s, &objects, None);
    let lat = PackedLattice::new();
    let (a, b) = (lat.hole(0, 0), lat.hole(4, 3));
    let path = RefPath::polyline(&[a, b]).unwrap();
    let x = a + (b - a) * 0.3;
    let scan = lidar_scan(&scene, x, s.params.rays).unwrap();
    let cfg = NavConfig::new(s.params.k, s.epsilon());
    let state = NavState::default();
    c.bench_function("navigate_step/unicycle", |bench| {
        bench.iter(|| navigate_step(&path, black_box(&scan), 0.7, s.robot.radius, &state, &cfg, Drive::Unicycle).unwrap())
    });
    c.bench_function("navigate_step/holonomic", |bench| {
        bench.iter(|| navigate_step(&path, black_box(&scan), 0.7, s.robot.radius, &state, &cfg, Drive::Holonomic).unwrap())
    });
}

criterion_group!(benches, projection, scanning, navigation);
criterion_main!(benches);
