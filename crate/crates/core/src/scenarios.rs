//! Built-in scenario generators used by the examples, the CLI and the tests.

use crate::geometry::Vec2;
use crate::world::{MovableObject, Obstacle, Params, RobotSpec, Scenario, Shape, Workspace};

pub const ROBOT_RADIUS: f64 = 0.25;
pub const OBJECT_RADIUS: f64 = 0.3;
pub const LIDAR_RANGE: f64 = 4.0;

/// Separation margin above the minimum the packed world is built with.
pub const PACKED_MARGIN: f64 = 0.05;
const PACKED_DISK: f64 = 1.0;

/// Hexagonal lattice of unit-ish disks in a 20 m square, with every pair of
/// neighbours and every disk-boundary gap at exactly `2 (r + ρ) + 0.05`.
pub struct PackedLattice {
    pub origin: f64,
    pub spacing: f64,
    pub row_height: f64,
}

impl PackedLattice {
    pub fn new() -> Self {
        let sep = 2.0 * (ROBOT_RADIUS + OBJECT_RADIUS) + PACKED_MARGIN;
        let spacing = 2.0 * PACKED_DISK + sep;
        PackedLattice {
            origin: PACKED_DISK + sep,
            spacing,
            row_height: spacing * 0.75f64.sqrt(),
        }
    }

    pub fn center(&self, row: usize, col: usize) -> Vec2 {
        let shift = if row % 2 == 1 { 0.5 * self.spacing } else { 0.0 };
        Vec2::new(
            self.origin + shift + col as f64 * self.spacing,
            self.origin + row as f64 * self.row_height,
        )
    }

    /// Centroid of the upward triangle with base `(row, col)`, `(row, col+1)`
    /// on an even row. The largest hole in the lattice.
    pub fn hole(&self, row: usize, col: usize) -> Vec2 {
        let a = self.center(row, col);
        let b = self.center(row, col + 1);
        let c = self.center(row + 1, if row.is_multiple_of(2) { col } else { col + 1 });
        (a + b + c) * (1.0 / 3.0)
    }
}

impl Default for PackedLattice {
    fn default() -> Self {
        Self::new()
    }
}

/// 20 m × 20 m workspace packed with disks, one object to carry across it.
/// All obstacles are unknown to the planner.
pub fn packed_world() -> Scenario {
    let size = 20.0;
    let lat = PackedLattice::new();
    let sep = lat.spacing - 2.0 * PACKED_DISK;
    let mut obstacles = Vec::new();
    for row in 0..16 {
        for col in 0..16 {
            let c = lat.center(row, col);
            if c.x + PACKED_DISK + sep <= size + 1e-9 && c.y + PACKED_DISK + sep <= size + 1e-9 {
                obstacles.push(Obstacle::disk(obstacles.len() as u32 + 1, c, PACKED_DISK));
            }
        }
    }
    Scenario::new(
        "packed",
        Workspace::rectangle(0.0, 0.0, size, size),
        obstacles,
        vec![MovableObject {
            id: 1,
            center: lat.hole(2, 1),
            radius: OBJECT_RADIUS,
            goal: lat.hole(4, 3),
        }],
        RobotSpec {
            start: lat.hole(0, 0),
            heading: 0.0,
            radius: ROBOT_RADIUS,
            lidar_range: LIDAR_RANGE,
        },
        Params::default(),
    )
    .expect("packed world is well formed")
}

fn regular_polygon(center: Vec2, radius: f64, sides: usize, phase: f64) -> Shape {
    let vertices = (0..sides)
        .map(|i| center + Vec2::from_angle(phase + std::f64::consts::TAU * i as f64 / sides as f64) * radius)
        .collect();
    Shape::Polygon { vertices }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Vec2> {
    vec![
        Vec2::new(x0, y0),
        Vec2::new(x1, y0),
        Vec2::new(x1, y1),
        Vec2::new(x0, y1),
    ]
}

/// Non-convex workspace with a known interior wall, unknown disk and
/// polygonal obstacles, two objects and a nest to return to.
pub fn walled_world() -> Scenario {
    let workspace = Workspace::new(vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(18.0, 0.0),
        Vec2::new(18.0, 12.0),
        Vec2::new(10.0, 12.0),
        Vec2::new(10.0, 9.0),
        Vec2::new(8.0, 9.0),
        Vec2::new(8.0, 12.0),
        Vec2::new(0.0, 12.0),
    ])
    .expect("valid workspace");
    let known = |id, v| Obstacle::new(id, Shape::Polygon { vertices: v }, true).expect("convex wall");
    let unknown = |id, shape| Obstacle::new(id, shape, false).expect("convex obstacle");
    let obstacles = vec![
        known(1, rect(11.0, 1.5, 11.6, 6.5)),
        unknown(2, regular_polygon(Vec2::new(6.0, 2.6), 0.8, 5, 0.3)),
        unknown(3, regular_polygon(Vec2::new(14.2, 4.2), 0.9, 4, 0.0)),
        unknown(4, regular_polygon(Vec2::new(4.5, 7.5), 0.8, 3, 0.5)),
        unknown(5, Shape::Disk {
            center: Vec2::new(14.5, 9.0),
            radius: 0.7,
        }),
    ];
    Scenario::new(
        "walled",
        workspace,
        obstacles,
        vec![
            MovableObject {
                id: 1,
                center: Vec2::new(2.5, 2.5),
                radius: OBJECT_RADIUS,
                goal: Vec2::new(15.5, 2.0),
            },
            MovableObject {
                id: 2,
                center: Vec2::new(16.5, 10.0),
                radius: 0.25,
                goal: Vec2::new(2.0, 10.0),
            },
        ],
        RobotSpec {
            start: Vec2::new(1.5, 5.0),
            heading: 0.0,
            radius: ROBOT_RADIUS,
            lidar_range: LIDAR_RANGE,
        },
        Params {
            nest: Some(Vec2::new(9.0, 6.0)),
            ..Params::default()
        },
    )
    .expect("walled world is well formed")
}

/// A single unknown obstacle in an empty 20 m square centred at the origin;
/// the robot is asked to move from `start` to `goal`.
pub fn single_obstacle_world(shape: Shape, start: Vec2, goal: Vec2, eps: f64) -> Scenario {
    Scenario::new(
        "single",
        Workspace::rectangle(-10.0, -10.0, 10.0, 10.0),
        vec![Obstacle::new(1, shape, false).expect("convex obstacle")],
        Vec::new(),
        RobotSpec {
            start,
            heading: (goal - start).angle(),
            radius: ROBOT_RADIUS,
            lidar_range: LIDAR_RANGE,
        },
        Params {
            eps: Some(eps),
            nest: Some(goal),
            ..Params::default()
        },
    )
    .expect("single-obstacle world is well formed")
}

/// Overlapping disks forming a non-convex pocket across the path, closer
/// together than the separation assumption allows.
pub fn overlap_world() -> Scenario {
    let mut obstacles = Vec::new();
    let mut push = |c: Vec2, r: f64| obstacles.push(Obstacle::disk(obstacles.len() as u32 + 1, c, r));
    for i in 0..5 {
        push(Vec2::new(2.0, -2.0 + i as f64), 0.7);
    }
    push(Vec2::new(1.0, 2.0), 0.7);
    push(Vec2::new(1.0, -2.0), 0.7);
    push(Vec2::new(5.0, 1.2), 0.6);
    push(Vec2::new(5.0, -1.2), 0.6);
    Scenario::new(
        "overlap",
        Workspace::rectangle(-8.0, -8.0, 10.0, 8.0),
        obstacles,
        vec![MovableObject {
            id: 1,
            center: Vec2::new(-3.0, 0.0),
            radius: OBJECT_RADIUS,
            goal: Vec2::new(7.5, 0.0),
        }],
        RobotSpec {
            start: Vec2::new(-6.0, 0.5),
            heading: 0.0,
            radius: ROBOT_RADIUS,
            lidar_range: LIDAR_RANGE,
        },
        Params {
            eps: Some(0.1),
            max_steps: 60_000,
            ..Params::default()
        },
    )
    .expect("overlap world is well formed")
}
