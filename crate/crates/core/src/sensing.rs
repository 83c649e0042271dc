//! Simulated LIDAR and the convex local free space derived from it.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geometry::{ConvexRegion, Disk, HalfPlane, Vec2};
use crate::world::{ray_circle, ray_segment, Scene};

/// Penetrations shallower than this are treated as contact.
pub const CONTACT_TOL: f64 = 1e-9;

/// Chords used to stand in for the bounding disk when a region would need
/// two disks.
const DISK_CHORDS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensingError {
    #[error("sensor origin ({0}, {1}) lies outside the workspace")]
    OutsideWorkspace(f64, f64),
    #[error("body penetrates the sensed boundary (clearance {0})")]
    Degenerate(f64),
    #[error("clearance {d} is not inside the wall-following band {eps}")]
    NotInDangerZone { d: f64, eps: f64 },
}

/// Bearing of ray `j` out of `n`: `−π + (j + 1) 2π / n`, in `(−π, π]`.
///
/// Written so that ray `2j + 1` of a `2n` scan has bit-identical bearing to
/// ray `j` of an `n` scan.
#[inline]
pub fn ray_angle(j: usize, n: usize) -> f64 {
    PI * (2 * (j + 1)) as f64 / n as f64 - PI
}

/// Polar range scan around `origin`, one range per uniformly spaced bearing.
#[derive(Debug, Clone, PartialEq)]
pub struct Scan {
    pub origin: Vec2,
    /// Effective maximum range.
    pub range: f64,
    pub ranges: Vec<f64>,
}

impl Scan {
    /// All rays at maximum range.
    pub fn open(origin: Vec2, range: f64, rays: usize) -> Self {
        Scan {
            origin,
            range,
            ranges: vec![range; rays],
        }
    }

    pub fn rays(&self) -> usize {
        self.ranges.len()
    }

    pub fn angle(&self, j: usize) -> f64 {
        ray_angle(j, self.ranges.len())
    }

    pub fn direction(&self, j: usize) -> Vec2 {
        Vec2::from_angle(self.angle(j))
    }

    /// Index of the shortest ray (first one on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (j, &r) in self.ranges.iter().enumerate() {
            if r < self.ranges[best] {
                best = j;
            }
        }
        best
    }

    pub fn min_range(&self) -> f64 {
        self.ranges[self.argmin()]
    }

    /// Sample point of ray `j`.
    pub fn point(&self, j: usize) -> Vec2 {
        self.origin + self.direction(j) * self.ranges[j]
    }
}

/// Casts `rays` rays from `x` against the workspace boundary, obstacles and
/// the visible objects of the scene, clipping at the LIDAR range.
pub fn lidar_scan(scene: &Scene<'_>, x: Vec2, rays: usize) -> Result<Scan, SensingError> {
    let s = scene.scenario;
    if !s.workspace.contains(x) {
        return Err(SensingError::OutsideWorkspace(x.x, x.y));
    }
    let range = s.robot.lidar_range;
    let edges: Vec<(Vec2, Vec2)> = s.workspace.edges().collect();
    let near_obstacles: Vec<_> = s
        .obstacles
        .iter()
        .filter(|o| {
            let (c, r) = o.bounding_circle();
            x.distance(c) - r <= range
        })
        .collect();
    let near_objects: Vec<(Vec2, f64)> = scene
        .visible_objects()
        .filter(|&(_, c, r)| x.distance(c) - r <= range)
        .map(|(_, c, r)| (c, r))
        .collect();
    let ranges = (0..rays)
        .map(|j| {
            let dir = Vec2::from_angle(ray_angle(j, rays));
            let mut best = range;
            for &(a, b) in &edges {
                if let Some(t) = ray_segment(x, dir, a, b) {
                    best = best.min(t);
                }
            }
            for o in &near_obstacles {
                let (c, r) = o.bounding_circle();
                match ray_circle(x, dir, c, r) {
                    Some(t) if t < best => {}
                    _ => continue,
                }
                if let Some(t) = o.shape.ray_hit(x, dir) {
                    best = best.min(t);
                }
            }
            for &(c, r) in &near_objects {
                if let Some(t) = ray_circle(x, dir, c, r) {
                    best = best.min(t);
                }
            }
            best.clamp(0.0, range)
        })
        .collect();
    Ok(Scan {
        origin: x,
        range,
        ranges,
    })
}

/// `min ρ − body_radius`; negative values signal penetration.
pub fn boundary_distance(scan: &Scan, body_radius: f64) -> f64 {
    scan.min_range() - body_radius
}

/// Re-expresses a scan taken at `scan.origin` from the center of the disk
/// circumscribing robot and grasped object, `origin + ρ_i (cos ψ, sin ψ)`.
///
/// Every sample point is re-ranged from the new center and binned onto the
/// uniform bearing grid, contributing to the two grid bearings around its
/// new bearing; each bin keeps its minimum. Empty bins take the smaller of
/// their nearest filled neighbors.
pub fn recenter_scan(scan: &Scan, heading: f64, object_radius: f64) -> Scan {
    let n = scan.rays();
    let center = scan.origin + Vec2::from_angle(heading) * object_radius;
    let range = scan.range - object_radius;
    let step = 2.0 * PI / n as f64;
    let mut bins = vec![f64::INFINITY; n];
    for j in 0..n {
        let p = scan.point(j);
        let w = p - center;
        let dist = w.norm().min(range);
        let bearing = if w.norm() > 0.0 { w.angle() } else { scan.angle(j) };
        let f = (bearing + PI) / step - 1.0;
        let nearest = f.round();
        let idx = |k: f64| (k as i64).rem_euclid(n as i64) as usize;
        if (f - nearest).abs() < 1e-9 {
            let b = idx(nearest);
            bins[b] = bins[b].min(dist);
        } else {
            for k in [f.floor(), f.ceil()] {
                let b = idx(k);
                bins[b] = bins[b].min(dist);
            }
        }
    }
    let filled = bins.clone();
    for j in 0..n {
        if filled[j].is_finite() {
            continue;
        }
        let mut fill = f64::INFINITY;
        for dir in [1, n - 1] {
            let mut k = j;
            for _ in 0..n {
                k = (k + dir) % n;
                if filled[k].is_finite() {
                    fill = fill.min(filled[k]);
                    break;
                }
            }
        }
        bins[j] = if fill.is_finite() { fill } else { range };
    }
    for b in &mut bins {
        *b = b.clamp(0.0, range);
    }
    Scan {
        origin: center,
        range,
        ranges: bins,
    }
}

/// Convex local free space of a body of radius `body_radius` at the scan
/// origin: one half-plane per sensed ray, at the midpoint of the eroded
/// range, intersected with the disk of radius `½ (R − body_radius)`.
pub fn local_free_space(scan: &Scan, body_radius: f64) -> Result<ConvexRegion, SensingError> {
    let d = boundary_distance(scan, body_radius);
    if d < -CONTACT_TOL {
        return Err(SensingError::Degenerate(d));
    }
    let x = scan.origin;
    let halfplanes = scan
        .ranges
        .iter()
        .enumerate()
        .filter(|(_, &r)| r < scan.range)
        .map(|(j, &r)| {
            let u = scan.direction(j);
            let offset = (0.5 * (r - body_radius)).max(0.0);
            HalfPlane {
                normal: -u,
                anchor: x + u * offset,
            }
        })
        .collect();
    Ok(ConvexRegion::new(
        halfplanes,
        Some(Disk::new(x, 0.5 * (scan.range - body_radius))),
    ))
}

/// Local frame of the nearest sensed boundary point, used while following
/// a wall.
#[derive(Debug, Clone, PartialEq)]
pub struct WallFrame {
    /// `𝓛𝓕 ∩ disk(offset, ε)`.
    pub region: ConvexRegion,
    /// Unit normal pointing away from the wall.
    pub normal: Vec2,
    /// `J n`, the counter-clockwise tangent.
    pub tangent: Vec2,
    /// Robot position pushed onto the wall's eroded boundary.
    pub offset: Vec2,
    /// Index of the shortest ray.
    pub ray: usize,
    pub clearance: f64,
}

/// Wall-following local free space for a body inside the band `0 ≤ d < ε`.
pub fn wall_following_free_space(
    scan: &Scan,
    body_radius: f64,
    eps: f64,
) -> Result<WallFrame, SensingError> {
    let d = boundary_distance(scan, body_radius);
    if d >= eps {
        return Err(SensingError::NotInDangerZone { d, eps });
    }
    let lf = local_free_space(scan, body_radius)?;
    let m = scan.argmin();
    let normal = -scan.direction(m);
    let tangent = normal.perp();
    let offset = scan.origin - normal * d.max(0.0);
    let region = intersect_disk(lf, Disk::new(offset, eps));
    Ok(WallFrame {
        region,
        normal,
        tangent,
        offset,
        ray: m,
        clearance: d,
    })
}

/// Adds a second disk constraint. When the new disk fits inside the
/// existing one the old disk is redundant; otherwise the old disk is
/// replaced by an inscribed polygon, which keeps the result conservative.
fn intersect_disk(mut region: ConvexRegion, disk: Disk) -> ConvexRegion {
    if let Some(old) = region.disk {
        let fits = disk.center.distance(old.center) + disk.radius <= old.radius;
        if !fits {
            let half = PI / DISK_CHORDS as f64;
            let inset = old.radius * half.cos();
            for i in 0..DISK_CHORDS {
                let u = Vec2::from_angle(2.0 * half * i as f64);
                region.halfplanes.push(HalfPlane {
                    normal: -u,
                    anchor: old.center + u * inset,
                });
            }
        }
    }
    region.disk = Some(disk);
    region
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Obstacle, Params, RobotSpec, Scenario, Workspace};

    fn scenario(obstacles: Vec<Obstacle>) -> Scenario {
        Scenario::new(
            "t",
            Workspace::rectangle(-10.0, -10.0, 10.0, 10.0),
            obstacles,
            vec![],
            RobotSpec {
                start: Vec2::ZERO,
                heading: 0.0,
                radius: 0.25,
                lidar_range: 5.0,
            },
            Params::default(),
        )
        .unwrap()
    }

    #[test]
    fn empty_square_all_max_range() {
        let s = scenario(vec![]);
        let scan = lidar_scan(&Scene::new(&s, &[], None), Vec2::ZERO, 360).unwrap();
        assert!(scan.ranges.iter().all(|&r| r == 5.0));
        assert!((boundary_distance(&scan, 0.25) - 4.75).abs() < 1e-12);
    }

    #[test]
    fn disk_hit_on_axis() {
        let s = scenario(vec![Obstacle::disk(1, Vec2::new(2.0, 0.0), 0.5)]);
        let scan = lidar_scan(&Scene::new(&s, &[], None), Vec2::ZERO, 360).unwrap();
        // Ray 179 of 360 points along +x.
        assert_eq!(scan.angle(179), 0.0);
        assert!((scan.ranges[179] - 1.5).abs() < 1e-12);
        assert!((boundary_distance(&scan, 0.25) - 1.25).abs() < 1e-12);
    }

    #[test]
    fn outside_workspace_rejected() {
        let s = scenario(vec![]);
        assert!(matches!(
            lidar_scan(&Scene::new(&s, &[], None), Vec2::new(11.0, 0.0), 36),
            Err(SensingError::OutsideWorkspace(..))
        ));
    }

    #[test]
    fn bearings_refine_exactly() {
        for j in 0..90 {
            assert_eq!(ray_angle(j, 90), ray_angle(2 * j + 1, 180));
        }
        assert_eq!(ray_angle(359, 360), PI);
    }

    #[test]
    fn recenter_hand_examples() {
        let n = 360;
        let mut scan = Scan::open(Vec2::ZERO, 5.0, n);
        scan.ranges[179] = 2.0; // point (2, 0)
        scan.ranges[359] = 1.0; // point (-1, 0)
        let r = recenter_scan(&scan, 0.0, 0.5);
        assert_eq!(r.origin, Vec2::new(0.5, 0.0));
        assert_eq!(r.range, 4.5);
        assert!((r.ranges[179] - 1.5).abs() < 1e-12);
        assert!((r.ranges[359] - 1.5).abs() < 1e-12);
        let open = recenter_scan(&Scan::open(Vec2::ZERO, 5.0, n), 1.0, 0.5);
        assert!(open.ranges.iter().all(|&v| (v - 4.5).abs() < 1e-12));
    }

    #[test]
    fn recenter_zero_radius_is_identity() {
        let s = scenario(vec![
            Obstacle::disk(1, Vec2::new(2.0, 0.3), 0.5),
            Obstacle::polygon(
                2,
                vec![Vec2::new(-3.0, -1.0), Vec2::new(-2.0, -1.0), Vec2::new(-2.5, 1.0)],
            )
            .unwrap(),
        ]);
        let scan = lidar_scan(&Scene::new(&s, &[], None), Vec2::new(0.1, -0.2), 360).unwrap();
        let r = recenter_scan(&scan, 0.7, 0.0);
        for (a, b) in scan.ranges.iter().zip(&r.ranges) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn free_space_without_obstacles_is_disk() {
        let scan = Scan::open(Vec2::new(1.0, 1.0), 5.0, 72);
        let lf = local_free_space(&scan, 0.25).unwrap();
        assert!(lf.halfplanes.is_empty());
        assert_eq!(lf.disk.unwrap().radius, 2.375);
    }

    #[test]
    fn free_space_half_distance_property() {
        let mut scan = Scan::open(Vec2::ZERO, 5.0, 360);
        scan.ranges[100] = 1.2;
        let lf = local_free_space(&scan, 0.25).unwrap();
        assert!((lf.interior_distance(Vec2::ZERO) - 0.475).abs() < 1e-9);
    }

    #[test]
    fn wall_frame_hand_example() {
        let mut scan = Scan::open(Vec2::ZERO, 5.0, 360);
        scan.ranges[359] = 0.3; // bearing π
        let wf = wall_following_free_space(&scan, 0.25, 0.1).unwrap();
        assert!((wf.normal - Vec2::new(1.0, 0.0)).norm() < 1e-12);
        assert!((wf.tangent - Vec2::new(0.0, 1.0)).norm() < 1e-12);
        assert!((wf.offset - Vec2::new(-0.05, 0.0)).norm() < 1e-12);
        assert!(wf.region.contains(Vec2::ZERO, 0.0));
        assert!(wf.region.interior_distance(Vec2::ZERO) > 0.0);
        scan.ranges[359] = 0.4;
        assert!(matches!(
            wall_following_free_space(&scan, 0.25, 0.1),
            Err(SensingError::NotInDangerZone { .. })
        ));
    }

    #[test]
    fn penetration_is_degenerate() {
        let mut scan = Scan::open(Vec2::ZERO, 5.0, 36);
        scan.ranges[3] = 0.2;
        assert!(matches!(
            local_free_space(&scan, 0.25),
            Err(SensingError::Degenerate(_))
        ));
    }
}
