//! Feedback laws for path following and wall following, and the mode
//! automaton that switches between them.

use thiserror::Error;

use crate::geometry::{ConvexRegion, GeometryError, RefPath, Vec2};
use crate::sensing::{
    boundary_distance, local_free_space, Scan, SensingError, WallFrame, CONTACT_TOL,
};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReactiveError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
}

/// Sense of travel around an obstacle while following its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Ccw,
    Cw,
}

impl Turn {
    pub fn sign(self) -> f64 {
        match self {
            Turn::Ccw => 1.0,
            Turn::Cw => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NavMode {
    PathFollowing,
    /// `saved_alpha` is the path parameter at entry; `turn` stays fixed for
    /// the whole episode.
    WallFollowing { saved_alpha: f64, turn: Turn },
}

impl NavMode {
    pub fn is_wall_following(&self) -> bool {
        matches!(self, NavMode::WallFollowing { .. })
    }

    pub fn turn(&self) -> Option<Turn> {
        match self {
            NavMode::WallFollowing { turn, .. } => Some(*turn),
            NavMode::PathFollowing => None,
        }
    }
}

/// Controller memory carried between steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavState {
    pub mode: NavMode,
    /// Last projected path parameter, reused when the free ball misses the
    /// path.
    pub alpha: f64,
    /// Whether a clearance drop may start a wall-following episode.
    pub armed: bool,
}

impl Default for NavState {
    fn default() -> Self {
        NavState {
            mode: NavMode::PathFollowing,
            alpha: 0.0,
            armed: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Holonomic(Vec2),
    Unicycle { v: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Drive {
    Holonomic,
    Unicycle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavConfig {
    pub k: f64,
    pub eps: f64,
    /// Wall following ends once `α* > α_s* + exit_margin`.
    pub exit_margin: f64,
    /// Leave a wall only when the path goal lies on the free side of the
    /// wall tangent, `(𝒫(α*) − x) · n_w ≥ 0`.
    pub free_side_exit: bool,
    /// After leaving a wall, suppress re-entry until the clearance recovers
    /// to `eps` or path progress stalls.
    pub rearm_guard: bool,
    /// Enter wall following only when the path goal lies on the wall side,
    /// `(𝒫(α*) − x) · n_w < 0`.
    pub wall_side_entry: bool,
}

impl NavConfig {
    pub fn new(k: f64, eps: f64) -> Self {
        NavConfig {
            k,
            eps,
            exit_margin: 0.0,
            free_side_exit: true,
            rearm_guard: true,
            wall_side_entry: true,
        }
    }
}

/// Largest path parameter inside the ball `B(x, d_free)` and its point.
/// When the ball misses the path, `previous` is kept.
pub fn projected_path_goal(path: &RefPath, x: Vec2, d_free: f64, previous: f64) -> (f64, Vec2) {
    let alpha = path
        .max_ball_param(x, d_free.max(0.0))
        .unwrap_or(previous)
        .clamp(0.0, 1.0);
    let goal = path.eval(alpha).expect("alpha clamped to [0, 1]");
    (alpha, goal)
}

/// `u = −k (x − Π_region(goal))`.
pub fn holonomic_law(x: Vec2, region: &ConvexRegion, goal: Vec2, k: f64) -> Result<Vec2, GeometryError> {
    Ok((x - region.project(goal)?) * -k)
}

/// Counter-clockwise when the wall tangent agrees with the path direction.
pub fn choose_wall_direction(wall_tangent: Vec2, path_tangent: Vec2) -> Turn {
    if wall_tangent.dot(path_tangent) >= 0.0 {
        Turn::Ccw
    } else {
        Turn::Cw
    }
}

/// Point at distance `eps` from `offset`, `eps / 2` off the wall and ahead
/// along the chosen tangent.
pub fn wall_goal(offset: Vec2, normal: Vec2, tangent: Vec2, eps: f64, turn: Turn) -> Vec2 {
    offset + normal * (0.5 * eps) + tangent * (turn.sign() * eps * SQRT3_2)
}

/// `u = −k (x − x_p)`; its tangential component is `k a ε √3 / 2`.
pub fn wall_following_law(x: Vec2, frame: &WallFrame, eps: f64, turn: Turn, k: f64) -> Vec2 {
    (x - wall_goal(frame.offset, frame.normal, frame.tangent, eps, turn)) * -k
}

/// Forward-only unicycle law. The linear speed follows the goal projected
/// onto the slice of `region_v` along the heading line; the turn rate
/// steers toward the average of the goal's projections on `region_w` and
/// `region_l`, and vanishes when that point lies straight ahead.
pub fn unicycle_law(
    x: Vec2,
    heading: f64,
    region_v: &ConvexRegion,
    region_w: &ConvexRegion,
    region_l: &ConvexRegion,
    goal: Vec2,
    k: f64,
) -> Result<(f64, f64), GeometryError> {
    let e = Vec2::from_angle(heading);
    let v = match region_v.line_slice(x, e) {
        Some((lo, hi)) => k * e.dot(goal - x).clamp(lo, hi).max(0.0),
        None => 0.0,
    };
    let avg = (region_w.project(goal)? + region_l.project(goal)?) * 0.5;
    let w = avg - x;
    let omega = k * e.perp().dot(w).atan2(e.dot(w));
    Ok((v, omega))
}

/// Heading-relative turn rate toward `target` for the in-place rotation
/// phases: `k · wrap(φ − ψ)`, in `[−kπ, kπ]`.
pub fn rotation_law(heading: f64, target: f64, k: f64) -> f64 {
    k * crate::geometry::wrap_angle(target - heading)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeEvent {
    EnteredWall { turn: Turn, saved_alpha: f64 },
    LeftWall,
}

/// Wall geometry used at a wall-following step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallInfo {
    pub normal: Vec2,
    pub tangent: Vec2,
    pub offset: Vec2,
    pub ray: usize,
    pub turn: Turn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavOutput {
    pub command: Command,
    pub state: NavState,
    /// Mode in force while `command` was computed.
    pub mode_used: NavMode,
    pub clearance: f64,
    pub alpha: f64,
    /// Goal before projection (`𝒫(α*)` or `x_p`).
    pub target: Vec2,
    /// Virtual holonomic velocity of the controlled point.
    pub velocity: Vec2,
    pub wall: Option<WallInfo>,
    pub event: Option<ModeEvent>,
}

/// One iteration of the path/wall-following loop for the point at the
/// scan origin with the given body radius.
pub fn navigate_step(
    path: &RefPath,
    scan: &Scan,
    heading: f64,
    body_radius: f64,
    state: &NavState,
    cfg: &NavConfig,
    drive: Drive,
) -> Result<NavOutput, ReactiveError> {
    let x = scan.origin;
    let d = boundary_distance(scan, body_radius);
    if d < -CONTACT_TOL {
        return Err(SensingError::Degenerate(d).into());
    }
    let (alpha, path_goal) = projected_path_goal(path, x, d, state.alpha);
    let lf = local_free_space(scan, body_radius)?;
    let mut next = *state;
    next.alpha = alpha;
    let mut event = None;
    let mode_used = state.mode;

    let (target, wall, region) = match state.mode {
        NavMode::PathFollowing => {
            if !next.armed && (d >= cfg.eps || alpha <= state.alpha) {
                next.armed = true;
            }
            let m = scan.argmin();
            let normal = -scan.direction(m);
            let toward_wall = !cfg.wall_side_entry || (path_goal - x).dot(normal) < 0.0;
            if next.armed && d < cfg.eps && toward_wall {
                let tangent = normal.perp();
                let turn = choose_wall_direction(tangent, path.tangent(alpha)?);
                next.mode = NavMode::WallFollowing {
                    saved_alpha: alpha,
                    turn,
                };
                event = Some(ModeEvent::EnteredWall {
                    turn,
                    saved_alpha: alpha,
                });
            }
            (path_goal, None, lf)
        }
        NavMode::WallFollowing { saved_alpha, turn } => {
            let frame = wall_frame(scan, body_radius, d, cfg.eps, lf);
            let goal = wall_goal(frame.offset, frame.normal, frame.tangent, cfg.eps, turn);
            let clear_side = !cfg.free_side_exit || (path_goal - x).dot(frame.normal) >= 0.0;
            if alpha > saved_alpha + cfg.exit_margin && clear_side {
                next.mode = NavMode::PathFollowing;
                next.armed = !cfg.rearm_guard;
                event = Some(ModeEvent::LeftWall);
            }
            let info = WallInfo {
                normal: frame.normal,
                tangent: frame.tangent,
                offset: frame.offset,
                ray: frame.ray,
                turn,
            };
            (goal, Some((info, d < cfg.eps)), frame.region)
        }
    };

    let velocity = match wall {
        Some((_, true)) => (x - target) * -cfg.k,
        _ => holonomic_law(x, &region, target, cfg.k)?,
    };
    let command = match drive {
        Drive::Holonomic => Command::Holonomic(velocity),
        Drive::Unicycle => {
            let (v, omega) = unicycle_law(x, heading, &region, &region, &region, target, cfg.k)?;
            Command::Unicycle { v, omega }
        }
    };
    Ok(NavOutput {
        command,
        state: next,
        mode_used,
        clearance: d,
        alpha,
        target,
        velocity,
        wall: wall.map(|(w, _)| w),
        event,
    })
}

/// Wall frame that tolerates a clearance at or above the band: the offset
/// disk then no longer contains the origin, so the plain local free space
/// is used as the region instead.
fn wall_frame(scan: &Scan, body_radius: f64, d: f64, eps: f64, lf: ConvexRegion) -> WallFrame {
    if d < eps {
        if let Ok(frame) = crate::sensing::wall_following_free_space(scan, body_radius, eps) {
            return frame;
        }
    }
    let m = scan.argmin();
    let normal = -scan.direction(m);
    WallFrame {
        region: lf,
        normal,
        tangent: normal.perp(),
        offset: scan.origin - normal * d.max(0.0),
        ray: m,
        clearance: d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::wall_following_free_space;
    use std::f64::consts::PI;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn path_goal_examples() {
        let p = RefPath::line(Vec2::ZERO, Vec2::new(10.0, 0.0));
        let (a, g) = projected_path_goal(&p, Vec2::ZERO, 2.0, 0.0);
        assert!((a - 0.2).abs() < 1e-12 && close(g, Vec2::new(2.0, 0.0), 1e-12));
        let (a, _) = projected_path_goal(&p, Vec2::new(10.0, 0.0), 0.3, 0.0);
        assert_eq!(a, 1.0);
        // Ball misses: keep the previous parameter.
        let (a, g) = projected_path_goal(&p, Vec2::new(5.0, 3.0), 1.0, 0.4);
        assert_eq!(a, 0.4);
        assert!(close(g, Vec2::new(4.0, 0.0), 1e-12));
    }

    #[test]
    fn holonomic_examples() {
        let lf = ConvexRegion::disk(Vec2::ZERO, 3.0);
        assert_eq!(
            holonomic_law(Vec2::ZERO, &lf, Vec2::new(1.0, 0.0), 2.0).unwrap(),
            Vec2::new(2.0, 0.0)
        );
        assert_eq!(holonomic_law(Vec2::ZERO, &lf, Vec2::ZERO, 2.0).unwrap(), Vec2::ZERO);
    }

    #[test]
    fn direction_examples() {
        let t = Vec2::new(0.0, 1.0);
        assert_eq!(choose_wall_direction(t, Vec2::new(0.1, 0.995)), Turn::Ccw);
        assert_eq!(choose_wall_direction(t, Vec2::new(0.0, -1.0)), Turn::Cw);
        assert_eq!(choose_wall_direction(t, Vec2::new(1.0, 0.0)), Turn::Ccw);
    }

    #[test]
    fn wall_goal_examples() {
        let (o, n, t) = (Vec2::new(-0.05, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
        assert!(close(wall_goal(o, n, t, 0.1, Turn::Ccw), Vec2::new(0.0, 0.0866025403784), 1e-12));
        assert!(close(wall_goal(o, n, t, 0.1, Turn::Cw), Vec2::new(0.0, -0.0866025403784), 1e-12));
        assert!((wall_goal(o, n, t, 0.1, Turn::Ccw).distance(o) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn wall_law_components() {
        let eps = 0.1;
        let k = 2.0;
        for (gap, normal_part) in [(0.05, 0.0), (0.1, -k * eps / 2.0)] {
            let mut scan = Scan::open(Vec2::ZERO, 5.0, 360);
            scan.ranges[359] = 0.25 + gap;
            // Use a frame built directly; d = eps is outside the strict band.
            let frame = wall_frame(&scan, 0.25, gap, eps, local_free_space(&scan, 0.25).unwrap());
            let u = wall_following_law(Vec2::ZERO, &frame, eps, Turn::Ccw, k);
            assert!((u.dot(frame.normal) - normal_part).abs() < 1e-12);
            assert!((u.dot(frame.tangent) - k * eps * SQRT3_2).abs() < 1e-12);
        }
    }

    #[test]
    fn wall_goal_on_region_boundary() {
        let mut scan = Scan::open(Vec2::ZERO, 5.0, 360);
        scan.ranges[40] = 0.31;
        let f = wall_following_free_space(&scan, 0.25, 0.1).unwrap();
        let xp = wall_goal(f.offset, f.normal, f.tangent, 0.1, Turn::Cw);
        assert!(f.region.interior_distance(xp).abs() < 1e-6);
    }

    #[test]
    fn unicycle_examples() {
        let lf = ConvexRegion::disk(Vec2::ZERO, 3.0);
        let law = |goal| unicycle_law(Vec2::ZERO, 0.0, &lf, &lf, &lf, goal, 2.0).unwrap();
        let (v, w) = law(Vec2::new(1.0, 0.0));
        assert!((v - 2.0).abs() < 1e-12 && w == 0.0);
        let (v, _) = law(Vec2::new(-1.0, 0.0));
        assert_eq!(v, 0.0);
        let (v, w) = law(Vec2::new(0.0, 1.0));
        assert!(v.abs() < 1e-12 && (w - PI).abs() < 1e-12);
    }

    #[test]
    fn mode_switching() {
        let path = RefPath::line(Vec2::ZERO, Vec2::new(10.0, 0.0));
        let cfg = NavConfig::new(2.0, 0.1);
        let far = Scan::open(Vec2::ZERO, 5.0, 360);
        let out = navigate_step(&path, &far, 0.0, 0.25, &NavState::default(), &cfg, Drive::Holonomic).unwrap();
        assert_eq!(out.state.mode, NavMode::PathFollowing);

        let mut near = Scan::open(Vec2::ZERO, 5.0, 360);
        near.ranges[179] = 0.3;
        let out = navigate_step(&path, &near, 0.0, 0.25, &NavState::default(), &cfg, Drive::Holonomic).unwrap();
        match out.state.mode {
            NavMode::WallFollowing { saved_alpha, .. } => assert!((saved_alpha - 0.005).abs() < 1e-12),
            m => panic!("expected wall following, got {m:?}"),
        }

        // Back on the path beyond the saved parameter.
        let state = NavState {
            mode: NavMode::WallFollowing {
                saved_alpha: 0.1,
                turn: Turn::Ccw,
            },
            alpha: 0.1,
            armed: true,
        };
        // Wall slightly behind and below, so the path goal is on the free side.
        let mut scan = Scan::open(Vec2::new(2.0, 0.0), 5.0, 360);
        scan.ranges[80] = 0.3;
        let out = navigate_step(&path, &scan, 0.0, 0.25, &state, &cfg, Drive::Holonomic).unwrap();
        assert_eq!(out.state.mode, NavMode::PathFollowing);
        assert_eq!(out.event, Some(ModeEvent::LeftWall));
        assert!(!out.state.armed);

        // Path goal on the wall side: keep following.
        let mut scan = Scan::open(Vec2::new(2.0, 0.0), 5.0, 360);
        scan.ranges[100] = 0.3;
        let out = navigate_step(&path, &scan, 0.0, 0.25, &state, &cfg, Drive::Holonomic).unwrap();
        assert!(out.state.mode.is_wall_following());
    }

    #[test]
    fn rotation_law_sign() {
        assert!((rotation_law(0.0, 1.0, 2.0) - 2.0).abs() < 1e-15);
        assert!((rotation_law(0.5, -0.5, 1.0) + 1.0).abs() < 1e-15);
        assert!((rotation_law(3.0, -3.0, 1.0) - (2.0 * PI - 6.0)).abs() < 1e-12);
    }
}
