//! Scenario model: workspace, unknown convex obstacles, movable disk objects
//! and the robot, plus the separation checks the reactive guarantees rely on.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    point_segment_distance, segment_segment_distance, segments_intersect, wrap_angle, Vec2,
};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("malformed scenario: {field}: {reason}")]
pub struct MalformedScenario {
    pub field: String,
    pub reason: String,
}

impl MalformedScenario {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        MalformedScenario {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Simple polygon given counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    vertices: Vec<Vec2>,
}

impl Workspace {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, MalformedScenario> {
        let bad = |r: &str| MalformedScenario::new("workspace", r);
        if vertices.len() < 3 {
            return Err(bad("needs at least 3 vertices"));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite vertex"));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= 0.0 {
                return Err(bad("repeated vertex"));
            }
        }
        if signed_area(&vertices) <= 0.0 {
            return Err(bad("vertices must be counter-clockwise with nonzero area"));
        }
        for i in 0..n {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(bad("polygon is self-intersecting"));
                }
            }
        }
        Ok(Workspace { vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Workspace::new(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
        .expect("rectangle is a valid workspace")
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Even-odd point-in-polygon test; boundary points count as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if point_segment_distance(p, a, b) == 0.0 {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance to the boundary, positive inside and negative outside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let d = self
            .edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min);
        if self.contains(p) {
            d
        } else {
            -d
        }
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        bounds_of(&self.vertices)
    }
}

pub(crate) fn bounds_of(points: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Disk { center: Vec2, radius: f64 },
    /// Convex polygon, counter-clockwise.
    Polygon { vertices: Vec<Vec2> },
}

impl Shape {
    /// Distance from `p`, negative inside.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        match self {
            Shape::Disk { center, radius } => p.distance(*center) - radius,
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut d = f64::INFINITY;
                let mut inside = true;
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    d = d.min(point_segment_distance(p, a, b));
                    if (b - a).cross(p - a) < 0.0 {
                        inside = false;
                    }
                }
                if inside {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// Smallest `t >= 0` with `origin + t * dir` on the shape (`dir` unit).
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        match self {
            Shape::Disk { center, radius } => ray_circle(origin, dir, *center, *radius),
            Shape::Polygon { vertices } => {
                if self.signed_distance(origin) <= 0.0 {
                    return Some(0.0);
                }
                let n = vertices.len();
                (0..n)
                    .filter_map(|i| ray_segment(origin, dir, vertices[i], vertices[(i + 1) % n]))
                    .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))))
            }
        }
    }

    /// Bounding circle `(center, radius)`.
    pub fn bounding_circle(&self) -> (Vec2, f64) {
        match self {
            Shape::Disk { center, radius } => (*center, *radius),
            Shape::Polygon { vertices } => {
                let c = vertices.iter().fold(Vec2::ZERO, |a, &v| a + v) / vertices.len() as f64;
                let r = vertices.iter().map(|v| v.distance(c)).fold(0.0, f64::max);
                (c, r)
            }
        }
    }

    /// Distance to the closed segment `[a, b]` (zero if they touch).
    pub fn segment_distance(&self, a: Vec2, b: Vec2) -> f64 {
        match self {
            Shape::Disk { center, radius } => (point_segment_distance(*center, a, b) - radius).max(0.0),
            Shape::Polygon { vertices } => {
                if self.signed_distance(a) <= 0.0 || self.signed_distance(b) <= 0.0 {
                    return 0.0;
                }
                let n = vertices.len();
                (0..n)
                    .map(|i| segment_segment_distance(a, b, vertices[i], vertices[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Clearance between two shapes; negative overlap depth only for disks.
    pub fn distance_to(&self, other: &Shape) -> f64 {
        match (self, other) {
            (Shape::Disk { center: c1, radius: r1 }, Shape::Disk { center: c2, radius: r2 }) => {
                c1.distance(*c2) - r1 - r2
            }
            (Shape::Disk { center, radius }, poly @ Shape::Polygon { .. })
            | (poly @ Shape::Polygon { .. }, Shape::Disk { center, radius }) => {
                poly.signed_distance(*center) - radius
            }
            (Shape::Polygon { vertices: a }, Shape::Polygon { vertices: b }) => {
                if a.iter().any(|&p| other.signed_distance(p) <= 0.0)
                    || b.iter().any(|&p| self.signed_distance(p) <= 0.0)
                {
                    return 0.0;
                }
                let (na, nb) = (a.len(), b.len());
                let mut d = f64::INFINITY;
                for i in 0..na {
                    for j in 0..nb {
                        d = d.min(segment_segment_distance(
                            a[i],
                            a[(i + 1) % na],
                            b[j],
                            b[(j + 1) % nb],
                        ));
                    }
                }
                d
            }
        }
    }

    /// Clearance from the workspace boundary (zero or less if it crosses it).
    pub fn boundary_distance(&self, ws: &Workspace) -> f64 {
        match self {
            Shape::Disk { center, radius } => ws.signed_distance(*center) - radius,
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                let mut d = f64::INFINITY;
                for i in 0..n {
                    for (a, b) in ws.edges() {
                        d = d.min(segment_segment_distance(vertices[i], vertices[(i + 1) % n], a, b));
                    }
                }
                if vertices.iter().all(|&v| ws.contains(v)) {
                    d
                } else {
                    -d
                }
            }
        }
    }
}

/// Smallest `t >= 0` with `|origin + t dir - center| = radius`; zero when
/// the origin is inside the disk.
pub fn ray_circle(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let w = origin - center;
    let c = w.norm_sq() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = w.dot(dir);
    if b >= 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    Some(-b - disc.sqrt())
}

/// Ray/segment intersection distance.
pub fn ray_segment(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    let w = a - origin;
    if denom.abs() < 1e-300 {
        // Parallel: only a collinear overlap hits, at the nearer endpoint.
        if w.cross(dir).abs() > 1e-12 {
            return None;
        }
        let ta = w.dot(dir);
        let tb = (b - origin).dot(dir);
        return match (ta >= 0.0, tb >= 0.0) {
            (true, true) => Some(ta.min(tb)),
            (false, false) => None,
            _ => Some(0.0),
        };
    }
    let t = w.cross(e) / denom;
    let s = w.cross(dir) / denom;
    (t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&s)).then_some(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub id: u32,
    pub shape: Shape,
    /// Known obstacles are visible to the deliberative planner.
    pub known: bool,
    bound_center: Vec2,
    bound_radius: f64,
}

impl Obstacle {
    pub fn new(id: u32, shape: Shape, known: bool) -> Result<Self, MalformedScenario> {
        let field = format!("obstacle {id}");
        match &shape {
            Shape::Disk { center, radius } => {
                if !center.is_finite() || !(*radius > 0.0 && radius.is_finite()) {
                    return Err(MalformedScenario::new(field, "disk radius must be positive"));
                }
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 || vertices.iter().any(|v| !v.is_finite()) {
                    return Err(MalformedScenario::new(field, "polygon needs 3 finite vertices"));
                }
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if (b - a).cross(c - b) <= 0.0 {
                        return Err(MalformedScenario::new(
                            field,
                            "polygon must be strictly convex and counter-clockwise",
                        ));
                    }
                }
                if signed_area(vertices) <= 0.0 {
                    return Err(MalformedScenario::new(field, "polygon must be counter-clockwise"));
                }
            }
        }
        let (bound_center, bound_radius) = shape.bounding_circle();
        Ok(Obstacle {
            id,
            shape,
            known,
            bound_center,
            bound_radius,
        })
    }

    pub fn disk(id: u32, center: Vec2, radius: f64) -> Self {
        Obstacle::new(id, Shape::Disk { center, radius }, false).expect("valid disk")
    }

    pub fn polygon(id: u32, vertices: Vec<Vec2>) -> Result<Self, MalformedScenario> {
        Obstacle::new(id, Shape::Polygon { vertices }, false)
    }

    pub fn bounding_circle(&self) -> (Vec2, f64) {
        (self.bound_center, self.bound_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovableObject {
    pub id: u32,
    #[serde(rename = "start")]
    pub center: Vec2,
    pub radius: f64,
    pub goal: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub start: Vec2,
    #[serde(default)]
    pub heading: f64,
    pub radius: f64,
    pub lidar_range: f64,
}

/// Controller gains, tolerances and integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_k")]
    pub k: f64,
    /// Wall-following band; derived from the obstacle separation when absent.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default)]
    pub nest: Option<Vec2>,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_k() -> f64 {
    2.0
}
fn default_delta() -> f64 {
    0.01
}
fn default_h() -> f64 {
    0.005
}
fn default_rays() -> usize {
    360
}
fn default_max_steps() -> u64 {
    10_000_000
}

impl Default for Params {
    fn default() -> Self {
        Params {
            k: default_k(),
            eps: None,
            delta: default_delta(),
            h: default_h(),
            rays: default_rays(),
            nest: None,
            max_steps: default_max_steps(),
        }
    }
}

/// Fallback band when the separation leaves no admissible value.
pub const FALLBACK_EPS: f64 = 0.05;
pub const MAX_EPS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub workspace: Workspace,
    pub obstacles: Vec<Obstacle>,
    pub objects: Vec<MovableObject>,
    pub robot: RobotSpec,
    pub params: Params,
}

impl Scenario {
    /// Assembles and checks geometric well-formedness. Separation
    /// assumptions are not enforced here; see [`validate_assumptions`].
    pub fn new(
        name: impl Into<String>,
        workspace: Workspace,
        obstacles: Vec<Obstacle>,
        objects: Vec<MovableObject>,
        robot: RobotSpec,
        params: Params,
    ) -> Result<Self, MalformedScenario> {
        let s = Scenario {
            name: name.into(),
            workspace,
            obstacles,
            objects,
            robot,
            params,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<(), MalformedScenario> {
        let ws = &self.workspace;
        let mut ids = std::collections::BTreeSet::new();
        for o in &self.obstacles {
            if !ids.insert(o.id) {
                return Err(MalformedScenario::new(format!("obstacle {}", o.id), "duplicate id"));
            }
            if o.shape.boundary_distance(ws) <= 0.0 {
                return Err(MalformedScenario::new(
                    format!("obstacle {}", o.id),
                    "must lie strictly inside the workspace",
                ));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for obj in &self.objects {
            let field = format!("object {}", obj.id);
            if !ids.insert(obj.id) {
                return Err(MalformedScenario::new(field, "duplicate id"));
            }
            if !(obj.radius > 0.0 && obj.radius.is_finite()) {
                return Err(MalformedScenario::new(field, "radius must be positive"));
            }
            if !ws.contains(obj.center) || !ws.contains(obj.goal) {
                return Err(MalformedScenario::new(field, "start and goal must be inside the workspace"));
            }
        }
        let r = &self.robot;
        if !(r.radius > 0.0 && r.radius.is_finite()) {
            return Err(MalformedScenario::new("robot.radius", "must be positive"));
        }
        if r.lidar_range.is_nan() || r.lidar_range <= r.radius + self.max_object_radius() {
            return Err(MalformedScenario::new(
                "robot.lidar_range",
                "must exceed robot radius plus the largest object radius",
            ));
        }
        if !ws.contains(r.start) || !r.heading.is_finite() {
            return Err(MalformedScenario::new("robot.start", "must be inside the workspace"));
        }
        let p = &self.params;
        let positive = |v: f64, f: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(MalformedScenario::new(format!("params.{f}"), "must be positive"))
            }
        };
        positive(p.k, "k")?;
        positive(p.delta, "delta")?;
        positive(p.h, "h")?;
        if let Some(e) = p.eps {
            positive(e, "eps")?;
        }
        if p.rays < 8 {
            return Err(MalformedScenario::new("params.rays", "at least 8 rays required"));
        }
        if p.max_steps == 0 {
            return Err(MalformedScenario::new("params.max_steps", "must be positive"));
        }
        if let Some(n) = p.nest {
            if !ws.contains(n) {
                return Err(MalformedScenario::new("params.nest", "must be inside the workspace"));
            }
        }
        Ok(())
    }

    pub fn max_object_radius(&self) -> f64 {
        self.objects.iter().map(|o| o.radius).fold(0.0, f64::max)
    }

    /// `2 (r + max ρ)`: the obstacle separation the guarantees require.
    pub fn required_separation(&self) -> f64 {
        2.0 * (self.robot.radius + self.max_object_radius())
    }

    /// Upper bound on the wall-following band, `½ [η − 2 (r + max ρ)]`.
    pub fn eps_bound(&self) -> f64 {
        0.5 * (compute_eta(self) - self.required_separation())
    }

    /// Band in use: the explicit override, else 0.9 of the bound clipped to
    /// `(0, 0.5]`, else [`FALLBACK_EPS`].
    pub fn epsilon(&self) -> f64 {
        if let Some(e) = self.params.eps {
            return e;
        }
        let bound = self.eps_bound();
        if bound > 0.0 {
            (0.9 * bound).min(MAX_EPS)
        } else {
            FALLBACK_EPS
        }
    }

    pub fn object_index(&self, id: u32) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn initial_state(&self) -> RobotState {
        RobotState {
            position: self.robot.start,
            heading: wrap_angle(self.robot.heading),
            grasped: None,
        }
    }

    pub fn initial_object_positions(&self) -> Vec<Vec2> {
        self.objects.iter().map(|o| o.center).collect()
    }
}

/// `η`: minimum clearance among obstacle pairs and between obstacles and
/// the workspace boundary; `+∞` with no obstacles.
pub fn compute_eta(s: &Scenario) -> f64 {
    let obs = &s.obstacles;
    let mut eta = f64::INFINITY;
    for (i, a) in obs.iter().enumerate() {
        eta = eta.min(a.shape.boundary_distance(&s.workspace));
        for b in &obs[i + 1..] {
            eta = eta.min(a.shape.distance_to(&b.shape));
        }
    }
    eta
}

/// Differential-drive robot state. `grasped` holds the object index while
/// the gripper is engaged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Vec2,
    pub heading: f64,
    pub grasped: Option<usize>,
}

impl RobotState {
    pub fn gripper_engaged(&self) -> bool {
        self.grasped.is_some()
    }

    pub fn heading_vector(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

/// Something the robot can collide with or sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Boundary,
    Obstacle(u32),
    Object(u32),
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Boundary => write!(f, "boundary"),
            Feature::Obstacle(id) => write!(f, "obstacle {id}"),
            Feature::Object(id) => write!(f, "object {id}"),
        }
    }
}

/// Runtime view of the world: static scenario plus current object centers.
/// `hidden` is an object excluded from sensing and collision checks (the
/// grasped object, or the object being approached for grasping).
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub scenario: &'a Scenario,
    pub objects: &'a [Vec2],
    pub hidden: Option<usize>,
}

impl<'a> Scene<'a> {
    pub fn new(scenario: &'a Scenario, objects: &'a [Vec2], hidden: Option<usize>) -> Self {
        Scene {
            scenario,
            objects,
            hidden,
        }
    }

    /// Visible objects as `(index, center, radius)`.
    pub fn visible_objects(&self) -> impl Iterator<Item = (usize, Vec2, f64)> + '_ {
        self.objects
            .iter()
            .enumerate()
            .filter(move |(i, _)| Some(*i) != self.hidden)
            .map(move |(i, &c)| (i, c, self.scenario.objects[i].radius))
    }

    /// Signed distance from `p` to every feature, nearest first on ties by
    /// feature order.
    pub fn nearest_feature(&self, p: Vec2) -> (Feature, f64) {
        let mut best = (Feature::Boundary, self.scenario.workspace.signed_distance(p));
        for o in &self.scenario.obstacles {
            let d = o.shape.signed_distance(p);
            if d < best.1 {
                best = (Feature::Obstacle(o.id), d);
            }
        }
        for (i, c, r) in self.visible_objects() {
            let d = p.distance(c) - r;
            if d < best.1 {
                best = (Feature::Object(self.scenario.objects[i].id), d);
            }
        }
        best
    }
}

/// Ground-truth signed clearance of the robot disk (and the grasped object
/// disk, if any) from everything else; negative means penetration.
pub fn collision_clearance(scene: &Scene<'_>, state: &RobotState) -> f64 {
    let r = scene.scenario.robot.radius;
    let mut c = scene.nearest_feature(state.position).1 - r;
    if let Some(i) = state.grasped {
        let rho = scene.scenario.objects[i].radius;
        let center = state.position + state.heading_vector() * (rho + r);
        c = c.min(scene.nearest_feature(center).1 - rho);
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalCheck {
    pub object: u32,
    pub clearance: f64,
    pub required: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub eta: f64,
    pub required_separation: f64,
    pub separation_ok: bool,
    pub goals: Vec<GoalCheck>,
    pub eps: f64,
    pub eps_bound: f64,
    pub eps_ok: bool,
    /// Assumption violations; the controller may still succeed.
    pub warnings: Vec<String>,
    /// Informational findings that do not affect validity.
    pub notes: Vec<String>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.warnings.is_empty()
    }

    /// `η − 2 (r + max ρ)`.
    pub fn separation_margin(&self) -> f64 {
        self.eta - self.required_separation
    }
}

/// Checks obstacle separation, admissible goals and the band choice.
pub fn validate_assumptions(s: &Scenario) -> AssumptionReport {
    let eta = compute_eta(s);
    let required = s.required_separation();
    let separation_ok = eta > required;
    let mut warnings = Vec::new();
    let mut notes = Vec::new();
    if !separation_ok {
        warnings.push(format!(
            "obstacle separation: eta = {eta:.4} m does not exceed 2(r + max rho) = {required:.4} m"
        ));
    }
    let r = s.robot.radius;
    let goals: Vec<GoalCheck> = s
        .objects
        .iter()
        .map(|o| {
            let clearance = s
                .obstacles
                .iter()
                .map(|ob| ob.shape.signed_distance(o.goal))
                .fold(s.workspace.signed_distance(o.goal), f64::min);
            let required = o.radius + 2.0 * r;
            let ok = clearance > required;
            if !ok {
                warnings.push(format!(
                    "goal of object {}: clearance {clearance:.4} m is not above rho + 2r = {required:.4} m",
                    o.id
                ));
            }
            GoalCheck {
                object: o.id,
                clearance,
                required,
                ok,
            }
        })
        .collect();
    let eps = s.epsilon();
    let eps_bound = 0.5 * (eta - required);
    let eps_ok = eps > 0.0 && eps < eps_bound;
    if !eps_ok {
        warnings.push(format!(
            "wall-following band eps = {eps:.4} m is outside (0, {eps_bound:.4})"
        ));
    }
    // Resting objects are sensed as obstacles but need not respect the
    // obstacle separation.
    for o in &s.objects {
        let clearance = s
            .obstacles
            .iter()
            .map(|ob| ob.shape.signed_distance(o.center) - o.radius)
            .fold(s.workspace.signed_distance(o.center) - o.radius, f64::min);
        if clearance <= required {
            notes.push(format!(
                "object {} at rest is {clearance:.4} m from the nearest obstacle (obstacle separation is {required:.4} m)",
                o.id
            ));
        }
    }
    AssumptionReport {
        eta,
        required_separation: required,
        separation_ok,
        goals,
        eps,
        eps_bound,
        eps_ok,
        warnings,
        notes,
    }
}
