//! Symbolic actions, their execution on the simulator, and a grid-based
//! planner over the known part of the map.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::geometry::{segment_segment_distance, RefPath, Vec2};
use crate::sim::{ActionReport, Engine, Failure};
use crate::world::{Scenario, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    /// Reach object `id` and grasp it.
    MoveToObject(u32),
    /// Push the grasped object `id` to its goal.
    PositionObject(u32),
    Move,
}

impl ActionKind {
    pub fn name(&self) -> &'static str {
        match self {
            ActionKind::MoveToObject(_) => "MoveToObject",
            ActionKind::PositionObject(_) => "PositionObject",
            ActionKind::Move => "Move",
        }
    }

    pub fn object(&self) -> Option<u32> {
        match *self {
            ActionKind::MoveToObject(id) | ActionKind::PositionObject(id) => Some(id),
            ActionKind::Move => None,
        }
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.object() {
            Some(id) => write!(f, "{}({id})", self.name()),
            None => write!(f, "{}", self.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicAction {
    pub kind: ActionKind,
    pub path: RefPath,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub actions: Vec<SymbolicAction>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no path of clearance {margin:.3} m from ({}, {}) to ({}, {})", from.x, from.y, to.x, to.y)]
    NoPath { from: Vec2, to: Vec2, margin: f64 },
    #[error("plan line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("plan references unknown object {0}")]
    UnknownObject(u32),
    #[error("action {index} ({kind}) cannot follow the previous actions")]
    BadSequence { index: usize, kind: ActionKind },
}

impl Plan {
    /// Checks that grasps and placements alternate per object.
    pub fn check(&self, s: &Scenario) -> Result<(), PlanError> {
        let mut holding: Option<u32> = None;
        for (index, a) in self.actions.iter().enumerate() {
            if let Some(id) = a.kind.object() {
                if s.object_index(id).is_none() {
                    return Err(PlanError::UnknownObject(id));
                }
            }
            holding = match (a.kind, holding) {
                (ActionKind::MoveToObject(id), None) => Some(id),
                (ActionKind::PositionObject(id), Some(h)) if h == id => None,
                (ActionKind::Move, None) => None,
                (kind, _) => return Err(PlanError::BadSequence { index, kind }),
            };
        }
        Ok(())
    }

    /// Serializes one action per line as `KIND ID x,y x,y ...`, with `-` as
    /// the id of `Move`. Arcs are sampled; with `show_paths`, each action is
    /// preceded by comment lines sampling the path at α = 0, 0.1, ..., 1.
    pub fn to_text(&self, show_paths: bool) -> String {
        let mut out = String::new();
        for a in &self.actions {
            if show_paths {
                for k in 0..=10 {
                    let alpha = k as f64 / 10.0;
                    let p = a.path.eval(alpha).expect("alpha in range");
                    let _ = writeln!(out, "# {} alpha={alpha:.1} {},{}", a.kind, p.x, p.y);
                }
            }
            let id = a.kind.object().map_or("-".to_string(), |id| id.to_string());
            let _ = write!(out, "{} {id}", a.kind.name());
            for p in polyline_points(&a.path) {
                let _ = write!(out, " {},{}", p.x, p.y);
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Plan, PlanError> {
        let mut actions = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| PlanError::Parse {
                line: n + 1,
                reason: reason.to_string(),
            };
            let mut fields = line.split_whitespace();
            let kind = fields.next().ok_or_else(|| err("empty line"))?;
            let id = fields.next().ok_or_else(|| err("missing object id"))?;
            let parse_id = || id.parse::<u32>().map_err(|_| err("invalid object id"));
            let kind = match kind {
                "MoveToObject" => ActionKind::MoveToObject(parse_id()?),
                "PositionObject" => ActionKind::PositionObject(parse_id()?),
                "Move" if id == "-" => ActionKind::Move,
                "Move" => return Err(err("Move takes '-' as its id")),
                _ => return Err(err("unknown action kind")),
            };
            let points = fields
                .map(|f| {
                    let (x, y) = f.split_once(',').ok_or_else(|| err("expected x,y"))?;
                    let x = x.parse::<f64>().map_err(|_| err("invalid coordinate"))?;
                    let y = y.parse::<f64>().map_err(|_| err("invalid coordinate"))?;
                    Ok(Vec2::new(x, y))
                })
                .collect::<Result<Vec<_>, PlanError>>()?;
            if points.is_empty() {
                return Err(err("path needs at least one point"));
            }
            let path = RefPath::polyline(&points).map_err(|e| err(&e.to_string()))?;
            actions.push(SymbolicAction { kind, path });
        }
        Ok(Plan { actions })
    }
}

/// Path vertices, with arcs replaced by chords of at most 0.05 rad.
fn polyline_points(path: &RefPath) -> Vec<Vec2> {
    use crate::geometry::Segment;
    let mut pts = vec![path.start()];
    for seg in path.segments() {
        match seg {
            Segment::Line { end, .. } => pts.push(*end),
            Segment::Arc { sweep, .. } => {
                let n = (sweep.abs() / 0.05).ceil().max(1.0) as usize;
                for k in 1..=n {
                    pts.push(seg.point_at(seg.length() * k as f64 / n as f64));
                }
            }
        }
    }
    pts
}

// ---------------------------------------------------------------------------
// Execution

/// Executes one action and packages its report.
pub fn execute(engine: &mut Engine<'_>, index: usize, action: &SymbolicAction) -> ActionReport {
    let kind = action.kind;
    let object = kind.object().map(|id| engine.scenario.object_index(id));
    if let Some(None) = object {
        engine.begin_action(None);
        let id = kind.object().unwrap_or_default();
        return engine.end_action(
            index,
            kind,
            Err(Failure::Precondition(format!("unknown object {id}"))),
        );
    }
    let object = object.flatten();
    match kind {
        ActionKind::MoveToObject(_) => {
            let i = object.expect("checked above");
            engine.begin_action(Some(i));
            let res = exec_move_to_object(engine, i, &action.path);
            let snap = res.as_ref().ok().copied();
            let mut rep = engine.end_action(index, kind, res.map(|_| ()));
            rep.snap = snap;
            rep
        }
        ActionKind::PositionObject(_) => {
            let i = object.expect("checked above");
            engine.begin_action(None);
            let res = exec_position_object(engine, i, &action.path);
            let err = res.as_ref().ok().copied();
            let mut rep = engine.end_action(index, kind, res.map(|_| ()));
            rep.placement_error = err;
            rep
        }
        ActionKind::Move => {
            engine.begin_action(None);
            let res = exec_move(engine, &action.path);
            engine.end_action(index, kind, res)
        }
    }
}

/// Follows `path` truncated at the first point at contact distance from
/// object `i`, turns to face it and engages the gripper. Returns the snap
/// distance applied to the object.
pub fn exec_move_to_object(engine: &mut Engine<'_>, i: usize, path: &RefPath) -> Result<f64, Failure> {
    if engine.state.grasped.is_some() {
        return Err(Failure::Precondition("gripper already engaged".into()));
    }
    let center = engine.objects[i];
    let reach = engine.scenario.objects[i].radius + engine.scenario.robot.radius;
    let cut = path
        .min_ball_param(center, reach)
        .map_err(|e| Failure::Precondition(format!("path never reaches object: {e}")))?;
    if cut > 0.0 {
        let truncated = path
            .truncate(cut)
            .map_err(|e| Failure::Control(e.to_string()))?;
        engine.navigate(&truncated, Some(i))?;
    }
    engine.align_with(center, Some(i))?;
    engine.engage(i)
}

/// Carries the grasped object `i` along `path`, places it at its goal and
/// releases it. Returns the placement error.
pub fn exec_position_object(engine: &mut Engine<'_>, i: usize, path: &RefPath) -> Result<f64, Failure> {
    if engine.state.grasped != Some(i) {
        return Err(Failure::Precondition("object is not grasped".into()));
    }
    let goal = engine.scenario.objects[i].goal;
    engine.navigate_carrying(path)?;
    engine.place(goal)?;
    engine.release();
    let error = engine.objects[i].distance(goal);
    engine.retreat(engine.cfg.nav.eps)?;
    Ok(error)
}

/// Free navigation to the end of `path`.
pub fn exec_move(engine: &mut Engine<'_>, path: &RefPath) -> Result<(), Failure> {
    engine.navigate(path, None)
}

// ---------------------------------------------------------------------------
// Planning

/// Grid resolution of the planner.
pub const PLANNER_CELL: f64 = 0.1;

/// Workspace boundary plus the obstacles flagged as known.
pub struct KnownMap<'a> {
    scenario: &'a Scenario,
    shapes: Vec<&'a Shape>,
}

impl<'a> KnownMap<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        KnownMap {
            scenario,
            shapes: scenario
                .obstacles
                .iter()
                .filter(|o| o.known)
                .map(|o| &o.shape)
                .collect(),
        }
    }

    /// Signed clearance of a point.
    pub fn clearance(&self, p: Vec2) -> f64 {
        self.shapes
            .iter()
            .map(|s| s.signed_distance(p))
            .fold(self.scenario.workspace.signed_distance(p), f64::min)
    }

    /// Clearance of the closed segment `[a, b]`; zero or less when it
    /// touches the boundary or a known obstacle.
    pub fn segment_clearance(&self, a: Vec2, b: Vec2) -> f64 {
        let ws = &self.scenario.workspace;
        if !ws.contains(a) || !ws.contains(b) {
            return -1.0;
        }
        let mut c = ws
            .edges()
            .map(|(p, q)| segment_segment_distance(a, b, p, q))
            .fold(f64::INFINITY, f64::min);
        for s in &self.shapes {
            c = c.min(s.segment_distance(a, b));
        }
        c
    }
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    node: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cached occupancy grid over the workspace bounding box.
struct Grid {
    origin: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    clearance: Vec<f64>,
}

impl Grid {
    fn new(map: &KnownMap<'_>) -> Self {
        let (lo, hi) = map.scenario.workspace.bounds();
        let cell = PLANNER_CELL;
        let nx = ((hi.x - lo.x) / cell).ceil().max(1.0) as usize;
        let ny = ((hi.y - lo.y) / cell).ceil().max(1.0) as usize;
        let mut g = Grid {
            origin: lo,
            cell,
            nx,
            ny,
            clearance: Vec::with_capacity(nx * ny),
        };
        for j in 0..ny {
            for i in 0..nx {
                let c = g.center(i + j * nx);
                g.clearance.push(map.clearance(c));
            }
        }
        g
    }

    fn center(&self, idx: usize) -> Vec2 {
        let (i, j) = (idx % self.nx, idx / self.nx);
        self.origin + Vec2::new((i as f64 + 0.5) * self.cell, (j as f64 + 0.5) * self.cell)
    }

    fn cell_of(&self, p: Vec2) -> (i64, i64) {
        let q = (p - self.origin) / self.cell;
        (q.x.floor() as i64, q.y.floor() as i64)
    }

    fn index(&self, i: i64, j: i64) -> Option<usize> {
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then(|| i as usize + j as usize * self.nx)
    }
}

/// Searches a polyline from `from` to `to` whose known-map clearance is at
/// least `margin`: straight line if possible, else 8-connected A* on the
/// grid followed by greedy shortcutting.
fn plan_path(map: &KnownMap<'_>, grid: &Grid, from: Vec2, to: Vec2, margin: f64) -> Result<RefPath, PlanError> {
    let no_path = || PlanError::NoPath { from, to, margin };
    if from.distance(to) == 0.0 {
        return Ok(RefPath::polyline(&[from]).expect("single point"));
    }
    if map.segment_clearance(from, to) >= margin {
        return Ok(RefPath::line(from, to));
    }
    let inflate = margin + grid.cell * std::f64::consts::FRAC_1_SQRT_2;
    let free = |idx: usize| grid.clearance[idx] >= inflate;
    let n = grid.clearance.len();
    let (start, goal) = (n, n + 1);
    let attach = |p: Vec2| -> Vec<usize> {
        let (ci, cj) = grid.cell_of(p);
        let mut out = Vec::new();
        for dj in -3..=3 {
            for di in -3..=3 {
                if let Some(idx) = grid.index(ci + di, cj + dj) {
                    if free(idx) && map.segment_clearance(p, grid.center(idx)) >= margin {
                        out.push(idx);
                    }
                }
            }
        }
        out
    };
    let from_cells = attach(from);
    let to_cells = attach(to);
    if from_cells.is_empty() || to_cells.is_empty() {
        return Err(no_path());
    }
    let mut is_goal_cell = vec![false; n];
    for &c in &to_cells {
        is_goal_cell[c] = true;
    }
    let pos = |node: usize| match node {
        x if x == start => from,
        x if x == goal => to,
        x => grid.center(x),
    };
    let mut cost = vec![f64::INFINITY; n + 2];
    let mut parent = vec![usize::MAX; n + 2];
    let mut heap = BinaryHeap::new();
    cost[start] = 0.0;
    heap.push(Open {
        f: from.distance(to),
        node: start,
    });
    while let Some(Open { f, node }) = heap.pop() {
        if node == goal {
            break;
        }
        let g = cost[node];
        if f > g + pos(node).distance(to) + 1e-12 {
            continue;
        }
        let mut relax = |next: usize, heap: &mut BinaryHeap<Open>| {
            let ng = g + pos(node).distance(pos(next));
            if ng < cost[next] {
                cost[next] = ng;
                parent[next] = node;
                heap.push(Open {
                    f: ng + pos(next).distance(to),
                    node: next,
                });
            }
        };
        if node == start {
            for &c in &from_cells {
                relax(c, &mut heap);
            }
            continue;
        }
        if is_goal_cell[node] {
            relax(goal, &mut heap);
        }
        let (i, j) = ((node % grid.nx) as i64, (node / grid.nx) as i64);
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
            if let Some(next) = grid.index(i + di, j + dj) {
                if free(next) {
                    relax(next, &mut heap);
                }
            }
        }
    }
    if parent[goal] == usize::MAX {
        return Err(no_path());
    }
    let mut chain = vec![to];
    let mut node = parent[goal];
    while node != start {
        chain.push(pos(node));
        node = parent[node];
    }
    chain.push(from);
    chain.reverse();
    let mut smooth = vec![chain[0]];
    let mut i = 0;
    while i + 1 < chain.len() {
        let mut j = chain.len() - 1;
        while j > i + 1 && map.segment_clearance(chain[i], chain[j]) < margin {
            j -= 1;
        }
        smooth.push(chain[j]);
        i = j;
    }
    RefPath::polyline(&smooth).map_err(|_| no_path())
}

/// Margin the planner keeps from the known map: `r + max ρ + 2ε`.
pub fn planning_margin(s: &Scenario) -> f64 {
    s.robot.radius + s.max_object_radius() + 2.0 * s.epsilon()
}

/// Plans, for each object in input order, a reach path and a transport
/// path, then an optional final move to the nest. Unknown obstacles and
/// other objects are ignored; the reactive layer handles them.
pub fn deliberative_plan(s: &Scenario) -> Result<Plan, PlanError> {
    let map = KnownMap::new(s);
    let grid = Grid::new(&map);
    let declared = planning_margin(s);
    let margin_for = |a: Vec2, b: Vec2| declared.min(map.clearance(a)).min(map.clearance(b)) * (1.0 - 1e-9);
    let mut actions = Vec::new();
    let mut at = s.robot.start;
    for obj in &s.objects {
        let m = margin_for(at, obj.center);
        if m <= 0.0 {
            return Err(PlanError::NoPath {
                from: at,
                to: obj.center,
                margin: m,
            });
        }
        let reach = plan_path(&map, &grid, at, obj.center, m)?;
        actions.push(SymbolicAction {
            kind: ActionKind::MoveToObject(obj.id),
            path: reach,
        });
        let m = margin_for(obj.center, obj.goal);
        let carry = plan_path(&map, &grid, obj.center, obj.goal, m)?;
        let dir = if carry.length() > 0.0 {
            carry.tangent(1.0).expect("alpha in range")
        } else {
            (obj.center - at).normalized().unwrap_or(Vec2::new(1.0, 0.0))
        };
        at = obj.goal - dir * (obj.radius + s.robot.radius);
        actions.push(SymbolicAction {
            kind: ActionKind::PositionObject(obj.id),
            path: carry,
        });
    }
    if let Some(nest) = s.params.nest {
        let m = margin_for(at, nest);
        let path = plan_path(&map, &grid, at, nest, m)?;
        actions.push(SymbolicAction {
            kind: ActionKind::Move,
            path,
        });
    }
    Ok(Plan { actions })
}
