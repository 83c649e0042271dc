//! Fixed-step closed-loop simulation of the differential-drive robot, with
//! the grasp constraint, invariant monitors and trajectory recording.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::executive::{ActionKind, Plan, SymbolicAction};
use crate::geometry::{wrap_angle, RefPath, Vec2};
use crate::grasp::{
    carried_arrived, final_positioning_law, navigate_robot_object_step, GraspError, GraspFrame,
};
use crate::reactive::{
    navigate_step, rotation_law, Command, Drive, ModeEvent, NavConfig, NavOutput, NavState,
    ReactiveError, Turn,
};
use crate::sensing::{lidar_scan, local_free_space, SensingError};
use crate::world::{collision_clearance, Feature, RobotState, Scenario, Scene};

/// Ground-truth penetration beyond this aborts a run.
pub const COLLISION_TOL: f64 = 1e-6;
/// Heading error regarded as aligned with the wall tangent.
pub const ALIGNMENT_TOL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub h: f64,
    /// Integration step cap per action.
    pub max_steps: u64,
    pub rays: usize,
    pub delta: f64,
    pub nav: NavConfig,
    /// Drive used for free navigation. Rotation and carrying phases are
    /// always unicycle.
    pub drive: Drive,
}

impl SimConfig {
    pub fn from_scenario(s: &Scenario) -> Self {
        let p = &s.params;
        SimConfig {
            h: p.h,
            max_steps: p.max_steps,
            rays: p.rays,
            delta: p.delta,
            nav: NavConfig::new(p.k, s.epsilon()),
            drive: Drive::Unicycle,
        }
    }
}

/// One RK4 step of `ẋ = v (cos ψ, sin ψ)`, `ψ̇ = ω` under constant inputs.
pub fn step(state: &RobotState, v: f64, omega: f64, h: f64) -> RobotState {
    let psi = state.heading;
    let f = |a: f64| Vec2::from_angle(a) * v;
    let k1 = f(psi);
    let k2 = f(psi + 0.5 * h * omega);
    let k4 = f(psi + h * omega);
    let dx = (k1 + k2 * 4.0 + k4) * (h / 6.0);
    RobotState {
        position: state.position + dx,
        heading: wrap_angle(psi + h * omega),
        grasped: state.grasped,
    }
}

/// Exact flow of a holonomic point under constant velocity.
pub fn step_holonomic(state: &RobotState, u: Vec2, h: f64) -> RobotState {
    RobotState {
        position: state.position + u * h,
        ..*state
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Path,
    Wall,
    Align,
    Place,
    Retreat,
}

impl Phase {
    pub fn tag(self) -> &'static str {
        match self {
            Phase::Path => "path",
            Phase::Wall => "wall",
            Phase::Align => "align",
            Phase::Place => "place",
            Phase::Retreat => "retreat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub position: Vec2,
    pub heading: f64,
    pub phase: Phase,
    /// Wall-following direction, 0 outside wall following.
    pub turn: i8,
    pub alpha: f64,
    pub v: f64,
    pub omega: f64,
    pub d_sensed: f64,
    pub clearance: f64,
    pub object: Option<Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeEnd {
    Exited,
    ActionEnded,
    Aborted,
}

/// Statistics of one wall-following episode.
#[derive(Debug, Clone, PartialEq)]
pub struct WallEpisode {
    pub start_time: f64,
    pub end_time: f64,
    pub end: EpisodeEnd,
    pub turn: Turn,
    pub carrying: bool,
    pub steps: u64,
    /// Ground-truth features nearest to the sensed wall point.
    pub features: BTreeSet<Feature>,
    /// Largest `|u · t_w − k a ε √3/2|` over in-band steps.
    pub max_progress_residual: f64,
    pub progress_sign_ok: bool,
    /// Wall-following steps taken with the clearance at or above the band,
    /// where the progress rate is not regulated.
    pub unregulated_steps: u64,
    pub min_clearance: f64,
    pub max_clearance: f64,
    /// Last step (1-based, within the episode) whose heading was at least
    /// [`ALIGNMENT_TOL`] away from `a t_w`; 0 if none. Unicycle only.
    pub last_misaligned: u64,
    pub max_misalignment: f64,
    /// Clearance at the path-following step that triggered entry.
    pub entry_clearance: f64,
}

impl WallEpisode {
    fn new(t: f64, turn: Turn, carrying: bool, entry_clearance: f64) -> Self {
        WallEpisode {
            start_time: t,
            end_time: t,
            end: EpisodeEnd::ActionEnded,
            turn,
            carrying,
            steps: 0,
            features: BTreeSet::new(),
            max_progress_residual: 0.0,
            progress_sign_ok: true,
            unregulated_steps: 0,
            min_clearance: f64::INFINITY,
            max_clearance: f64::NEG_INFINITY,
            last_misaligned: 0,
            max_misalignment: 0.0,
            entry_clearance,
        }
    }

    /// Steps at the end of the episode during which the heading stayed
    /// aligned with the wall tangent.
    pub fn aligned_tail(&self) -> u64 {
        self.steps - self.last_misaligned
    }

    /// Whether the same feature was tracked for the whole episode.
    pub fn locked(&self) -> bool {
        self.features.len() <= 1
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Failure {
    #[error("step cap of {0} reached")]
    Timeout(u64),
    #[error("collision at t = {t:.4} s (clearance {clearance:.3e} m)")]
    Collision { t: f64, clearance: f64 },
    #[error("object {id} is not in contact (gap {gap:.4} m)")]
    NoContact { id: u32, gap: f64 },
    #[error("action precondition violated: {0}")]
    Precondition(String),
    #[error("controller failure: {0}")]
    Control(String),
}

impl From<ReactiveError> for Failure {
    fn from(e: ReactiveError) -> Self {
        Failure::Control(e.to_string())
    }
}

impl From<GraspError> for Failure {
    fn from(e: GraspError) -> Self {
        Failure::Control(e.to_string())
    }
}

impl From<SensingError> for Failure {
    fn from(e: SensingError) -> Self {
        Failure::Control(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionReport {
    pub index: usize,
    pub kind: ActionKind,
    pub outcome: Result<(), Failure>,
    pub records: Vec<Record>,
    pub steps: u64,
    pub min_clearance: f64,
    pub episodes: Vec<WallEpisode>,
    /// Distance the object was moved to close the contact at grasp time.
    pub snap: Option<f64>,
    /// Object placement error after release.
    pub placement_error: Option<f64>,
}

impl ActionReport {
    pub fn succeeded(&self) -> bool {
        self.outcome.is_ok()
    }
}

/// Simulation state of one scenario.
pub struct Engine<'a> {
    pub scenario: &'a Scenario,
    pub cfg: SimConfig,
    pub state: RobotState,
    pub objects: Vec<Vec2>,
    pub t: f64,
    steps: u64,
    records: Vec<Record>,
    episodes: Vec<WallEpisode>,
    min_clearance: f64,
    clearance: f64,
}

impl<'a> Engine<'a> {
    pub fn new(scenario: &'a Scenario, cfg: SimConfig) -> Self {
        let mut e = Engine {
            scenario,
            cfg,
            state: scenario.initial_state(),
            objects: scenario.initial_object_positions(),
            t: 0.0,
            steps: 0,
            records: Vec::new(),
            episodes: Vec::new(),
            min_clearance: f64::INFINITY,
            clearance: 0.0,
        };
        e.clearance = e.ground_truth(None);
        e
    }

    pub fn scene(&self, hidden: Option<usize>) -> Scene<'_> {
        Scene::new(self.scenario, &self.objects, hidden.or(self.state.grasped))
    }

    fn ground_truth(&self, hidden: Option<usize>) -> f64 {
        collision_clearance(&self.scene(hidden), &self.state)
    }

    pub fn grasp_frame(&self) -> Option<GraspFrame> {
        self.state.grasped.map(|i| {
            GraspFrame::new(
                self.state.position,
                self.state.heading,
                self.scenario.objects[i].radius,
                self.scenario.robot.radius,
            )
        })
    }

    /// Clears per-action bookkeeping.
    pub fn begin_action(&mut self, hidden: Option<usize>) {
        self.steps = 0;
        self.records.clear();
        self.episodes.clear();
        self.clearance = self.ground_truth(hidden);
        self.min_clearance = self.clearance;
    }

    /// Closes the action, returning its trace and monitor data.
    pub fn end_action(
        &mut self,
        index: usize,
        kind: ActionKind,
        outcome: Result<(), Failure>,
    ) -> ActionReport {
        let last = self.records.last().copied();
        let phase = last.map_or(Phase::Path, |r| r.phase);
        let rec = Record {
            t: self.t,
            position: self.state.position,
            heading: self.state.heading,
            phase,
            turn: 0,
            alpha: last.map_or(0.0, |r| r.alpha),
            v: 0.0,
            omega: 0.0,
            d_sensed: last.map_or(f64::NAN, |r| r.d_sensed),
            clearance: self.clearance,
            object: self.grasp_frame().map(|f| f.object_position()),
        };
        if last.is_none_or(|r| r.t < rec.t) {
            self.records.push(rec);
        }
        let end = if outcome.is_ok() {
            EpisodeEnd::ActionEnded
        } else {
            EpisodeEnd::Aborted
        };
        for ep in &mut self.episodes {
            if ep.end != EpisodeEnd::Exited {
                ep.end = end;
                ep.end_time = self.t;
            }
        }
        ActionReport {
            index,
            kind,
            outcome,
            records: std::mem::take(&mut self.records),
            steps: self.steps,
            min_clearance: self.min_clearance,
            episodes: std::mem::take(&mut self.episodes),
            snap: None,
            placement_error: None,
        }
    }

    fn tick(&mut self) -> Result<(), Failure> {
        if self.steps >= self.cfg.max_steps {
            return Err(Failure::Timeout(self.steps));
        }
        self.steps += 1;
        Ok(())
    }

    /// Applies a command for one step and checks the collision monitor.
    fn advance(&mut self, cmd: Command, hidden: Option<usize>) -> Result<(), Failure> {
        self.state = match cmd {
            Command::Unicycle { v, omega } => step(&self.state, v, omega, self.cfg.h),
            Command::Holonomic(u) => step_holonomic(&self.state, u, self.cfg.h),
        };
        self.t += self.cfg.h;
        self.clearance = self.ground_truth(hidden);
        self.min_clearance = self.min_clearance.min(self.clearance);
        if self.clearance < -COLLISION_TOL {
            return Err(Failure::Collision {
                t: self.t,
                clearance: self.clearance,
            });
        }
        Ok(())
    }

    fn record(&mut self, phase: Phase, turn: i8, alpha: f64, cmd: Command, d_sensed: f64) {
        let (v, omega) = match cmd {
            Command::Unicycle { v, omega } => (v, omega),
            Command::Holonomic(u) => (u.norm(), 0.0),
        };
        self.records.push(Record {
            t: self.t,
            position: self.state.position,
            heading: self.state.heading,
            phase,
            turn,
            alpha,
            v,
            omega,
            d_sensed,
            clearance: self.clearance,
            object: self.grasp_frame().map(|f| f.object_position()),
        });
    }

    /// Updates wall-following statistics from one controller evaluation.
    fn monitor(&mut self, out: &NavOutput, scene_hidden: Option<usize>, wall_point: Option<Vec2>, carrying: bool) {
        let k = self.cfg.nav.k;
        let eps = self.cfg.nav.eps;
        if let (Some(w), true) = (out.wall, out.mode_used.is_wall_following()) {
            let feature = wall_point.map(|p| self.scene(scene_hidden).nearest_feature(p).0);
            let heading = self.state.heading;
            let ep = self
                .episodes
                .last_mut()
                .expect("wall-following step without an open episode");
            ep.steps += 1;
            if let Some(f) = feature {
                ep.features.insert(f);
            }
            ep.min_clearance = ep.min_clearance.min(out.clearance);
            ep.max_clearance = ep.max_clearance.max(out.clearance);
            if out.clearance < eps {
                let expected = k * w.turn.sign() * eps * 0.75f64.sqrt();
                let along = out.velocity.dot(w.tangent);
                ep.max_progress_residual = ep.max_progress_residual.max((along - expected).abs());
                if along.signum() != w.turn.sign() {
                    ep.progress_sign_ok = false;
                }
            } else {
                ep.unregulated_steps += 1;
            }
            if !carrying {
                let err = wrap_angle(heading - (w.tangent * w.turn.sign()).angle()).abs();
                ep.max_misalignment = ep.max_misalignment.max(err);
                if err >= ALIGNMENT_TOL {
                    ep.last_misaligned = ep.steps;
                }
            }
        }
        match out.event {
            Some(ModeEvent::EnteredWall { turn, .. }) => {
                self.episodes
                    .push(WallEpisode::new(self.t, turn, carrying, out.clearance));
            }
            Some(ModeEvent::LeftWall) => {
                if let Some(ep) = self.episodes.last_mut() {
                    ep.end = EpisodeEnd::Exited;
                    ep.end_time = self.t + self.cfg.h;
                }
            }
            None => {}
        }
    }

    /// Free navigation along `path` until `‖x − 𝒫(1)‖ ≤ δ`. `hidden`
    /// removes an object from sensing and from the collision monitor.
    pub fn navigate(&mut self, path: &RefPath, hidden: Option<usize>) -> Result<(), Failure> {
        if self.state.grasped.is_some() {
            return Err(Failure::Precondition("gripper engaged".into()));
        }
        let r = self.scenario.robot.radius;
        let mut nav = NavState::default();
        while self.state.position.distance(path.end()) > self.cfg.delta {
            self.tick()?;
            let scan = lidar_scan(&self.scene(hidden), self.state.position, self.cfg.rays)?;
            let out = navigate_step(
                path,
                &scan,
                self.state.heading,
                r,
                &nav,
                &self.cfg.nav,
                self.cfg.drive,
            )?;
            let wall_point = out.wall.map(|w| scan.point(w.ray));
            self.monitor(&out, hidden, wall_point, false);
            let (phase, turn) = phase_of(&out);
            self.record(phase, turn, out.alpha, out.command, out.clearance);
            nav = out.state;
            self.advance(out.command, hidden)?;
        }
        Ok(())
    }

    /// Turns in place until the heading points at `target` within δ.
    pub fn align_with(&mut self, target: Vec2, hidden: Option<usize>) -> Result<(), Failure> {
        let k = self.cfg.nav.k;
        loop {
            let phi = (target - self.state.position).angle();
            if wrap_angle(phi - self.state.heading).abs() <= self.cfg.delta {
                return Ok(());
            }
            self.tick()?;
            let cmd = Command::Unicycle {
                v: 0.0,
                omega: rotation_law(self.state.heading, phi, k),
            };
            self.record(Phase::Align, 0, 1.0, cmd, f64::NAN);
            self.advance(cmd, hidden)?;
        }
    }

    /// Engages the gripper on object `i`, snapping it to the exact contact
    /// point. Returns the snap distance.
    pub fn engage(&mut self, i: usize) -> Result<f64, Failure> {
        let obj = &self.scenario.objects[i];
        let r = self.scenario.robot.radius;
        let gap = (self.objects[i].distance(self.state.position) - obj.radius - r).abs();
        if gap > self.cfg.delta {
            return Err(Failure::NoContact { id: obj.id, gap });
        }
        self.state.grasped = Some(i);
        let frame = self.grasp_frame().expect("just engaged");
        let snapped = frame.object_position();
        let snap = snapped.distance(self.objects[i]);
        self.objects[i] = snapped;
        self.clearance = self.ground_truth(None);
        Ok(snap)
    }

    pub fn release(&mut self) {
        if let Some(frame) = self.grasp_frame() {
            let i = self.state.grasped.take().expect("grasp frame implies grasp");
            self.objects[i] = frame.object_position();
        }
    }

    /// Carries the grasped object along `path` with its circumscribed
    /// center until `‖x_c − 𝒫(1)‖ ≤ r + δ`.
    pub fn navigate_carrying(&mut self, path: &RefPath) -> Result<(), Failure> {
        let Some(i) = self.state.grasped else {
            return Err(Failure::Precondition("gripper not engaged".into()));
        };
        let mut nav = NavState::default();
        loop {
            let frame = self.grasp_frame().expect("grasped");
            if carried_arrived(&frame, path, self.cfg.delta) {
                return Ok(());
            }
            self.tick()?;
            let scan = lidar_scan(&self.scene(None), self.state.position, self.cfg.rays)?;
            let step = navigate_robot_object_step(path, &scan, &frame, &nav, &self.cfg.nav)?;
            let wall_point = step.nav.wall.map(|w| step.scan.point(w.ray));
            self.monitor(&step.nav, Some(i), wall_point, true);
            let (phase, turn) = phase_of(&step.nav);
            self.record(phase, turn, step.nav.alpha, step.nav.command, step.nav.clearance);
            nav = step.nav.state;
            self.advance(step.nav.command, None)?;
            self.sync_grasped();
        }
    }

    /// Drives the grasped object center to `goal` within δ.
    pub fn place(&mut self, goal: Vec2) -> Result<(), Failure> {
        if self.state.grasped.is_none() {
            return Err(Failure::Precondition("gripper not engaged".into()));
        }
        loop {
            let frame = self.grasp_frame().expect("grasped");
            if frame.object_position().distance(goal) <= self.cfg.delta {
                return Ok(());
            }
            self.tick()?;
            let (v, omega) = final_positioning_law(&frame, goal, self.cfg.nav.k);
            let cmd = Command::Unicycle { v, omega };
            self.record(Phase::Place, 0, 1.0, cmd, f64::NAN);
            self.advance(cmd, None)?;
            self.sync_grasped();
        }
    }

    /// Backs straight away from a just-released object by up to `distance`,
    /// and by at most half the room the local free space leaves behind the
    /// robot. Returns the distance travelled.
    pub fn retreat(&mut self, distance: f64) -> Result<f64, Failure> {
        if self.state.grasped.is_some() {
            return Err(Failure::Precondition("gripper still engaged".into()));
        }
        let x = self.state.position;
        let scan = lidar_scan(&self.scene(None), x, self.cfg.rays)?;
        let lf = local_free_space(&scan, self.scenario.robot.radius)?;
        let room = lf
            .line_slice(x, -self.state.heading_vector())
            .map_or(0.0, |(_, hi)| hi.max(0.0));
        let dist = distance.min(0.5 * room);
        if dist <= 0.0 {
            return Ok(0.0);
        }
        let h = self.cfg.h;
        let n = (dist / (self.cfg.nav.k * distance * h)).ceil().max(1.0);
        let cmd = Command::Unicycle {
            v: -dist / (n * h),
            omega: 0.0,
        };
        for _ in 0..n as u64 {
            self.tick()?;
            self.record(Phase::Retreat, 0, 1.0, cmd, f64::NAN);
            self.advance(cmd, None)?;
        }
        Ok(dist)
    }

    fn sync_grasped(&mut self) {
        if let (Some(i), Some(f)) = (self.state.grasped, self.grasp_frame()) {
            self.objects[i] = f.object_position();
        }
    }
}

fn phase_of(out: &NavOutput) -> (Phase, i8) {
    match out.mode_used.turn() {
        Some(t) => (Phase::Wall, t.sign() as i8),
        None => (Phase::Path, 0),
    }
}

/// Runs one symbolic action on the engine.
pub fn run_action(engine: &mut Engine<'_>, index: usize, action: &SymbolicAction) -> ActionReport {
    crate::executive::execute(engine, index, action)
}

/// Summary of a whole plan execution.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub actions: Vec<ActionReport>,
    /// Final distance of each object from its goal, in scenario order.
    pub placement_errors: Vec<f64>,
    pub min_clearance: f64,
    pub wall_episodes: usize,
    /// Whether every action succeeded.
    pub success: bool,
}

/// Executes `plan` in order, stopping at the first failed action.
pub fn run_plan(scenario: &Scenario, plan: &Plan, cfg: SimConfig) -> RunSummary {
    let mut engine = Engine::new(scenario, cfg);
    let mut actions = Vec::new();
    for (i, a) in plan.actions.iter().enumerate() {
        let report = run_action(&mut engine, i, a);
        let ok = report.succeeded();
        actions.push(report);
        if !ok {
            break;
        }
    }
    let placement_errors = scenario
        .objects
        .iter()
        .zip(&engine.objects)
        .map(|(o, p)| o.goal.distance(*p))
        .collect();
    let min_clearance = actions
        .iter()
        .map(|a| a.min_clearance)
        .fold(f64::INFINITY, f64::min);
    let wall_episodes = actions.iter().map(|a| a.episodes.len()).sum();
    let success = actions.len() == plan.actions.len() && actions.iter().all(|a| a.succeeded());
    RunSummary {
        actions,
        placement_errors,
        min_clearance,
        wall_episodes,
        success,
    }
}
