//! Reactive navigation and rearrangement of movable disks in a workspace
//! cluttered with unknown convex obstacles.

pub mod executive;
pub mod geometry;
pub mod grasp;
pub mod io;
pub mod reactive;
pub mod scenarios;
pub mod sensing;
pub mod sim;
pub mod world;

pub use executive::{deliberative_plan, ActionKind, Plan, PlanError, SymbolicAction};
pub use geometry::{ConvexRegion, GeometryError, Mat2, RefPath, Segment, Vec2};
pub use io::{load_scenario, parse_scenario, scenario_to_json, IoError};
pub use reactive::{Command, Drive, NavConfig, NavMode, NavState, Turn};
pub use sensing::{lidar_scan, Scan, SensingError};
pub use sim::{run_plan, ActionReport, Engine, Failure, Record, RunSummary, SimConfig};
pub use world::{
    collision_clearance, compute_eta, validate_assumptions, AssumptionReport, Feature,
    MalformedScenario, MovableObject, Obstacle, Params, RobotSpec, RobotState, Scenario, Scene,
    Shape, Workspace,
};
