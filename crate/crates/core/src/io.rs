//! Scenario files, trajectory CSV export and static SVG figures.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{RefPath, Vec2};
use crate::sim::Record;
use crate::world::{
    bounds_of, MalformedScenario, MovableObject, Obstacle, Params, RobotSpec, Scenario, Shape,
    Workspace,
};

pub const FORMAT_VERSION: u32 = 1;

pub const CSV_HEADER: &str = "t,x,y,psi,mode,a,alpha,v,omega,d_sensed,clearance,obj_x,obj_y";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error(transparent)]
    Malformed(#[from] MalformedScenario),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleEntry {
    id: u32,
    #[serde(default)]
    known: bool,
    shape: Shape,
}

/// On-disk scenario layout. `walls` are known convex polygons given without
/// ids; they are numbered after the largest obstacle id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    version: u32,
    #[serde(default)]
    name: String,
    workspace: Vec<Vec2>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    walls: Vec<Vec<Vec2>>,
    #[serde(default)]
    obstacles: Vec<ObstacleEntry>,
    #[serde(default)]
    objects: Vec<MovableObject>,
    robot: RobotSpec,
    #[serde(default)]
    params: Params,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, IoError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| {
        // serde_json appends the position to its message; it is reported separately.
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        IoError::Syntax {
            line: e.line(),
            column: e.column(),
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
        }
    })?;
    if file.version != FORMAT_VERSION {
        return Err(IoError::Version(file.version));
    }
    let workspace = Workspace::new(file.workspace)?;
    let mut obstacles = file
        .obstacles
        .into_iter()
        .map(|o| Obstacle::new(o.id, o.shape, o.known))
        .collect::<Result<Vec<_>, _>>()?;
    let first = obstacles.iter().map(|o| o.id + 1).max().unwrap_or(0);
    for (id, vertices) in (first..).zip(file.walls) {
        obstacles.push(Obstacle::new(id, Shape::Polygon { vertices }, true)?);
    }
    Ok(Scenario::new(
        file.name,
        workspace,
        obstacles,
        file.objects,
        file.robot,
        file.params,
    )?)
}

/// Serializes `s`; walls are written as ordinary known obstacles.
pub fn scenario_to_json(s: &Scenario) -> String {
    let file = ScenarioFile {
        version: FORMAT_VERSION,
        name: s.name.clone(),
        workspace: s.workspace.vertices().to_vec(),
        walls: Vec::new(),
        obstacles: s
            .obstacles
            .iter()
            .map(|o| ObstacleEntry {
                id: o.id,
                known: o.known,
                shape: o.shape.clone(),
            })
            .collect(),
        objects: s.objects.clone(),
        robot: s.robot.clone(),
        params: s.params.clone(),
    };
    let pretty = serde_json::to_string_pretty(&file).expect("scenario serializes");
    compact_pairs(&pretty)
}

/// Puts two-number arrays on one line: `[x, y]`.
fn compact_pairs(pretty: &str) -> String {
    let lines: Vec<&str> = pretty.lines().collect();
    let mut out = String::with_capacity(pretty.len());
    let mut i = 0;
    let is_num = |l: &str| l.trim().trim_end_matches(',').parse::<f64>().is_ok();
    while i < lines.len() {
        let l = lines[i];
        if l.ends_with('[') && i + 3 < lines.len() && is_num(lines[i + 1]) && is_num(lines[i + 2]) {
            let close = lines[i + 3].trim();
            if close == "]" || close == "]," {
                let _ = writeln!(
                    out,
                    "{}{}, {}{}",
                    l,
                    lines[i + 1].trim().trim_end_matches(','),
                    lines[i + 2].trim(),
                    close
                );
                i += 4;
                continue;
            }
        }
        out.push_str(l);
        out.push('\n');
        i += 1;
    }
    out
}

pub fn load_scenario(path: &Path) -> Result<Scenario, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

/// Formats `x` with `sig` significant digits, fixed-point for moderate
/// magnitudes and exponent form otherwise.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_trajectory_csv<W: std::io::Write>(mut w: W, records: &[Record]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    let f = |x: f64| fmt_sig(x, 9);
    for r in records {
        let (ox, oy) = match r.object {
            Some(p) => (f(p.x), f(p.y)),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f(r.t),
            f(r.position.x),
            f(r.position.y),
            f(r.heading),
            r.phase.tag(),
            r.turn,
            f(r.alpha),
            f(r.v),
            f(r.omega),
            f(r.d_sensed),
            f(r.clearance),
            ox,
            oy
        )?;
    }
    Ok(())
}

pub fn trajectory_csv(records: &[Record]) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

const MAX_SVG_POINTS: usize = 2000;

/// Bounding box of the workspace and every obstacle.
pub fn scene_bounds(s: &Scenario) -> (Vec2, Vec2) {
    let mut pts: Vec<Vec2> = s.workspace.vertices().to_vec();
    for o in &s.obstacles {
        let (c, r) = o.bounding_circle();
        pts.push(c - Vec2::new(r, r));
        pts.push(c + Vec2::new(r, r));
    }
    bounds_of(&pts)
}

/// Static figure: workspace outline, known obstacles in black, unknown ones
/// in grey, reference paths, robot and object traces, object goals.
pub fn render_svg(s: &Scenario, paths: &[RefPath], trajectories: &[&[Record]]) -> String {
    let (lo, hi) = scene_bounds(s);
    let size = hi - lo;
    let pad = size * 0.05;
    let stroke = 0.002 * size.x.max(size.y);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        num(lo.x - pad.x),
        num(-(hi.y + pad.y)),
        num(size.x + 2.0 * pad.x),
        num(size.y + 2.0 * pad.y)
    );
    let _ = writeln!(
        out,
        r#"<polygon points="{}" fill="white" stroke="black" stroke-width="{}"/>"#,
        points(s.workspace.vertices().iter().copied()),
        num(2.0 * stroke)
    );
    for o in &s.obstacles {
        let fill = if o.known { "black" } else { "grey" };
        match &o.shape {
            Shape::Disk { center, radius } => {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
                    num(center.x),
                    num(-center.y),
                    num(*radius)
                );
            }
            Shape::Polygon { vertices } => {
                let _ = writeln!(
                    out,
                    r#"<polygon points="{}" fill="{fill}"/>"#,
                    points(vertices.iter().copied())
                );
            }
        }
    }
    for p in paths {
        let n = 400;
        let samples = (0..=n).filter_map(|i| p.eval(i as f64 / n as f64).ok());
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="purple" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
            points(samples),
            num(stroke),
            num(4.0 * stroke),
            num(2.0 * stroke)
        );
    }
    for rec in trajectories {
        let every = rec.len().div_ceil(MAX_SVG_POINTS).max(1);
        let thin = || rec.iter().enumerate().filter(move |(i, _)| i % every == 0 || *i + 1 == rec.len());
        let robot = thin().map(|(_, r)| r.position);
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="blue" stroke-width="{}"/>"#,
            points(robot),
            num(stroke)
        );
        let object: Vec<Vec2> = thin().filter_map(|(_, r)| r.object).collect();
        if object.len() > 1 {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="red" stroke-width="{}"/>"#,
                points(object.into_iter()),
                num(stroke)
            );
        }
    }
    for o in &s.objects {
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="red" stroke-width="{}"/>"#,
            num(o.center.x),
            num(-o.center.y),
            num(o.radius),
            num(stroke)
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="red" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
            num(o.goal.x),
            num(-o.goal.y),
            num(o.radius),
            num(stroke),
            num(2.0 * stroke),
            num(2.0 * stroke)
        );
    }
    let start = s.robot.start;
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{}" r="{}" fill="blue" fill-opacity="0.4"/>"#,
        num(start.x),
        num(-start.y),
        num(s.robot.radius)
    );
    out.push_str("</svg>\n");
    out
}

fn num(x: f64) -> String {
    fmt_sig(x, 6)
}

fn points(it: impl Iterator<Item = Vec2>) -> String {
    let mut s = String::new();
    for p in it {
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{},{}", num(p.x), num(-p.y));
    }
    s
}
