//! Reference paths: continuous chains of line and circular-arc segments,
//! parametrized on `[0, 1]` by normalized arclength.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::vec2::Vec2;
use super::GeometryError;

const JOIN_TOL: f64 = 1e-9;
const MIN_SEGMENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Line {
        start: Vec2,
        end: Vec2,
    },
    /// Arc of `radius` about `center`, starting at polar angle `start_angle`
    /// and sweeping `sweep` radians (positive is counter-clockwise).
    Arc {
        center: Vec2,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { start, end } => start.distance(end),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn start(&self) -> Vec2 {
        self.point_at(0.0)
    }

    pub fn end(&self) -> Vec2 {
        self.point_at(self.length())
    }

    /// Point at arclength `s` from the segment start.
    pub fn point_at(&self, s: f64) -> Vec2 {
        match *self {
            Segment::Line { start, end } => {
                let len = start.distance(end);
                if len <= 0.0 {
                    start
                } else if s >= len {
                    end
                } else {
                    start.lerp(end, s / len)
                }
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let t = if radius > 0.0 { s / radius } else { 0.0 };
                center + Vec2::from_angle(start_angle + sweep.signum() * t) * radius
            }
        }
    }

    /// Unit tangent at arclength `s`, in the direction of travel.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        match *self {
            Segment::Line { start, end } => (end - start).normalized().unwrap_or(Vec2::new(1.0, 0.0)),
            Segment::Arc {
                radius,
                start_angle,
                sweep,
                ..
            } => {
                let t = if radius > 0.0 { s / radius } else { 0.0 };
                let dir = sweep.signum();
                Vec2::from_angle(start_angle + dir * t).perp() * dir
            }
        }
    }

    /// Sub-segment covering arclength `[0, s]`.
    pub fn head(&self, s: f64) -> Segment {
        match *self {
            Segment::Line { start, .. } => Segment::Line {
                start,
                end: self.point_at(s),
            },
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => Segment::Arc {
                center,
                radius,
                start_angle,
                sweep: sweep.signum() * (s / radius),
            },
        }
    }

    /// Arclength positions in `[0, len]` where the segment crosses the
    /// circle `|p - center| = radius`. Tangencies are reported once.
    fn circle_crossings(&self, c: Vec2, r: f64, out: &mut Vec<f64>) {
        let len = self.length();
        match *self {
            Segment::Line { start, end } => {
                if len <= 0.0 {
                    return;
                }
                let u = (end - start) / len;
                let w = start - c;
                let b = u.dot(w);
                let cc = w.norm_sq() - r * r;
                let disc = b * b - cc;
                let scale = 1e-12 * (w.norm_sq() + r * r).max(1.0);
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for s in [-b - sq, -b + sq] {
                        if (-1e-12..=len + 1e-12).contains(&s) {
                            out.push(s.clamp(0.0, len));
                        }
                    }
                } else if disc > -scale {
                    let s = -b;
                    if (0.0..=len).contains(&s) {
                        out.push(s);
                    }
                }
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let d = c.distance(center);
                if radius <= 0.0 || d <= 0.0 {
                    return;
                }
                if d > radius + r || d < (radius - r).abs() {
                    return;
                }
                let cos_g = ((radius * radius + d * d - r * r) / (2.0 * radius * d)).clamp(-1.0, 1.0);
                let g = cos_g.acos();
                let base = (c - center).angle();
                let span = sweep.abs();
                for ang in [base - g, base + g] {
                    let t = (sweep.signum() * (ang - start_angle)).rem_euclid(2.0 * PI);
                    let t = if t > span && 2.0 * PI - t < 1e-12 { 0.0 } else { t };
                    if t <= span + 1e-12 {
                        out.push((t.min(span)) * radius);
                    }
                }
            }
        }
    }
}

/// Piecewise continuously differentiable path `P : [0, 1] -> R²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct RefPath {
    segments: Vec<Segment>,
    offsets: Vec<f64>,
    length: f64,
}

impl TryFrom<Vec<Segment>> for RefPath {
    type Error = GeometryError;
    fn try_from(segments: Vec<Segment>) -> Result<Self, Self::Error> {
        RefPath::new(segments)
    }
}

impl From<RefPath> for Vec<Segment> {
    fn from(p: RefPath) -> Self {
        p.segments
    }
}

impl RefPath {
    /// Chains `segments`; consecutive segments must join within `1e-9`.
    /// Zero-length segments are dropped unless the whole path is a point.
    pub fn new(segments: Vec<Segment>) -> Result<Self, GeometryError> {
        if segments.is_empty() {
            return Err(GeometryError::InvalidInput("path has no segments"));
        }
        for w in segments.windows(2) {
            if w[0].end().distance(w[1].start()) > JOIN_TOL {
                return Err(GeometryError::Discontinuous);
            }
        }
        let first = segments[0];
        let mut kept: Vec<Segment> = segments
            .into_iter()
            .filter(|s| s.length() > MIN_SEGMENT)
            .collect();
        if kept.is_empty() {
            let p = first.start();
            kept.push(Segment::Line { start: p, end: p });
        }
        let mut offsets = Vec::with_capacity(kept.len());
        let mut acc = 0.0;
        for s in &kept {
            offsets.push(acc);
            acc += s.length();
        }
        Ok(RefPath {
            segments: kept,
            offsets,
            length: acc,
        })
    }

    pub fn line(a: Vec2, b: Vec2) -> Self {
        RefPath::new(vec![Segment::Line { start: a, end: b }]).expect("single segment is continuous")
    }

    /// Polyline through `points` (at least one).
    pub fn polyline(points: &[Vec2]) -> Result<Self, GeometryError> {
        match points.len() {
            0 => Err(GeometryError::InvalidInput("polyline needs a point")),
            1 => Ok(RefPath::line(points[0], points[0])),
            _ => RefPath::new(
                points
                    .windows(2)
                    .map(|w| Segment::Line {
                        start: w[0],
                        end: w[1],
                    })
                    .collect(),
            ),
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn start(&self) -> Vec2 {
        self.segments[0].start()
    }

    pub fn end(&self) -> Vec2 {
        self.segments[self.segments.len() - 1].end()
    }

    /// Breakpoints of the chain: the start point and every segment end.
    pub fn vertices(&self) -> Vec<Vec2> {
        let mut v = vec![self.start()];
        v.extend(self.segments.iter().map(Segment::end));
        v
    }

    fn check_alpha(alpha: f64) -> Result<(), GeometryError> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(())
        } else {
            Err(GeometryError::Domain(alpha))
        }
    }

    /// Segment index and local arclength for global arclength `s`, taking the
    /// following segment at breakpoints.
    fn locate(&self, s: f64) -> (usize, f64) {
        let idx = self.offsets.partition_point(|&o| o <= s).saturating_sub(1);
        let local = (s - self.offsets[idx]).clamp(0.0, self.segments[idx].length());
        (idx, local)
    }

    /// `P(alpha)`.
    pub fn eval(&self, alpha: f64) -> Result<Vec2, GeometryError> {
        Self::check_alpha(alpha)?;
        if alpha == 1.0 {
            return Ok(self.end());
        }
        let (i, s) = self.locate(alpha * self.length);
        Ok(self.segments[i].point_at(s))
    }

    /// Unit tangent at `alpha`; right limit at breakpoints, end tangent at 1.
    pub fn tangent(&self, alpha: f64) -> Result<Vec2, GeometryError> {
        Self::check_alpha(alpha)?;
        let (i, s) = self.locate(alpha * self.length);
        Ok(self.segments[i].tangent_at(s))
    }

    /// `P([0, alpha])` re-parametrized onto `[0, 1]`.
    pub fn truncate(&self, alpha: f64) -> Result<RefPath, GeometryError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(GeometryError::Domain(alpha));
        }
        if alpha == 1.0 {
            return Ok(self.clone());
        }
        let s = alpha * self.length;
        let mut segments = Vec::new();
        for (seg, &off) in self.segments.iter().zip(&self.offsets) {
            if off >= s {
                break;
            }
            let len = seg.length();
            if off + len <= s {
                segments.push(*seg);
            } else {
                segments.push(seg.head(s - off));
            }
        }
        if segments.is_empty() {
            let p = self.start();
            segments.push(Segment::Line { start: p, end: p });
        }
        RefPath::new(segments)
    }

    /// `max{alpha : |P(alpha) - center| <= radius}`.
    pub fn max_ball_param(&self, center: Vec2, radius: f64) -> Result<f64, GeometryError> {
        self.ball_param(center, radius, true)
    }

    /// `min{alpha : |P(alpha) - center| <= radius}`.
    pub fn min_ball_param(&self, center: Vec2, radius: f64) -> Result<f64, GeometryError> {
        self.ball_param(center, radius, false)
    }

    fn ball_param(&self, center: Vec2, radius: f64, want_max: bool) -> Result<f64, GeometryError> {
        if radius.is_nan() || radius < 0.0 {
            return Err(GeometryError::InvalidInput("ball radius must be non-negative"));
        }
        if self.length <= 0.0 {
            return if self.start().distance(center) <= radius + 1e-12 {
                Ok(if want_max { 1.0 } else { 0.0 })
            } else {
                Err(GeometryError::NoIntersection)
            };
        }
        let inside = |p: Vec2| p.distance(center) <= radius + 1e-12 * (1.0 + radius);
        let mut cands = Vec::with_capacity(4);
        let n = self.segments.len();
        let order: Box<dyn Iterator<Item = usize>> = if want_max {
            Box::new((0..n).rev())
        } else {
            Box::new(0..n)
        };
        for i in order {
            let seg = &self.segments[i];
            let len = seg.length();
            cands.clear();
            seg.circle_crossings(center, radius, &mut cands);
            let crossings = cands.len();
            cands.push(0.0);
            cands.push(len);
            let mut best: Option<f64> = None;
            for (j, &s) in cands.iter().enumerate() {
                let ok = if j < crossings {
                    // Crossing points lie on the circle up to rounding.
                    seg.point_at(s).distance(center) <= radius + 1e-9
                } else {
                    inside(seg.point_at(s))
                };
                if ok {
                    best = Some(match best {
                        None => s,
                        Some(b) if want_max => b.max(s),
                        Some(b) => b.min(s),
                    });
                }
            }
            if let Some(s) = best {
                let alpha = ((self.offsets[i] + s) / self.length).clamp(0.0, 1.0);
                return Ok(alpha);
            }
        }
        Err(GeometryError::NoIntersection)
    }
}
