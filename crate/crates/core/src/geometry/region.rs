//! Convex regions built from half-planes and at most one disk, and the
//! metric projection onto them.
//!
//! Two projection routes are provided. [`ConvexRegion::project`] is a direct
//! solve: the half-planes are clipped into a convex polygon and the closest
//! point of `polygon ∩ disk` is picked among a finite candidate set (the
//! query itself, per-edge and radial projections, vertices, edge/circle
//! crossings). [`ConvexRegion::project_dykstra`] runs Dykstra's alternating
//! projections and is kept as an independent cross-check.

use serde::{Deserialize, Serialize};

use super::vec2::{closest_point_on_segment, Vec2};
use super::GeometryError;

const MEMBER_TOL: f64 = 1e-12;

/// Closed half-plane `{p : (p - anchor) · normal >= 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Vec2,
    pub anchor: Vec2,
}

impl HalfPlane {
    /// Builds a half-plane, normalizing `normal`.
    pub fn new(normal: Vec2, anchor: Vec2) -> Result<Self, GeometryError> {
        let normal = normal
            .normalized()
            .ok_or(GeometryError::InvalidInput("half-plane normal has zero length"))?;
        Ok(HalfPlane { normal, anchor })
    }

    /// Signed distance of `p` from the boundary line, positive inside.
    #[inline]
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        (p - self.anchor).dot(self.normal)
    }

    #[inline]
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.signed_distance(p) >= -tol
    }

    pub fn project(&self, p: Vec2) -> Vec2 {
        let s = self.signed_distance(p);
        if s >= 0.0 {
            p
        } else {
            p - self.normal * s
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Disk { center, radius }
    }

    #[inline]
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.distance(self.center) <= self.radius + tol
    }

    pub fn project(&self, p: Vec2) -> Vec2 {
        let d = p - self.center;
        let n = d.norm();
        if n <= self.radius {
            p
        } else {
            self.center + d * (self.radius / n)
        }
    }
}

/// Intersection of half-planes and an optional disk. Closed and convex by
/// construction; may be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvexRegion {
    pub halfplanes: Vec<HalfPlane>,
    pub disk: Option<Disk>,
}

impl ConvexRegion {
    pub fn new(halfplanes: Vec<HalfPlane>, disk: Option<Disk>) -> Self {
        ConvexRegion { halfplanes, disk }
    }

    pub fn disk(center: Vec2, radius: f64) -> Self {
        ConvexRegion {
            halfplanes: Vec::new(),
            disk: Some(Disk::new(center, radius)),
        }
    }

    /// Region bounded by a convex polygon given counter-clockwise.
    pub fn from_ccw_polygon(vertices: &[Vec2]) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidInput("polygon needs at least 3 vertices"));
        }
        let halfplanes = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                HalfPlane::new((b - a).perp(), a)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ConvexRegion {
            halfplanes,
            disk: None,
        })
    }

    pub fn with_halfplane(mut self, h: HalfPlane) -> Self {
        self.halfplanes.push(h);
        self
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        self.halfplanes.iter().all(|h| h.contains(p, tol))
            && self.disk.is_none_or(|d| d.contains(p, tol))
    }

    /// Distance from `p` (assumed inside) to the region boundary.
    pub fn interior_distance(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for h in &self.halfplanes {
            best = best.min(h.signed_distance(p));
        }
        if let Some(d) = self.disk {
            best = best.min(d.radius - p.distance(d.center));
        }
        best
    }

    pub fn is_empty(&self) -> bool {
        match self.bounded_polygon(self.default_box_half_size(Vec2::ZERO), Vec2::ZERO) {
            None => true,
            Some(poly) => match self.disk {
                None => false,
                Some(d) => nearest_in_polygon_disk(&poly, d, d.center).is_none(),
            },
        }
    }

    /// Metric projection of `q` onto the region.
    pub fn project(&self, q: Vec2) -> Result<Vec2, GeometryError> {
        if self.halfplanes.is_empty() {
            return Ok(match self.disk {
                Some(d) => d.project(q),
                None => q,
            });
        }
        if self.contains(q, 0.0) {
            return Ok(q);
        }
        match self.disk {
            Some(disk) => {
                let center = disk.center;
                let half = disk.radius * 1.05 + 1e-9;
                let poly = self
                    .bounded_polygon(half, center)
                    .ok_or(GeometryError::EmptyRegion)?;
                nearest_in_polygon_disk(&poly, disk, q).ok_or(GeometryError::EmptyRegion)
            }
            None => {
                // Unbounded half-plane intersection: clip against a box about
                // q and grow it until the box constraints are inactive.
                let mut half = self.default_box_half_size(q);
                for _ in 0..60 {
                    let poly = self
                        .bounded_polygon(half, q)
                        .ok_or(GeometryError::EmptyRegion)?;
                    let p = nearest_in_polygon(&poly, q);
                    if (p - q).x.abs() < 0.999 * half && (p - q).y.abs() < 0.999 * half {
                        return Ok(p);
                    }
                    half *= 4.0;
                }
                Err(GeometryError::EmptyRegion)
            }
        }
    }

    /// Dykstra's alternating projection onto the constraint sets, stopping
    /// once an entire sweep moves the iterate by less than `tol`.
    pub fn project_dykstra(
        &self,
        q: Vec2,
        tol: f64,
        max_iter: usize,
    ) -> Result<Vec2, GeometryError> {
        let m = self.halfplanes.len() + usize::from(self.disk.is_some());
        if m == 0 {
            return Ok(q);
        }
        let mut x = q;
        let mut increments = vec![Vec2::ZERO; m];
        for _ in 0..max_iter {
            let mut moved = 0.0f64;
            for (i, inc) in increments.iter_mut().enumerate() {
                let y = x + *inc;
                let p = if i < self.halfplanes.len() {
                    self.halfplanes[i].project(y)
                } else {
                    self.disk.unwrap().project(y)
                };
                *inc = y - p;
                moved = moved.max(p.distance(x));
                x = p;
            }
            if moved < tol {
                return Ok(x);
            }
        }
        if self.contains(x, 1e-6) {
            Ok(x)
        } else {
            Err(GeometryError::EmptyRegion)
        }
    }

    /// Parameter interval `[lo, hi]` of the line `origin + s * dir` that lies
    /// inside the region (`dir` must be a unit vector).
    pub fn line_slice(&self, origin: Vec2, dir: Vec2) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for h in &self.halfplanes {
            // (origin + s dir - anchor)·n >= 0
            let a = dir.dot(h.normal);
            let b = h.signed_distance(origin);
            if a.abs() < 1e-15 {
                if b < -MEMBER_TOL {
                    return None;
                }
            } else if a > 0.0 {
                lo = lo.max(-b / a);
            } else {
                hi = hi.min(-b / a);
            }
        }
        if let Some(d) = self.disk {
            let w = origin - d.center;
            let b = w.dot(dir);
            let c = w.norm_sq() - d.radius * d.radius;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            lo = lo.max(-b - sq);
            hi = hi.min(-b + sq);
        }
        (lo <= hi + MEMBER_TOL).then_some((lo, hi.max(lo)))
    }

    fn default_box_half_size(&self, q: Vec2) -> f64 {
        let mut scale = q.x.abs().max(q.y.abs());
        for h in &self.halfplanes {
            scale = scale.max(h.anchor.x.abs()).max(h.anchor.y.abs());
        }
        if let Some(d) = self.disk {
            scale = scale
                .max(d.center.x.abs() + d.radius)
                .max(d.center.y.abs() + d.radius);
        }
        4.0 * (scale + 1.0)
    }

    /// Convex polygon `box ∩ halfplanes`, or `None` if empty.
    fn bounded_polygon(&self, half: f64, center: Vec2) -> Option<Vec<Vec2>> {
        let mut poly = vec![
            center + Vec2::new(-half, -half),
            center + Vec2::new(half, -half),
            center + Vec2::new(half, half),
            center + Vec2::new(-half, half),
        ];
        let mut scratch = Vec::with_capacity(poly.len() + 4);
        for h in &self.halfplanes {
            clip_convex(&poly, h, &mut scratch);
            std::mem::swap(&mut poly, &mut scratch);
            if poly.is_empty() {
                return None;
            }
        }
        Some(poly)
    }
}

/// Sutherland–Hodgman step: `out = poly ∩ h` for a convex polygon.
pub fn clip_convex(poly: &[Vec2], h: &HalfPlane, out: &mut Vec<Vec2>) {
    out.clear();
    let n = poly.len();
    if n == 0 {
        return;
    }
    let mut prev = poly[n - 1];
    let mut prev_s = h.signed_distance(prev);
    for &cur in poly {
        let s = h.signed_distance(cur);
        if s >= 0.0 {
            if prev_s < 0.0 {
                out.push(prev + (cur - prev) * (prev_s / (prev_s - s)));
            }
            out.push(cur);
        } else if prev_s >= 0.0 {
            out.push(prev + (cur - prev) * (prev_s / (prev_s - s)));
        }
        prev = cur;
        prev_s = s;
    }
}

fn polygon_contains(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        e.cross(p - a) >= -MEMBER_TOL * (1.0 + e.norm())
    })
}

fn nearest_in_polygon(poly: &[Vec2], q: Vec2) -> Vec2 {
    if polygon_contains(poly, q) {
        return q;
    }
    let n = poly.len();
    let mut best = poly[0];
    let mut best_d = f64::INFINITY;
    for i in 0..n {
        let c = closest_point_on_segment(q, poly[i], poly[(i + 1) % n]);
        let d = c.distance(q);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Closest point of `poly ∩ disk` to `q`; `None` when the intersection is empty.
fn nearest_in_polygon_disk(poly: &[Vec2], disk: Disk, q: Vec2) -> Option<Vec2> {
    let in_disk = |p: Vec2| p.distance(disk.center) <= disk.radius * (1.0 + 1e-12) + MEMBER_TOL;
    let q_in_poly = polygon_contains(poly, q);
    if q_in_poly && in_disk(q) {
        return Some(q);
    }
    let mut best: Option<(f64, Vec2)> = None;
    let mut offer = |p: Vec2| {
        let d = p.distance(q);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, p));
        }
    };
    let radial = disk.project(q);
    if polygon_contains(poly, radial) {
        offer(radial);
    }
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if in_disk(a) {
            offer(a);
        }
        let c = closest_point_on_segment(q, a, b);
        if in_disk(c) {
            offer(c);
        }
        // Edge/circle crossings.
        let ab = b - a;
        let len_sq = ab.norm_sq();
        if len_sq > 0.0 {
            let w = a - disk.center;
            let bq = w.dot(ab) / len_sq;
            let cq = (w.norm_sq() - disk.radius * disk.radius) / len_sq;
            let disc = bq * bq - cq;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                for t in [-bq - sq, -bq + sq] {
                    if (0.0..=1.0).contains(&t) {
                        offer(a + ab * t);
                    }
                }
            }
        }
    }
    best.map(|(_, p)| p)
}
