//! Planar primitives: vectors, convex regions with metric projection, and
//! arclength-parametrized reference paths.

mod path;
mod region;
mod vec2;

pub use path::{RefPath, Segment};
pub use region::{clip_convex, ConvexRegion, Disk, HalfPlane};
pub use vec2::{
    closest_point_on_segment, point_segment_distance, segment_segment_distance,
    segments_intersect, wrap_angle, Mat2, Vec2,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("convex region is empty")]
    EmptyRegion,
    #[error("path parameter {0} outside the admissible range")]
    Domain(f64),
    #[error("ball does not intersect the path")]
    NoIntersection,
    #[error("path segments do not join")]
    Discontinuous,
    #[error("invalid geometry: {0}")]
    InvalidInput(&'static str),
}
