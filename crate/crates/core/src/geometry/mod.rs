//! Planar geometry: points, closed boundary polylines, analytic shapes and
//! the Hausdorff metric used to score reconstructions.

mod curve;
mod hausdorff;
mod shape;
mod vec2;

pub use curve::{segments_intersect, BoundaryCurve, BoundaryLabel, DELTA_SAFE};
pub use hausdorff::{directed_hausdorff, hausdorff_distance, point_polyline_distance};
pub use shape::ParametricShape;
pub use vec2::Vec2;

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}
