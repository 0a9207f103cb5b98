use std::fmt;

use serde::{Deserialize, Serialize};

use super::{point_segment_distance, Vec2};
use crate::{Error, Result};

/// Minimum clearance expected between the inclusion and the outer boundary.
/// Violations are reported as warnings only.
pub const DELTA_SAFE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryLabel {
    /// Outer, accessible boundary. Never moves.
    Sigma,
    /// Inclusion boundary. Moves during reconstruction.
    Gamma,
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryLabel::Sigma => f.write_str("sigma"),
            BoundaryLabel::Gamma => f.write_str("gamma"),
        }
    }
}

/// A simple closed polyline. The closing edge (last to first) is implicit.
///
/// Orientation is normalized on construction so that the annular domain lies
/// to the left of every edge: `Sigma` runs counterclockwise, `Gamma`
/// clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCurve {
    points: Vec<Vec2>,
    label: BoundaryLabel,
}

impl BoundaryCurve {
    pub fn new(mut points: Vec<Vec2>, label: BoundaryLabel) -> Result<Self> {
        check_simple(&points)?;
        let area = signed_area(&points);
        let want_ccw = label == BoundaryLabel::Sigma;
        if (area > 0.0) != want_ccw {
            points.reverse();
        }
        Ok(BoundaryCurve { points, label })
    }

    /// Wraps points that are already validated and oriented, e.g. a boundary
    /// loop extracted from a valid mesh.
    pub(crate) fn from_oriented(points: Vec<Vec2>, label: BoundaryLabel) -> Self {
        BoundaryCurve { points, label }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Vec2> {
        self.points
    }

    pub fn label(&self) -> BoundaryLabel {
        self.label
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Edges `(p[i], p[i+1])` including the closing edge.
    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    /// Area of the region enclosed by the curve.
    pub fn enclosed_area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Even-odd point-in-polygon test. Points on the curve are unspecified.
    pub fn contains(&self, p: Vec2) -> bool {
        polygon_contains(&self.points, p)
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.segments().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    /// True if any edge of `self` meets any edge of `other`.
    pub fn intersects(&self, other: &BoundaryCurve) -> bool {
        self.segments().any(|(a, b)| other.segments().any(|(c, d)| segments_intersect(a, b, c, d)))
    }
}

pub(crate) fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    0.5 * (0..n).map(|i| points[i].cross(points[(i + 1) % n])).sum::<f64>()
}

pub(crate) fn polygon_contains(points: &[Vec2], p: Vec2) -> bool {
    let n = points.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (points[i], points[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test; touching and collinear overlap count.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    if p1.x.max(p2.x) < q1.x.min(q2.x)
        || q1.x.max(q2.x) < p1.x.min(p2.x)
        || p1.y.max(p2.y) < q1.y.min(q2.y)
        || q1.y.max(q2.y) < p1.y.min(p2.y)
    {
        return false;
    }
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn check_simple(points: &[Vec2]) -> Result<()> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateCurve(format!("{n} points, need at least 3")));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::DegenerateCurve(format!("non-finite point {p:?}")));
    }
    for i in 0..n {
        if points[i] == points[(i + 1) % n] {
            return Err(Error::DegenerateCurve(format!("repeated point at index {i}")));
        }
    }
    if signed_area(points) == 0.0 {
        return Err(Error::DegenerateCurve("zero enclosed area".into()));
    }
    for i in 0..n {
        let (a, b) = (points[i], points[(i + 1) % n]);
        // Skip the two neighbouring edges, which share an endpoint with edge i.
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (points[j], points[(j + 1) % n]);
            if segments_intersect(a, b, c, d) {
                return Err(Error::DegenerateCurve(format!("edges {i} and {j} intersect")));
            }
        }
        // A neighbouring edge folding back onto edge i is also a self-overlap.
        let c = points[(i + 2) % n];
        if n > 3 && orient(a, b, c) == 0.0 && (c - b).dot(a - b) > 0.0 {
            return Err(Error::DegenerateCurve(format!("edge {i} folds back")));
        }
    }
    Ok(())
}
