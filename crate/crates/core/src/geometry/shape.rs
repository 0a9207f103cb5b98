use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{BoundaryCurve, BoundaryLabel, Vec2};
use crate::{Error, Result};

/// Analytic descriptions of inclusion (or outer) boundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricShape {
    Circle {
        center: Vec2,
        radius: f64,
    },
    /// Kite-like star-shaped curve centred at (-0.25, 0.05).
    Case1Curve,
    /// Boundary of `(-0.55, 0.55)^2 \ [0, 0.55]^2`.
    Case2LShape,
    /// Arbitrary closed polyline, resampled by arc length.
    PointList {
        points: Vec<Vec2>,
    },
}

const L_HALF: f64 = 0.55;

impl ParametricShape {
    pub fn circle(cx: f64, cy: f64, radius: f64) -> Self {
        ParametricShape::Circle { center: Vec2::new(cx, cy), radius }
    }

    /// Point at parameter `t` in `[0, 2π)` for the smooth shapes.
    pub fn eval(&self, t: f64) -> Option<Vec2> {
        match self {
            ParametricShape::Circle { center, radius } => Some(*center + Vec2::new(t.cos(), t.sin()) * *radius),
            ParametricShape::Case1Curve => {
                let r = (0.6 + 0.54 * t.cos() + 0.06 * (2.0 * t).sin()) / (1.0 + 0.75 * t.cos());
                Some(Vec2::new(-0.25 + r * t.cos(), 0.05 + r * t.sin()))
            }
            _ => None,
        }
    }

    /// Corner vertices of the L-shape, counterclockwise.
    pub fn l_shape_corners() -> [Vec2; 6] {
        [
            Vec2::new(-L_HALF, -L_HALF),
            Vec2::new(L_HALF, -L_HALF),
            Vec2::new(L_HALF, 0.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, L_HALF),
            Vec2::new(-L_HALF, L_HALF),
        ]
    }

    /// Samples `n` points and orients them according to `label`.
    pub fn sample(&self, n: usize, label: BoundaryLabel) -> Result<BoundaryCurve> {
        if n < 3 {
            return Err(Error::DegenerateCurve(format!("cannot sample {n} points")));
        }
        let points = match self {
            ParametricShape::Circle { radius, .. } if !(*radius > 0.0) => {
                return Err(Error::DegenerateCurve(format!("circle radius {radius}")));
            }
            ParametricShape::Circle { .. } | ParametricShape::Case1Curve => {
                (0..n).map(|k| self.eval(2.0 * PI * k as f64 / n as f64).unwrap()).collect()
            }
            ParametricShape::Case2LShape => {
                let corners = Self::l_shape_corners();
                resample_polygon_keeping_corners(&corners, n)
            }
            ParametricShape::PointList { points } => {
                if points.len() == n {
                    points.clone()
                } else {
                    resample_by_arc_length(points, n)
                }
            }
        };
        BoundaryCurve::new(points, label)
    }
}

/// Distributes `n` points over the polygon edges in proportion to length,
/// always keeping every corner.
fn resample_polygon_keeping_corners(corners: &[Vec2], n: usize) -> Vec<Vec2> {
    let m = corners.len();
    if n <= m {
        return corners.to_vec();
    }
    let lengths: Vec<f64> = (0..m).map(|i| (corners[(i + 1) % m] - corners[i]).norm()).collect();
    let total: f64 = lengths.iter().sum();
    // Each edge gets at least one segment; the rest go by largest remainder.
    let mut counts: Vec<usize> = lengths.iter().map(|l| ((l / total * n as f64).floor() as usize).max(1)).collect();
    while counts.iter().sum::<usize>() < n {
        let (i, _) = lengths
            .iter()
            .enumerate()
            .map(|(i, l)| (i, l / counts[i] as f64))
            .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
        counts[i] += 1;
    }
    while counts.iter().sum::<usize>() > n {
        let (i, _) = lengths
            .iter()
            .enumerate()
            .filter(|(i, _)| counts[*i] > 1)
            .map(|(i, l)| (i, l / counts[i] as f64))
            .fold((0, f64::MAX), |acc, x| if x.1 < acc.1 { x } else { acc });
        counts[i] -= 1;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..m {
        let (a, b) = (corners[i], corners[(i + 1) % m]);
        for k in 0..counts[i] {
            out.push(a + (b - a) * (k as f64 / counts[i] as f64));
        }
    }
    out
}

fn resample_by_arc_length(points: &[Vec2], n: usize) -> Vec<Vec2> {
    let m = points.len();
    if m < 2 {
        return points.to_vec();
    }
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        let d = (points[(i + 1) % m] - points[i]).norm();
        cum.push(cum[i] + d);
    }
    let total = cum[m];
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        let s = total * k as f64 / n as f64;
        while seg + 1 < m && cum[seg + 1] <= s {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > 0.0 { (s - cum[seg]) / len } else { 0.0 };
        let (a, b) = (points[seg], points[(seg + 1) % m]);
        out.push(a + (b - a) * w);
    }
    out
}
