//! Hausdorff distance between closed polylines.
//!
//! The directed distance `h(A, B) = sup_{x in A} dist(x, B)` is taken over
//! every point of the polyline `A`, not only its vertices, so the symmetric
//! distance is a true metric on polylines. Along an edge of `A`, the distance
//! to each segment of `B` is convex, so on any sub-interval it is bounded by
//! its larger endpoint value; the envelope is bounded by the smallest such
//! value. Sub-intervals are bisected until that bound is within `TOLERANCE`
//! of the best value found.

use super::{point_segment_distance, Vec2};

const TOLERANCE: f64 = 1e-13;

/// Distance from `p` to the closed polyline through `points`.
pub fn point_polyline_distance(p: Vec2, points: &[Vec2]) -> f64 {
    let n = points.len();
    match n {
        0 => f64::INFINITY,
        1 => (p - points[0]).norm(),
        _ => (0..n).map(|i| point_segment_distance(p, points[i], points[(i + 1) % n])).fold(f64::INFINITY, f64::min),
    }
}

/// `sup_{x in A} dist(x, B)` over the closed polylines `a` and `b`.
pub fn directed_hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() { 0.0 } else { f64::INFINITY };
    }
    if b.len() == 1 || a.len() == 1 {
        return a.iter().map(|&p| point_polyline_distance(p, b)).fold(0.0, f64::max);
    }
    let segs: Vec<(Vec2, Vec2)> = (0..b.len()).map(|j| (b[j], b[(j + 1) % b.len()])).collect();
    let dists = |p: Vec2, idx: &[usize]| -> Vec<f64> {
        idx.iter().map(|&j| point_segment_distance(p, segs[j].0, segs[j].1)).collect()
    };
    let all: Vec<usize> = (0..segs.len()).collect();
    let at_vertex: Vec<Vec<f64>> = a.iter().map(|&p| dists(p, &all)).collect();
    let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = at_vertex.iter().map(|v| min_of(v)).fold(0.0, f64::max);

    let n = a.len();
    let mut stack = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (d0, d1) = (&at_vertex[i], &at_vertex[j]);
        let len = (a[j] - a[i]).norm();
        let upper = d0.iter().zip(d1).map(|(x, y)| x.max(*y)).fold(f64::INFINITY, f64::min);
        if upper <= best + TOLERANCE {
            continue;
        }
        // A segment can only be nearest somewhere on the edge if it comes
        // within `upper`; its distance varies by at most `len` along the edge.
        let cand: Vec<usize> = (0..segs.len()).filter(|&k| d0[k].min(d1[k]) - len <= upper).collect();
        let c0: Vec<f64> = cand.iter().map(|&k| d0[k]).collect();
        let c1: Vec<f64> = cand.iter().map(|&k| d1[k]).collect();
        stack.push((a[i], a[j], c0, c1));
        while let Some((p0, p1, e0, e1)) = stack.pop() {
            let len = (p1 - p0).norm();
            let (f0, f1) = (min_of(&e0), min_of(&e1));
            let convex = e0.iter().zip(&e1).map(|(x, y)| x.max(*y)).fold(f64::INFINITY, f64::min);
            let bound = convex.min(0.5 * (f0 + f1 + len));
            if bound <= best + TOLERANCE {
                continue;
            }
            let mid = (p0 + p1) * 0.5;
            let em = dists(mid, &cand);
            best = best.max(min_of(&em));
            stack.push((p0, mid, e0, em.clone()));
            stack.push((mid, p1, em, e1));
        }
    }
    best
}

/// Symmetric Hausdorff distance between two closed polylines.
pub fn hausdorff_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}
