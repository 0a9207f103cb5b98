use super::AnnularMesh;
use crate::geometry::{point_segment_distance, Vec2};

/// Barycentric tolerance for treating a point as inside a triangle.
const INSIDE_TOL: f64 = 1e-10;

/// Bucket-grid point location on an [`AnnularMesh`].
///
/// Points outside the mesh resolve to the nearest triangle, with barycentric
/// weights of the closest point on it, so interpolation extends continuously.
pub struct PointLocator<'m> {
    mesh: &'m AnnularMesh,
    lo: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    offsets: Vec<usize>,
    entries: Vec<usize>,
}

impl<'m> PointLocator<'m> {
    pub fn new(mesh: &'m AnnularMesh) -> Self {
        let nodes = mesh.nodes();
        let (mut lo, mut hi) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
        for p in nodes {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let ntri = mesh.triangles().len().max(1);
        let extent = (hi.x - lo.x).max(hi.y - lo.y).max(f64::MIN_POSITIVE);
        let per_side = ((ntri as f64).sqrt().ceil() as usize).max(1);
        let cell = extent / per_side as f64;
        let nx = ((hi.x - lo.x) / cell).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).floor() as usize + 1;

        let cell_range = |t: usize| {
            let [a, b, c] = mesh.vertices_of(t);
            let bx0 = a.x.min(b.x).min(c.x);
            let by0 = a.y.min(b.y).min(c.y);
            let bx1 = a.x.max(b.x).max(c.x);
            let by1 = a.y.max(b.y).max(c.y);
            let clampi = |v: f64, n: usize| ((v / cell).floor().max(0.0) as usize).min(n - 1);
            (clampi(bx0 - lo.x, nx), clampi(by0 - lo.y, ny), clampi(bx1 - lo.x, nx), clampi(by1 - lo.y, ny))
        };
        let mut counts = vec![0usize; nx * ny + 1];
        for t in 0..mesh.triangles().len() {
            let (i0, j0, i1, j1) = cell_range(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    counts[j * nx + i + 1] += 1;
                }
            }
        }
        for k in 1..counts.len() {
            counts[k] += counts[k - 1];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut entries = vec![0usize; offsets[nx * ny]];
        for t in 0..mesh.triangles().len() {
            let (i0, j0, i1, j1) = cell_range(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let slot = &mut fill[j * nx + i];
                    entries[*slot] = t;
                    *slot += 1;
                }
            }
        }
        PointLocator { mesh, lo, cell, nx, ny, offsets, entries }
    }

    fn bucket(&self, i: usize, j: usize) -> &[usize] {
        let k = j * self.nx + i;
        &self.entries[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Triangle containing `p` and its barycentric weights, if any.
    pub fn locate(&self, p: Vec2) -> Option<(usize, [f64; 3])> {
        let fx = (p.x - self.lo.x) / self.cell;
        let fy = (p.y - self.lo.y) / self.cell;
        if fx < 0.0 || fy < 0.0 || fx >= self.nx as f64 || fy >= self.ny as f64 {
            return None;
        }
        self.bucket(fx as usize, fy as usize).iter().find_map(|&t| {
            let w = barycentric(self.mesh.vertices_of(t), p);
            w.iter().all(|&l| l >= -INSIDE_TOL).then_some((t, w))
        })
    }

    /// Like [`locate`](Self::locate) but falls back to the nearest triangle.
    pub fn locate_or_nearest(&self, p: Vec2) -> (usize, [f64; 3]) {
        if let Some(hit) = self.locate(p) {
            return hit;
        }
        let mut best = (f64::INFINITY, 0usize);
        for t in 0..self.mesh.triangles().len() {
            let [a, b, c] = self.mesh.vertices_of(t);
            let d = point_segment_distance(p, a, b)
                .min(point_segment_distance(p, b, c))
                .min(point_segment_distance(p, c, a));
            if d < best.0 {
                best = (d, t);
            }
        }
        let t = best.1;
        (t, closest_weights(self.mesh.vertices_of(t), p))
    }

    /// Linear interpolation of a nodal field at `p`.
    pub fn interpolate(&self, values: &[f64], p: Vec2) -> f64 {
        let (t, w) = self.locate_or_nearest(p);
        let tri = self.mesh.triangles()[t];
        w[0] * values[tri[0]] + w[1] * values[tri[1]] + w[2] * values[tri[2]]
    }
}

pub(crate) fn barycentric([a, b, c]: [Vec2; 3], p: Vec2) -> [f64; 3] {
    let det = (b - a).cross(c - a);
    let l1 = (p - a).cross(c - a) / det;
    let l2 = (b - a).cross(p - a) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Barycentric weights of the point of the triangle closest to `p`.
fn closest_weights(v: [Vec2; 3], p: Vec2) -> [f64; 3] {
    let w = barycentric(v, p);
    if w.iter().all(|&l| l >= 0.0) {
        return w;
    }
    let mut best = (f64::INFINITY, [1.0, 0.0, 0.0]);
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        let (a, b) = (v[i], v[j]);
        let d = b - a;
        let s = ((p - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0);
        let dist = (a + d * s - p).norm();
        if dist < best.0 {
            let mut ws = [0.0; 3];
            ws[i] = 1.0 - s;
            ws[j] = s;
            best = (dist, ws);
        }
    }
    best.1
}
