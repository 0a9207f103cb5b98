use spade::handles::FixedVertexHandle;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use super::AnnularMesh;
use crate::geometry::{point_segment_distance, BoundaryCurve, BoundaryLabel, Vec2, DELTA_SAFE};
use crate::{Error, Result};

/// Boundary edges longer than this multiple of `h` are subdivided.
const BOUNDARY_SPLIT: f64 = 1.2;
/// Lattice points closer than this multiple of `h` to a boundary are dropped.
const BOUNDARY_CLEARANCE: f64 = 0.55;
/// Upper bound on interior edge length, as a multiple of `h`.
const MAX_EDGE: f64 = 1.5;

/// Constrained Delaunay triangulation of the region between `outer` and
/// `inner` with target edge length `h`.
///
/// Interior nodes come from a hexagonal lattice of spacing `h`; boundary
/// polylines are kept verbatim, with extra nodes inserted on edges longer
/// than `1.2 h`. Interior edges longer than `1.5 h` are bisected until none
/// remain.
pub fn triangulate_annulus(outer: &BoundaryCurve, inner: &BoundaryCurve, h: f64) -> Result<AnnularMesh> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::range("h", format!("target edge length {h} must be positive")));
    }
    let outer = reorient(outer, BoundaryLabel::Sigma)?;
    let inner = reorient(inner, BoundaryLabel::Gamma)?;
    if inner.intersects(&outer) || !outer.contains(inner.points()[0]) {
        return Err(Error::CurvesIntersect);
    }
    let clearance = inner.points().iter().map(|&p| outer.distance_to(p)).fold(f64::INFINITY, f64::min);
    if clearance < DELTA_SAFE {
        log::warn!("inclusion is {clearance:.4} from the outer boundary (< {DELTA_SAFE})");
    }

    let sigma_pts = subdivide(outer.points(), BOUNDARY_SPLIT * h);
    let gamma_pts = subdivide(inner.points(), BOUNDARY_SPLIT * h);
    let interior = lattice_points(&outer, &inner, &sigma_pts, &gamma_pts, h);

    let mut points: Vec<Vec2> = Vec::with_capacity(sigma_pts.len() + gamma_pts.len() + interior.len());
    points.extend(&sigma_pts);
    points.extend(&gamma_pts);
    points.extend(&interior);
    let ns = sigma_pts.len();
    let ng = gamma_pts.len();
    let mut constraints = Vec::with_capacity(ns + ng);
    constraints.extend((0..ns).map(|k| [k, (k + 1) % ns]));
    constraints.extend((0..ng).map(|k| [ns + k, ns + (k + 1) % ng]));

    let verts: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(verts, constraints)
        .map_err(|e| Error::DegenerateCurve(format!("triangulation failed: {e:?}")))?;
    if cdt.num_vertices() != points.len() {
        return Err(Error::DegenerateCurve("duplicate vertices in triangulation input".into()));
    }

    let mut triangles;
    let mut rounds = 0;
    loop {
        triangles = domain_triangles(&cdt, &outer, &inner, ns, ng);
        let long = long_interior_edges(&cdt, &triangles, ns + ng, MAX_EDGE * h);
        if long.is_empty() || rounds == 20 {
            break;
        }
        for (a, b) in long {
            let mid = (vertex(&cdt, a) + vertex(&cdt, b)) * 0.5;
            cdt.insert(Point2::new(mid.x, mid.y))
                .map_err(|e| Error::DegenerateCurve(format!("refinement failed: {e:?}")))?;
        }
        rounds += 1;
    }

    let nodes: Vec<Vec2> = (0..cdt.num_vertices()).map(|i| vertex(&cdt, i)).collect();
    let sigma_loop: Vec<usize> = (0..ns).collect();
    let gamma_loop: Vec<usize> = (ns..ns + ng).collect();
    AnnularMesh::from_parts(nodes, triangles, sigma_loop, gamma_loop)
}

fn reorient(curve: &BoundaryCurve, label: BoundaryLabel) -> Result<BoundaryCurve> {
    if curve.label() == label {
        Ok(curve.clone())
    } else {
        BoundaryCurve::new(curve.points().to_vec(), label)
    }
}

fn vertex(cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>, i: usize) -> Vec2 {
    let p = cdt.vertex(FixedVertexHandle::from_index(i)).position();
    Vec2::new(p.x, p.y)
}

/// Inserts evenly spaced nodes on every edge longer than `max_len`.
fn subdivide(points: &[Vec2], max_len: f64) -> Vec<Vec2> {
    let m = points.len();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let (a, b) = (points[k], points[(k + 1) % m]);
        let pieces = ((b - a).norm() / max_len).ceil().max(1.0) as usize;
        for j in 0..pieces {
            out.push(a + (b - a) * (j as f64 / pieces as f64));
        }
    }
    out
}

fn lattice_points(
    outer: &BoundaryCurve,
    inner: &BoundaryCurve,
    sigma_pts: &[Vec2],
    gamma_pts: &[Vec2],
    h: f64,
) -> Vec<Vec2> {
    let (mut lo, mut hi) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
    for p in outer.points() {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((hi.y - lo.y) / dy).ceil() as usize + 1;
    let cols = ((hi.x - lo.x) / h).ceil() as usize + 2;
    let min_dist = BOUNDARY_CLEARANCE * h;
    let grid = SegmentGrid::new(&[sigma_pts, gamma_pts], lo, hi, h);
    let mut out = Vec::new();
    for r in 0..rows {
        let y = lo.y + r as f64 * dy;
        let shift = if r % 2 == 1 { 0.5 * h } else { 0.0 };
        for c in 0..cols {
            let p = Vec2::new(lo.x + shift + c as f64 * h, y);
            if grid.near(p, min_dist) {
                continue;
            }
            if outer.contains(p) && !inner.contains(p) {
                out.push(p);
            }
        }
    }
    out
}

/// Bucket grid over boundary segments for clearance queries.
struct SegmentGrid {
    lo: Vec2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<(Vec2, Vec2)>>,
}

impl SegmentGrid {
    fn new(loops: &[&[Vec2]], lo: Vec2, hi: Vec2, cell: f64) -> Self {
        let lo = lo - Vec2::new(cell, cell);
        let hi = hi + Vec2::new(cell, cell);
        let nx = ((hi.x - lo.x) / cell).ceil() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).ceil() as usize + 1;
        let mut grid = SegmentGrid { lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for pts in loops {
            let m = pts.len();
            for k in 0..m {
                let (a, b) = (pts[k], pts[(k + 1) % m]);
                let (i0, j0) = grid.cell_of(Vec2::new(a.x.min(b.x), a.y.min(b.y)));
                let (i1, j1) = grid.cell_of(Vec2::new(a.x.max(b.x), a.y.max(b.y)));
                for i in i0..=i1 {
                    for j in j0..=j1 {
                        grid.buckets[j * nx + i].push((a, b));
                    }
                }
            }
        }
        grid
    }

    fn cell_of(&self, p: Vec2) -> (usize, usize) {
        let i = ((p.x - self.lo.x) / self.cell).floor().max(0.0) as usize;
        let j = ((p.y - self.lo.y) / self.cell).floor().max(0.0) as usize;
        (i.min(self.nx - 1), j.min(self.ny - 1))
    }

    /// True if some segment lies within `r` of `p` (requires `r <= cell`).
    fn near(&self, p: Vec2, r: f64) -> bool {
        let (i, j) = self.cell_of(p);
        for jj in j.saturating_sub(1)..=(j + 1).min(self.ny - 1) {
            for ii in i.saturating_sub(1)..=(i + 1).min(self.nx - 1) {
                if self.buckets[jj * self.nx + ii].iter().any(|&(a, b)| point_segment_distance(p, a, b) < r) {
                    return true;
                }
            }
        }
        false
    }
}

/// Keeps the faces lying in the annulus. A face with a boundary-loop edge is
/// classified by that edge's direction (the domain lies left of both loops),
/// which is robust for slivers on nearly collinear boundary nodes; other faces
/// by their centroid.
fn domain_triangles(
    cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>,
    outer: &BoundaryCurve,
    inner: &BoundaryCurve,
    ns: usize,
    ng: usize,
) -> Vec<[usize; 3]> {
    let next_on_loop = |i: usize| -> Option<usize> {
        if i < ns {
            Some((i + 1) % ns)
        } else if i < ns + ng {
            Some(ns + (i - ns + 1) % ng)
        } else {
            None
        }
    };
    cdt.inner_faces()
        .filter_map(|f| {
            let tri = f.vertices().map(|v| v.fix().index());
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if next_on_loop(a) == Some(b) {
                    return Some(tri);
                }
                if next_on_loop(b) == Some(a) {
                    return None;
                }
            }
            let pos = f.positions();
            let centroid = Vec2::new((pos[0].x + pos[1].x + pos[2].x) / 3.0, (pos[0].y + pos[1].y + pos[2].y) / 3.0);
            (outer.contains(centroid) && !inner.contains(centroid)).then_some(tri)
        })
        .collect()
}

fn long_interior_edges(
    cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>,
    triangles: &[[usize; 3]],
    num_boundary: usize,
    max_len: f64,
) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .filter(|&(a, b)| {
            // Edges between consecutive boundary nodes are constraint edges.
            let constraint = a < num_boundary
                && b < num_boundary
                && cdt.exists_constraint(FixedVertexHandle::from_index(a), FixedVertexHandle::from_index(b));
            !constraint && (vertex(cdt, a) - vertex(cdt, b)).norm() > max_len
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}
