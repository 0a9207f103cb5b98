//! Annular triangulations between the fixed outer boundary Σ and the moving
//! inclusion boundary Γ.

mod io;
mod locate;
mod triangulate;

use std::sync::atomic::{AtomicU64, Ordering};

pub use io::{
    format_polyline_csv, format_vtk, parse_polyline_csv, read_polyline_csv, write_polyline_csv, write_vtk, VtkField,
};
pub use locate::PointLocator;
pub use triangulate::triangulate_annulus;

use crate::geometry::{BoundaryCurve, BoundaryLabel, Vec2};
use crate::{Error, Result};

/// Relative floor below which a deformed triangle counts as collapsed.
pub const AREA_FLOOR_FRACTION: f64 = 1e-3;

static NEXT_MESH_ID: AtomicU64 = AtomicU64::new(1);

/// Identity tag binding nodal fields to the mesh they were computed on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeshId(u64);

impl MeshId {
    fn fresh() -> Self {
        MeshId(NEXT_MESH_ID.fetch_add(1, Ordering::Relaxed))
    }

    /// Process-local serial number; not stable across runs.
    pub fn serial(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeFlag {
    Interior,
    OnSigma,
    OnGamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub label: BoundaryLabel,
}

/// Conforming P1 triangulation of `Ω = D \ ω̄`.
///
/// Triangles are counterclockwise. Each boundary loop is stored as an ordered
/// list of node indices with Ω on the left of every edge, so the right-hand
/// edge normal points out of Ω (into ω on Γ).
#[derive(Clone, Debug)]
pub struct AnnularMesh {
    id: MeshId,
    nodes: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    sigma_loop: Vec<usize>,
    gamma_loop: Vec<usize>,
    node_flags: Vec<NodeFlag>,
    boundary_edges: Vec<BoundaryEdge>,
    node_tri_offsets: Vec<usize>,
    node_tri_list: Vec<usize>,
    loop_position: Vec<usize>,
    area_floor: f64,
}

impl AnnularMesh {
    /// Assembles and validates a mesh from raw parts.
    pub fn from_parts(
        nodes: Vec<Vec2>,
        mut triangles: Vec<[usize; 3]>,
        sigma_loop: Vec<usize>,
        gamma_loop: Vec<usize>,
    ) -> Result<Self> {
        let n = nodes.len();
        for t in &mut triangles {
            if t.iter().any(|&i| i >= n) {
                return Err(Error::DegenerateCurve(format!("triangle {t:?} out of range")));
            }
            if signed_area(&nodes, *t) < 0.0 {
                t.swap(1, 2);
            }
        }
        let mut mesh = AnnularMesh {
            id: MeshId::fresh(),
            nodes,
            triangles,
            sigma_loop,
            gamma_loop,
            node_flags: Vec::new(),
            boundary_edges: Vec::new(),
            node_tri_offsets: Vec::new(),
            node_tri_list: Vec::new(),
            loop_position: Vec::new(),
            area_floor: 0.0,
        };
        mesh.build_topology()?;
        let mut areas = mesh.triangle_areas();
        if let Some((i, a)) = areas.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
            return Err(Error::DegenerateCurve(format!("triangle {i} has non-positive area {a:e}")));
        }
        areas.sort_by(f64::total_cmp);
        mesh.area_floor = AREA_FLOOR_FRACTION * areas[areas.len() / 2];
        Ok(mesh)
    }

    fn build_topology(&mut self) -> Result<()> {
        let n = self.nodes.len();
        let mut flags = vec![NodeFlag::Interior; n];
        let mut loop_position = vec![usize::MAX; n];
        let mut edges = Vec::with_capacity(self.sigma_loop.len() + self.gamma_loop.len());
        for (label, lp, flag) in [
            (BoundaryLabel::Sigma, &self.sigma_loop, NodeFlag::OnSigma),
            (BoundaryLabel::Gamma, &self.gamma_loop, NodeFlag::OnGamma),
        ] {
            if lp.len() < 3 {
                return Err(Error::DegenerateCurve(format!("{label} loop has {} nodes", lp.len())));
            }
            for (k, &i) in lp.iter().enumerate() {
                if i >= n || flags[i] != NodeFlag::Interior {
                    return Err(Error::DegenerateCurve(format!("{label} loop node {i} invalid or shared")));
                }
                flags[i] = flag;
                loop_position[i] = k;
                edges.push(BoundaryEdge { a: i, b: lp[(k + 1) % lp.len()], label });
            }
        }

        let mut counts = vec![0usize; n + 1];
        for t in &self.triangles {
            for &i in t {
                counts[i + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut list = vec![0usize; counts[n]];
        for (ti, t) in self.triangles.iter().enumerate() {
            for &i in t {
                list[fill[i]] = ti;
                fill[i] += 1;
            }
        }
        self.node_tri_offsets = counts;
        self.node_tri_list = list;

        // Each boundary edge a->b must appear, with Ω on its left, in exactly
        // one triangle, and no triangle may use it in the reverse direction.
        for e in &edges {
            let mut forward = 0;
            let mut backward = 0;
            for &ti in self.node_triangles(e.a) {
                let t = self.triangles[ti];
                for k in 0..3 {
                    let (p, q) = (t[k], t[(k + 1) % 3]);
                    if p == e.a && q == e.b {
                        forward += 1;
                    } else if p == e.b && q == e.a {
                        backward += 1;
                    }
                }
            }
            if forward != 1 || backward != 0 {
                return Err(Error::DegenerateCurve(format!(
                    "boundary edge {}-{} ({}) is adjacent to {forward}+{backward} triangles",
                    e.a, e.b, e.label
                )));
            }
        }
        if let Some(i) = (0..n).find(|&i| self.node_triangles(i).is_empty()) {
            return Err(Error::DegenerateCurve(format!("node {i} belongs to no triangle")));
        }
        self.node_flags = flags;
        self.loop_position = loop_position;
        self.boundary_edges = edges;
        Ok(())
    }

    pub fn id(&self) -> MeshId {
        self.id
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn node_flags(&self) -> &[NodeFlag] {
        &self.node_flags
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Ordered node indices of a boundary loop (Ω on the left).
    pub fn boundary_loop(&self, label: BoundaryLabel) -> &[usize] {
        match label {
            BoundaryLabel::Sigma => &self.sigma_loop,
            BoundaryLabel::Gamma => &self.gamma_loop,
        }
    }

    /// Position of a boundary node within its loop.
    pub fn loop_position(&self, node: usize) -> Option<usize> {
        match self.loop_position[node] {
            usize::MAX => None,
            k => Some(k),
        }
    }

    /// Consecutive loop edges `(position, node_a, node_b)`.
    pub fn loop_edges(&self, label: BoundaryLabel) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let lp = self.boundary_loop(label);
        let m = lp.len();
        (0..m).map(move |k| (k, lp[k], lp[(k + 1) % m]))
    }

    pub fn boundary_points(&self, label: BoundaryLabel) -> Vec<Vec2> {
        self.boundary_loop(label).iter().map(|&i| self.nodes[i]).collect()
    }

    pub fn boundary_curve(&self, label: BoundaryLabel) -> BoundaryCurve {
        BoundaryCurve::from_oriented(self.boundary_points(label), label)
    }

    pub fn node_triangles(&self, node: usize) -> &[usize] {
        &self.node_tri_list[self.node_tri_offsets[node]..self.node_tri_offsets[node + 1]]
    }

    pub fn area_floor(&self) -> f64 {
        self.area_floor
    }

    pub fn vertices_of(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, self.triangles[t])
    }

    pub fn triangle_areas(&self) -> Vec<f64> {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).collect()
    }

    pub fn total_area(&self) -> f64 {
        self.triangle_areas().iter().sum()
    }

    /// `2 r_in / r_circ`, 1 for an equilateral triangle.
    pub fn triangle_quality(&self, t: usize) -> f64 {
        triangle_quality(self.vertices_of(t))
    }

    pub fn min_quality(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_quality(t)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| (self.nodes[a] - self.nodes[b]).norm())
            .fold(0.0, f64::max)
    }

    /// Unit normals at the loop nodes, pointing out of Ω: the normalized sum
    /// of the two adjacent unit edge normals.
    pub fn boundary_normals(&self, label: BoundaryLabel) -> Vec<Vec2> {
        let pts = self.boundary_points(label);
        let m = pts.len();
        let edge_normal = |k: usize| {
            let d = pts[(k + 1) % m] - pts[k];
            Vec2::new(d.y, -d.x).normalized()
        };
        (0..m).map(|k| (edge_normal((k + m - 1) % m) + edge_normal(k)).normalized()).collect()
    }

    /// Unit outward (from Ω) normal of each loop edge `k -> k+1`.
    pub fn edge_normals(&self, label: BoundaryLabel) -> Vec<Vec2> {
        self.loop_edges(label)
            .map(|(_, a, b)| {
                let d = self.nodes[b] - self.nodes[a];
                Vec2::new(d.y, -d.x).normalized()
            })
            .collect()
    }

    /// Turning-angle curvature `2 sin(α/2) / ℓ̄` at each loop node.
    ///
    /// Signed positive where the region enclosed by the curve (D for Σ, ω
    /// for Γ) is locally convex, so a circle of radius R gives `+1/R` on
    /// either boundary.
    pub fn boundary_curvature(&self, label: BoundaryLabel) -> Vec<f64> {
        let pts = self.boundary_points(label);
        let sign = match label {
            BoundaryLabel::Sigma => 1.0,
            BoundaryLabel::Gamma => -1.0,
        };
        turning_curvature(&pts).into_iter().map(|k| sign * k).collect()
    }

    /// Moves every non-Σ node to `x + t θ(x)`.
    ///
    /// Fails with [`Error::StepTooLarge`] when any triangle's signed area drops
    /// to the mesh's area floor or below.
    pub fn deform(&self, theta: &[Vec2], t: f64) -> Result<AnnularMesh> {
        if theta.len() != self.nodes.len() {
            return Err(Error::FieldMismatch(format!(
                "deformation has {} entries, mesh has {} nodes",
                theta.len(),
                self.nodes.len()
            )));
        }
        let nodes: Vec<Vec2> = self
            .nodes
            .iter()
            .zip(theta)
            .zip(&self.node_flags)
            .map(|((&x, &v), flag)| match flag {
                NodeFlag::OnSigma => x,
                _ => x + v * t,
            })
            .collect();
        if !nodes.iter().all(|p| p.is_finite()) {
            return Err(Error::StepTooLarge { triangle: 0, area: f64::NAN, floor: self.area_floor });
        }
        for (ti, tri) in self.triangles.iter().enumerate() {
            let area = signed_area(&nodes, *tri);
            if !(area > self.area_floor) {
                return Err(Error::StepTooLarge { triangle: ti, area, floor: self.area_floor });
            }
        }
        Ok(self.with_nodes(nodes))
    }

    /// Re-triangulates the current Σ and Γ loops at target edge length `h`.
    /// Boundary nodes are kept in place; long boundary edges may gain nodes.
    pub fn remesh(&self, h: f64) -> Result<AnnularMesh> {
        let outer = self.boundary_curve(BoundaryLabel::Sigma);
        let inner = BoundaryCurve::new(self.boundary_points(BoundaryLabel::Gamma), BoundaryLabel::Gamma)?;
        triangulate_annulus(&outer, &inner, h)
    }

    /// Smallest distance between a Γ node and the Σ polyline.
    pub fn gamma_clearance(&self) -> f64 {
        let sigma = self.boundary_curve(BoundaryLabel::Sigma);
        self.gamma_loop.iter().map(|&i| sigma.distance_to(self.nodes[i])).fold(f64::INFINITY, f64::min)
    }

    /// Re-tags this mesh with a fresh identity. Fields bound to the old
    /// identity will no longer be accepted.
    pub(crate) fn with_nodes(&self, nodes: Vec<Vec2>) -> AnnularMesh {
        let mut out = self.clone();
        out.nodes = nodes;
        out.id = MeshId::fresh();
        out
    }
}

pub(crate) fn signed_area(nodes: &[Vec2], t: [usize; 3]) -> f64 {
    0.5 * (nodes[t[1]] - nodes[t[0]]).cross(nodes[t[2]] - nodes[t[0]])
}

pub(crate) fn triangle_quality(p: [Vec2; 3]) -> f64 {
    let a = (p[1] - p[2]).norm();
    let b = (p[2] - p[0]).norm();
    let c = (p[0] - p[1]).norm();
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let denom = (a + b + c) * a * b * c;
    if denom == 0.0 {
        return 0.0;
    }
    (16.0 * area * area / denom).max(0.0)
}

/// Signed turning-angle curvature of a closed polyline; positive at left
/// turns.
pub(crate) fn turning_curvature(pts: &[Vec2]) -> Vec<f64> {
    let m = pts.len();
    (0..m)
        .map(|k| {
            let e1 = pts[k] - pts[(k + m - 1) % m];
            let e2 = pts[(k + 1) % m] - pts[k];
            let alpha = e1.cross(e2).atan2(e1.dot(e2));
            let mean_len = 0.5 * (e1.norm() + e2.norm());
            2.0 * (0.5 * alpha).sin() / mean_len
        })
        .collect()
}
