use rayon::prelude::*;

use super::{CoefficientSet, CsrMatrix};
use crate::geometry::{BoundaryLabel, Vec2};
use crate::mesh::AnnularMesh;
use crate::{Error, Result};

/// Two-point Gauss abscissae on `[0, 1]`, each with weight 1/2.
pub(crate) const GAUSS2: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

/// Barycentric coordinates of the three edge midpoints.
const MID_EDGE: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

/// Gradients of the three P1 basis functions and the (signed) area.
pub fn p1_gradients(v: [Vec2; 3]) -> ([Vec2; 3], f64) {
    let area = 0.5 * (v[1] - v[0]).cross(v[2] - v[0]);
    let grads = std::array::from_fn(|i| {
        let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
        Vec2::new(a.y - b.y, b.x - a.x) / (2.0 * area)
    });
    (grads, area)
}

fn midpoint(v: &[Vec2; 3], q: usize) -> Vec2 {
    v[0] * MID_EDGE[q][0] + v[1] * MID_EDGE[q][1] + v[2] * MID_EDGE[q][2]
}

/// Local matrix `K[i][j] = ∫ σ ∇φ_j·∇φ_i + (b·∇φ_j) φ_i` on one triangle.
pub fn element_a(v: [Vec2; 3], coeff: &CoefficientSet) -> Result<[[f64; 3]; 3]> {
    let (grads, area) = p1_gradients(v);
    let w = area / 3.0;
    let mut k = [[0.0; 3]; 3];
    for (q, phi) in MID_EDGE.iter().enumerate() {
        let x = midpoint(&v, q);
        let sigma = coeff.sigma(x);
        let b = coeff.advection(x);
        if !sigma.is_finite() || !b.is_finite() {
            return Err(Error::NonFiniteCoefficient { x: x.x, y: x.y });
        }
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] += w * (sigma * grads[j].dot(grads[i]) + b.dot(grads[j]) * phi[i]);
            }
        }
    }
    Ok(k)
}

fn scatter(mesh: &AnnularMesh, locals: &[[[f64; 3]; 3]]) -> CsrMatrix {
    let mut trip = Vec::with_capacity(9 * locals.len());
    for (tri, k) in mesh.triangles().iter().zip(locals) {
        for i in 0..3 {
            for j in 0..3 {
                trip.push((tri[i], tri[j], k[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.num_nodes(), &trip)
}

/// Advection-diffusion stiffness matrix `A_ij = a(φ_j, φ_i)`.
pub fn assemble_a(mesh: &AnnularMesh, coeff: &CoefficientSet) -> Result<CsrMatrix> {
    let locals: Vec<_> = (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| element_a(mesh.vertices_of(t), coeff))
        .collect::<Result<_>>()?;
    Ok(scatter(mesh, &locals))
}

/// Matrix of the adjoint form, the transpose of [`assemble_a`].
pub fn assemble_a_adjoint(mesh: &AnnularMesh, coeff: &CoefficientSet) -> Result<CsrMatrix> {
    Ok(assemble_a(mesh, coeff)?.transpose())
}

/// Consistent P1 mass matrix.
pub fn assemble_mass(mesh: &AnnularMesh) -> CsrMatrix {
    let locals: Vec<_> = (0..mesh.triangles().len())
        .map(|t| {
            let a = mesh.triangle_area(t) / 12.0;
            std::array::from_fn(|i| std::array::from_fn(|j| if i == j { 2.0 * a } else { a }))
        })
        .collect();
    scatter(mesh, &locals)
}

/// Scalar `∫ ∇φ_j·∇φ_i + φ_j φ_i`.
pub fn assemble_h1_scalar(mesh: &AnnularMesh) -> CsrMatrix {
    let locals: Vec<_> = (0..mesh.triangles().len())
        .map(|t| {
            let (g, area) = p1_gradients(mesh.vertices_of(t));
            std::array::from_fn(|i| {
                std::array::from_fn(|j| area * g[i].dot(g[j]) + area / 12.0 * if i == j { 2.0 } else { 1.0 })
            })
        })
        .collect();
    scatter(mesh, &locals)
}

/// Vector form `∫ ∇θ:∇φ + θ·φ` on `(P1)²`, with component `c` of node `i`
/// at index `c·n + i`. The two diagonal blocks equal [`assemble_h1_scalar`].
pub fn assemble_h1_vector(mesh: &AnnularMesh) -> CsrMatrix {
    let n = mesh.num_nodes();
    let scalar = assemble_h1_scalar(mesh).triplets();
    let trip: Vec<_> = scalar.iter().copied().chain(scalar.iter().map(|&(i, j, v)| (i + n, j + n, v))).collect();
    CsrMatrix::from_triplets(2 * n, &trip)
}

/// `L_i = ∫_Ω f φ_i` by the mid-edge rule.
pub fn assemble_volume_load(mesh: &AnnularMesh, f: impl Fn(Vec2) -> f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices_of(t);
        let w = mesh.triangle_area(t) / 3.0;
        for (q, phi) in MID_EDGE.iter().enumerate() {
            let fx = f(midpoint(&v, q));
            for i in 0..3 {
                load[tri[i]] += w * fx * phi[i];
            }
        }
    }
    load
}

/// `L_i = ∫_label g φ_i` by two-point Gauss quadrature on each loop edge.
pub fn assemble_boundary_load(mesh: &AnnularMesh, label: BoundaryLabel, g: impl Fn(Vec2) -> f64) -> Vec<f64> {
    let mut load = vec![0.0; mesh.num_nodes()];
    let nodes = mesh.nodes();
    for (_, a, b) in mesh.loop_edges(label) {
        let len = (nodes[b] - nodes[a]).norm();
        for s in GAUSS2 {
            let gx = g(nodes[a] + (nodes[b] - nodes[a]) * s);
            load[a] += 0.5 * len * gx * (1.0 - s);
            load[b] += 0.5 * len * gx * s;
        }
    }
    load
}

/// Boundary load for a datum given by its values at the loop nodes (in loop
/// order) and interpolated linearly along each edge.
pub fn assemble_boundary_load_nodal(mesh: &AnnularMesh, label: BoundaryLabel, values: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), mesh.boundary_loop(label).len());
    let mut load = vec![0.0; mesh.num_nodes()];
    let nodes = mesh.nodes();
    for (k, a, b) in mesh.loop_edges(label) {
        let (ga, gb) = (values[k], values[(k + 1) % values.len()]);
        let len = (nodes[b] - nodes[a]).norm();
        for s in GAUSS2 {
            let gx = ga * (1.0 - s) + gb * s;
            load[a] += 0.5 * len * gx * (1.0 - s);
            load[b] += 0.5 * len * gx * s;
        }
    }
    load
}

/// `∫_label f ds` by two-point Gauss quadrature.
pub fn boundary_integral(mesh: &AnnularMesh, label: BoundaryLabel, f: impl Fn(Vec2) -> f64) -> f64 {
    let nodes = mesh.nodes();
    mesh.loop_edges(label)
        .map(|(_, a, b)| {
            let len = (nodes[b] - nodes[a]).norm();
            GAUSS2.iter().map(|&s| 0.5 * len * f(nodes[a] + (nodes[b] - nodes[a]) * s)).sum::<f64>()
        })
        .sum()
}

/// `∫_label map(v) ds` where `v` interpolates loop-ordered nodal values
/// linearly along each edge.
pub fn boundary_integral_nodal(
    mesh: &AnnularMesh,
    label: BoundaryLabel,
    values: &[f64],
    map: impl Fn(f64) -> f64,
) -> f64 {
    assert_eq!(values.len(), mesh.boundary_loop(label).len());
    let nodes = mesh.nodes();
    mesh.loop_edges(label)
        .map(|(k, a, b)| {
            let (va, vb) = (values[k], values[(k + 1) % values.len()]);
            let len = (nodes[b] - nodes[a]).norm();
            GAUSS2.iter().map(|&s| 0.5 * len * map(va * (1.0 - s) + vb * s)).sum::<f64>()
        })
        .sum()
}
