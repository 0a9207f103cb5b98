use super::assembly::p1_gradients;
use super::{CoefficientSet, CsrMatrix, NodalScalarField};
use crate::geometry::{BoundaryLabel, Vec2};
use crate::mesh::AnnularMesh;
use crate::Result;

/// Area-weighted mean of `weight(centroid) ∇u_T` over the triangles around
/// each loop node, dotted with the node normal. Values follow loop order.
fn averaged_normal_gradient(
    mesh: &AnnularMesh,
    u: &NodalScalarField,
    label: BoundaryLabel,
    weight: impl Fn(Vec2) -> f64,
) -> Result<Vec<f64>> {
    u.check_mesh(mesh)?;
    let values = u.values();
    let normals = mesh.boundary_normals(label);
    Ok(mesh
        .boundary_loop(label)
        .iter()
        .zip(normals)
        .map(|(&node, n)| {
            let mut acc = Vec2::ZERO;
            let mut total = 0.0;
            for &t in mesh.node_triangles(node) {
                let tri = mesh.triangles()[t];
                let v = mesh.vertices_of(t);
                let (grads, area) = p1_gradients(v);
                let grad = grads[0] * values[tri[0]] + grads[1] * values[tri[1]] + grads[2] * values[tri[2]];
                let centroid = (v[0] + v[1] + v[2]) / 3.0;
                acc += grad * (area * weight(centroid));
                total += area;
            }
            (acc / total).dot(n)
        })
        .collect())
}

/// `σ ∂ₙu` at the nodes of the `label` loop, normal pointing out of Ω.
pub fn recover_boundary_flux(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u: &NodalScalarField,
    label: BoundaryLabel,
) -> Result<Vec<f64>> {
    averaged_normal_gradient(mesh, u, label, |x| coeff.sigma(x))
}

/// `∂ₙu` at the nodes of the `label` loop.
pub fn recover_normal_derivative(mesh: &AnnularMesh, u: &NodalScalarField, label: BoundaryLabel) -> Result<Vec<f64>> {
    averaged_normal_gradient(mesh, u, label, |_| 1.0)
}

/// Residual-based `σ∂ₙu` on a loop where `u` is prescribed: the Galerkin
/// residual `(K u − load)_i = ∫ σ∂ₙu φ_i ds` divided by the lumped boundary
/// mass `∫ φ_i ds`. `operator` is the matrix `u` was solved with and `load`
/// its right-hand side (zero where `None`).
pub fn variational_boundary_flux(
    mesh: &AnnularMesh,
    operator: &CsrMatrix,
    u: &NodalScalarField,
    load: Option<&[f64]>,
    label: BoundaryLabel,
) -> Result<Vec<f64>> {
    u.check_mesh(mesh)?;
    let values = u.values();
    let nodes = mesh.nodes();
    let ring = mesh.boundary_loop(label);
    let m = ring.len();
    Ok(ring
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let residual: f64 = operator.row(i).map(|(j, a)| a * values[j]).sum::<f64>() - load.map_or(0.0, |l| l[i]);
            let prev = (nodes[i] - nodes[ring[(k + m - 1) % m]]).norm();
            let next = (nodes[ring[(k + 1) % m]] - nodes[i]).norm();
            residual / (0.5 * (prev + next))
        })
        .collect())
}
