use crate::fem::{
    assemble_a, assemble_boundary_load_nodal, assemble_mass, assemble_volume_load, variational_boundary_flux,
    CoefficientSet, CsrMatrix, FactoredSystem, NodalScalarField,
};
use crate::geometry::{BoundaryLabel, Vec2};
use crate::mesh::AnnularMesh;
use crate::{Error, Result};

fn check_sigma_len(mesh: &AnnularMesh, values: &[f64], what: &str) -> Result<()> {
    let n = mesh.boundary_loop(BoundaryLabel::Sigma).len();
    if values.len() != n {
        return Err(Error::FieldMismatch(format!("{what} has {} values, Σ has {n} nodes", values.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidField(format!("{what} is not finite")));
    }
    Ok(())
}

/// Operator matrix, transposed when `adjoint` is set, after the coercivity check.
fn operator(mesh: &AnnularMesh, coeff: &CoefficientSet, adjoint: bool) -> Result<CsrMatrix> {
    coeff.require_coercive(mesh)?;
    let a = assemble_a(mesh, coeff)?;
    Ok(if adjoint { a.transpose() } else { a })
}

/// Solves with homogeneous values on Γ and, if given, prescribed Σ values.
fn solve_constrained(
    mesh: &AnnularMesh,
    matrix: &CsrMatrix,
    rhs: &[f64],
    sigma_values: Option<&[f64]>,
) -> Result<NodalScalarField> {
    let mut fixed: Vec<(usize, f64)> = mesh.boundary_loop(BoundaryLabel::Gamma).iter().map(|&i| (i, 0.0)).collect();
    if let Some(vals) = sigma_values {
        fixed.extend(mesh.boundary_loop(BoundaryLabel::Sigma).iter().copied().zip(vals.iter().copied()));
    }
    let idx: Vec<usize> = fixed.iter().map(|e| e.0).collect();
    let x = FactoredSystem::new(matrix, &idx)?.solve(rhs, &fixed)?;
    NodalScalarField::new(mesh, x)
}

/// Neumann state: `a(u, φ) = ∫_Σ g φ`, `u = 0` on Γ. `g` holds one value per
/// Σ loop node and is interpolated linearly along Σ.
pub fn solve_state_neumann(mesh: &AnnularMesh, coeff: &CoefficientSet, g: &[f64]) -> Result<NodalScalarField> {
    check_sigma_len(mesh, g, "g")?;
    let a = operator(mesh, coeff, false)?;
    let rhs = assemble_boundary_load_nodal(mesh, BoundaryLabel::Sigma, g);
    solve_constrained(mesh, &a, &rhs, None)
}

/// Neumann state with an added volume source `∫_Ω s φ`, for manufactured
/// solutions.
pub fn solve_state_neumann_with_source(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    g: &[f64],
    source: impl Fn(Vec2) -> f64,
) -> Result<NodalScalarField> {
    check_sigma_len(mesh, g, "g")?;
    let a = operator(mesh, coeff, false)?;
    let mut rhs = assemble_boundary_load_nodal(mesh, BoundaryLabel::Sigma, g);
    for (r, s) in rhs.iter_mut().zip(assemble_volume_load(mesh, source)) {
        *r += s;
    }
    solve_constrained(mesh, &a, &rhs, None)
}

/// Dirichlet state: `u = f` on Σ, `u = 0` on Γ.
pub fn solve_state_dirichlet(mesh: &AnnularMesh, coeff: &CoefficientSet, f: &[f64]) -> Result<NodalScalarField> {
    check_sigma_len(mesh, f, "f")?;
    let a = operator(mesh, coeff, false)?;
    solve_constrained(mesh, &a, &vec![0.0; mesh.num_nodes()], Some(f))
}

/// Adjoint of the Dirichlet-tracking cost: transpose operator, Σ load
/// `u_N − f`, zero on Γ.
pub fn solve_adjoint_pn(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_n: &NodalScalarField,
    f: &[f64],
) -> Result<NodalScalarField> {
    u_n.check_mesh(mesh)?;
    check_sigma_len(mesh, f, "f")?;
    let at = operator(mesh, coeff, true)?;
    let misfit: Vec<f64> =
        u_n.restrict(mesh.boundary_loop(BoundaryLabel::Sigma)).iter().zip(f).map(|(u, f)| u - f).collect();
    let rhs = assemble_boundary_load_nodal(mesh, BoundaryLabel::Sigma, &misfit);
    solve_constrained(mesh, &at, &rhs, None)
}

/// `σ∂ₙu_D` on Σ from the Galerkin residual of a Dirichlet state.
pub fn dirichlet_state_flux(mesh: &AnnularMesh, coeff: &CoefficientSet, u_d: &NodalScalarField) -> Result<Vec<f64>> {
    let a = assemble_a(mesh, coeff)?;
    variational_boundary_flux(mesh, &a, u_d, None, BoundaryLabel::Sigma)
}

/// Adjoint of the Neumann-tracking cost: transpose operator, value
/// `σ∂ₙu_D − g` on Σ, zero on Γ.
pub fn solve_adjoint_pd(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_d: &NodalScalarField,
    g: &[f64],
) -> Result<NodalScalarField> {
    check_sigma_len(mesh, g, "g")?;
    let flux = dirichlet_state_flux(mesh, coeff, u_d)?;
    let value: Vec<f64> = flux.iter().zip(g).map(|(q, g)| q - g).collect();
    let at = operator(mesh, coeff, true)?;
    solve_constrained(mesh, &at, &vec![0.0; mesh.num_nodes()], Some(&value))
}

/// ADMM adjoint: `Aᵀw = −M_Σ(u_N − f) − M(β(u_N − v) + λ)`, `w = 0` on Γ.
pub fn solve_admm_adjoint_w(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_n: &NodalScalarField,
    f: &[f64],
    v: &NodalScalarField,
    lambda: &NodalScalarField,
    beta: f64,
) -> Result<NodalScalarField> {
    for field in [u_n, v, lambda] {
        field.check_mesh(mesh)?;
    }
    check_sigma_len(mesh, f, "f")?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::range("beta", format!("{beta} must be non-negative")));
    }
    let at = operator(mesh, coeff, true)?;
    let misfit: Vec<f64> =
        u_n.restrict(mesh.boundary_loop(BoundaryLabel::Sigma)).iter().zip(f).map(|(u, f)| u - f).collect();
    let boundary = assemble_boundary_load_nodal(mesh, BoundaryLabel::Sigma, &misfit);
    let density: Vec<f64> =
        u_n.values().iter().zip(v.values()).zip(lambda.values()).map(|((u, v), l)| beta * (u - v) + l).collect();
    let volume = assemble_mass(mesh).matvec(&density);
    let rhs: Vec<f64> = boundary.iter().zip(&volume).map(|(b, m)| -b - m).collect();
    solve_constrained(mesh, &at, &rhs, None)
}
