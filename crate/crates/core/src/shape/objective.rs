use super::{kernel_gd, kernel_gn, kernel_h_admm, BoundaryKernel};
use crate::fem::{CoefficientSet, NodalScalarField};
use crate::geometry::BoundaryLabel;
use crate::mesh::AnnularMesh;
use crate::pde::{
    cost_admm_y, cost_jd, cost_jn, solve_adjoint_pd, solve_adjoint_pn, solve_admm_adjoint_w, solve_state_dirichlet,
    solve_state_neumann, CauchyData, CostReport,
};
use crate::Result;

/// Auxiliary field, multiplier and penalty of the augmented Lagrangian.
#[derive(Clone, Copy, Debug)]
pub struct AugmentedTerms<'a> {
    pub v: &'a NodalScalarField,
    pub lambda: &'a NodalScalarField,
    pub beta: f64,
}

/// Functional minimized over the inclusion shape.
#[derive(Clone, Copy, Debug)]
pub enum Objective<'a> {
    /// Neumann state, Dirichlet misfit.
    DirichletTracking,
    /// Dirichlet state, flux misfit.
    NeumannTracking,
    Admm(AugmentedTerms<'a>),
}

/// Cost, state and kernel on one mesh.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub cost: CostReport,
    pub state: NodalScalarField,
    pub kernel: BoundaryKernel,
}

fn state_and_cost(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    data: &CauchyData,
    objective: &Objective<'_>,
    eta: f64,
) -> Result<(NodalScalarField, CostReport)> {
    data.check_mesh(mesh)?;
    let (state, cost) = match objective {
        Objective::DirichletTracking => {
            let u = solve_state_neumann(mesh, coeff, &data.g)?;
            let cost = cost_jd(mesh, &u, &data.f)?;
            (u, cost)
        }
        Objective::NeumannTracking => {
            let u = solve_state_dirichlet(mesh, coeff, &data.f)?;
            let cost = cost_jn(mesh, coeff, &u, &data.g)?;
            (u, cost)
        }
        Objective::Admm(t) => {
            let u = solve_state_neumann(mesh, coeff, &data.g)?;
            let cost = cost_admm_y(mesh, &u, &data.f, t.v, t.lambda, t.beta)?;
            (u, cost)
        }
    };
    let perimeter = if eta != 0.0 { eta * mesh.boundary_curve(BoundaryLabel::Gamma).perimeter() } else { 0.0 };
    Ok((state, cost.with_perimeter(perimeter)))
}

/// Cost only, without the adjoint solve.
pub fn evaluate_cost(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    data: &CauchyData,
    objective: &Objective<'_>,
    eta: f64,
) -> Result<CostReport> {
    state_and_cost(mesh, coeff, data, objective, eta).map(|(_, c)| c)
}

/// Cost, state and shape-gradient kernel, perimeter term of weight `eta`
/// included in both.
pub fn evaluate(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    data: &CauchyData,
    objective: &Objective<'_>,
    eta: f64,
) -> Result<Evaluation> {
    let (state, cost) = state_and_cost(mesh, coeff, data, objective, eta)?;
    let kernel = match objective {
        Objective::DirichletTracking => {
            let p = solve_adjoint_pn(mesh, coeff, &state, &data.f)?;
            kernel_gd(mesh, coeff, &state, &p)?
        }
        Objective::NeumannTracking => {
            let p = solve_adjoint_pd(mesh, coeff, &state, &data.g)?;
            kernel_gn(mesh, coeff, &state, &p)?
        }
        Objective::Admm(t) => {
            let w = solve_admm_adjoint_w(mesh, coeff, &state, &data.f, t.v, t.lambda, t.beta)?;
            kernel_h_admm(mesh, coeff, &state, &w, t.v, t.lambda, t.beta)?
        }
    };
    Ok(Evaluation { cost, state, kernel: kernel.with_perimeter(mesh, eta)? })
}
