use super::{directional_derivative, evaluate, evaluate_cost, sobolev_extend, AugmentedTerms, DescentField, Objective};
use crate::fem::{CoefficientSet, NodalScalarField, ScalarFn};
use crate::mesh::AnnularMesh;
use crate::pde::CauchyData;
use crate::Result;

/// Denominator floor of the relative error.
pub const FD_FLOOR: f64 = 1e-12;

/// Objective whose auxiliary fields are fixed functions of position, so
/// they are resampled rather than transported when the mesh moves.
#[derive(Clone)]
pub enum FdObjective {
    DirichletTracking,
    NeumannTracking,
    Admm { v: ScalarFn, lambda: ScalarFn, beta: f64 },
}

/// Everything needed to evaluate the cost on a mesh and its perturbations.
#[derive(Clone)]
pub struct GradientProblem<'a> {
    pub mesh: &'a AnnularMesh,
    pub coeff: &'a CoefficientSet,
    pub data: &'a CauchyData,
    pub objective: FdObjective,
    pub eta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientCheck {
    pub directional: f64,
    pub finite_difference: f64,
    pub relative_error: f64,
}

impl GradientProblem<'_> {
    fn with_objective<R>(&self, mesh: &AnnularMesh, run: impl FnOnce(&Objective<'_>) -> Result<R>) -> Result<R> {
        match &self.objective {
            FdObjective::DirichletTracking => run(&Objective::DirichletTracking),
            FdObjective::NeumannTracking => run(&Objective::NeumannTracking),
            FdObjective::Admm { v, lambda, beta } => {
                let v = NodalScalarField::from_fn(mesh, |x| v(x))?;
                let lambda = NodalScalarField::from_fn(mesh, |x| lambda(x))?;
                run(&Objective::Admm(AugmentedTerms { v: &v, lambda: &lambda, beta: *beta }))
            }
        }
    }

    pub fn cost_on(&self, mesh: &AnnularMesh) -> Result<f64> {
        self.with_objective(mesh, |o| evaluate_cost(mesh, self.coeff, self.data, o, self.eta)).map(|c| c.value)
    }

    /// Negative Sobolev gradient on the base mesh.
    pub fn descent_field(&self) -> Result<DescentField> {
        let eval = self.with_objective(self.mesh, |o| evaluate(self.mesh, self.coeff, self.data, o, self.eta))?;
        sobolev_extend(self.mesh, &eval.kernel)
    }
}

/// Compares `∫_Γ G n·θ` with the forward difference `[J(Ω_t) − J(Ω)]/t`,
/// re-solving the state on the deformed mesh.
pub fn verify_gradient_fd(problem: &GradientProblem<'_>, theta: &DescentField, t_fd: f64) -> Result<GradientCheck> {
    let mesh = problem.mesh;
    let eval = problem.with_objective(mesh, |o| evaluate(mesh, problem.coeff, problem.data, o, problem.eta))?;
    let directional = directional_derivative(mesh, &eval.kernel, &theta.theta)?;
    let moved = mesh.deform(theta.theta.values(), t_fd)?;
    let finite_difference = (problem.cost_on(&moved)? - eval.cost.value) / t_fd;
    let relative_error = (finite_difference - directional).abs() / directional.abs().max(FD_FLOOR);
    Ok(GradientCheck { directional, finite_difference, relative_error })
}
