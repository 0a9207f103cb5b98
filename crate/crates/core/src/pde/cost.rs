use std::fmt;

use crate::fem::{assemble_mass, boundary_integral_nodal, CoefficientSet, NodalScalarField};
use crate::geometry::BoundaryLabel;
use crate::mesh::AnnularMesh;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    DirichletTracking,
    NeumannTracking,
    Admm,
}

impl fmt::Display for CostKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostKind::DirichletTracking => "J_D",
            CostKind::NeumannTracking => "J_N",
            CostKind::Admm => "Y_admm",
        })
    }
}

/// A cost value split into its additive parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostReport {
    pub kind: CostKind,
    pub value: f64,
    pub misfit: f64,
    pub perimeter: f64,
    pub penalty: f64,
    pub multiplier: f64,
}

impl CostReport {
    fn from_parts(kind: CostKind, misfit: f64, penalty: f64, multiplier: f64) -> Self {
        CostReport { kind, value: misfit + penalty + multiplier, misfit, perimeter: 0.0, penalty, multiplier }
    }

    /// Adds a perimeter term, already weighted.
    pub fn with_perimeter(mut self, term: f64) -> Self {
        self.value += term - self.perimeter;
        self.perimeter = term;
        self
    }
}

fn sigma_misfit(mesh: &AnnularMesh, u: &NodalScalarField, f: &[f64]) -> Result<Vec<f64>> {
    u.check_mesh(mesh)?;
    let sigma = mesh.boundary_loop(BoundaryLabel::Sigma);
    if f.len() != sigma.len() {
        return Err(Error::FieldMismatch(format!("f has {} values, Σ has {} nodes", f.len(), sigma.len())));
    }
    Ok(u.restrict(sigma).iter().zip(f).map(|(u, f)| u - f).collect())
}

/// `½ ∫_Σ (u_N − f)²`.
pub fn cost_jd(mesh: &AnnularMesh, u_n: &NodalScalarField, f: &[f64]) -> Result<CostReport> {
    let r = sigma_misfit(mesh, u_n, f)?;
    let misfit = 0.5 * boundary_integral_nodal(mesh, BoundaryLabel::Sigma, &r, |x| x * x);
    Ok(CostReport::from_parts(CostKind::DirichletTracking, misfit, 0.0, 0.0))
}

/// `½ ∫_Σ (σ∂ₙu_D − g)²` with the residual-based flux.
pub fn cost_jn(mesh: &AnnularMesh, coeff: &CoefficientSet, u_d: &NodalScalarField, g: &[f64]) -> Result<CostReport> {
    let flux = super::dirichlet_state_flux(mesh, coeff, u_d)?;
    if g.len() != flux.len() {
        return Err(Error::FieldMismatch(format!("g has {} values, Σ has {} nodes", g.len(), flux.len())));
    }
    let r: Vec<f64> = flux.iter().zip(g).map(|(q, g)| q - g).collect();
    let misfit = 0.5 * boundary_integral_nodal(mesh, BoundaryLabel::Sigma, &r, |x| x * x);
    Ok(CostReport::from_parts(CostKind::NeumannTracking, misfit, 0.0, 0.0))
}

/// `J_D + β/2 ∫_Ω (u − v)² + ∫_Ω λ (u − v)`. The last term may be negative.
pub fn cost_admm_y(
    mesh: &AnnularMesh,
    u_n: &NodalScalarField,
    f: &[f64],
    v: &NodalScalarField,
    lambda: &NodalScalarField,
    beta: f64,
) -> Result<CostReport> {
    let misfit = cost_jd(mesh, u_n, f)?.misfit;
    v.check_mesh(mesh)?;
    lambda.check_mesh(mesh)?;
    let diff: Vec<f64> = u_n.values().iter().zip(v.values()).map(|(u, v)| u - v).collect();
    let mass = assemble_mass(mesh);
    let m_diff = mass.matvec(&diff);
    let penalty = 0.5 * beta * diff.iter().zip(&m_diff).map(|(a, b)| a * b).sum::<f64>();
    let multiplier = lambda.values().iter().zip(&m_diff).map(|(a, b)| a * b).sum::<f64>();
    Ok(CostReport::from_parts(CostKind::Admm, misfit, penalty.max(0.0), multiplier))
}
