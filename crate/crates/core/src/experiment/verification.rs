use std::sync::Arc;

use super::registry;
use crate::fem::CoefficientSet;
use crate::geometry::{BoundaryLabel, ParametricShape};
use crate::mesh::triangulate_annulus;
use crate::pde::{CauchyData, DataSource, NoiseMode};
use crate::shape::{
    verify_gradient_fd, verify_identities, FdObjective, GradientProblem, IdentityCheck, IdentityReport,
    QuadratureConfig,
};
use crate::Result;

/// Identity and gradient-consistency rows.
pub type VerificationReport = IdentityReport;

/// Largest admissible adjoint/finite-difference mismatch.
pub const FD_TOLERANCE: f64 = 0.05;
const FD_MESH_SIZE: f64 = 0.03;
const FD_STEP: f64 = 1e-4;

/// Runs the analytic identity battery and adjoint/finite-difference checks
/// of the J_D and ADMM kernels on the annulus `0.5 < r < 1` at `h = 0.03`.
///
/// Every input is analytic, so the report does not depend on any seed.
pub fn run_verification_suite() -> Result<VerificationReport> {
    let mut report = verify_identities(&QuadratureConfig::default());

    let outer = ParametricShape::circle(0.0, 0.0, 1.0).sample(210, BoundaryLabel::Sigma)?;
    let inner = ParametricShape::circle(0.0, 0.0, 0.5).sample(105, BoundaryLabel::Gamma)?;
    let mesh = triangulate_annulus(&outer, &inner, FD_MESH_SIZE)?;
    let (sigma, floor) = registry::sigma("sigma_const_1.1")?;
    let coeff = CoefficientSet::new(sigma, registry::advection("b_swirl")?, floor);
    let flux = registry::flux("g_exp_x1")?;
    let sigma_nodes = mesh.boundary_points(BoundaryLabel::Sigma);
    let data = CauchyData {
        arc_param: (0..sigma_nodes.len()).map(|k| k as f64 / sigma_nodes.len() as f64).collect(),
        f: sigma_nodes.iter().map(|x| 0.3 + 0.2 * x.x).collect(),
        g: sigma_nodes.iter().map(|&x| flux(x)).collect(),
        noise_level: 0.0,
        noise_mode: NoiseMode::ScaleF,
        source: DataSource::Loaded,
    };
    let objectives = [
        ("gradient_fd_dirichlet_tracking", FdObjective::DirichletTracking),
        (
            "gradient_fd_admm",
            FdObjective::Admm { v: Arc::new(|x| 0.5 + 0.3 * x.x), lambda: Arc::new(|x| 0.1 * x.y), beta: 0.5 },
        ),
    ];
    for (name, objective) in objectives {
        let problem = GradientProblem { mesh: &mesh, coeff: &coeff, data: &data, objective, eta: 0.0 };
        let field = problem.descent_field()?;
        let field = field.scaled(1.0 / field.max_norm());
        let check = verify_gradient_fd(&problem, &field, FD_STEP)?;
        report.checks.push(IdentityCheck {
            identity: name.into(),
            residual: check.relative_error,
            tolerance: FD_TOLERANCE,
        });
    }
    Ok(report)
}
