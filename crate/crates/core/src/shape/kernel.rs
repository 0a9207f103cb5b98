use crate::fem::{
    assemble_a, assemble_mass, recover_boundary_flux, recover_normal_derivative, variational_boundary_flux,
    CoefficientSet, NodalScalarField,
};
use crate::geometry::BoundaryLabel;
use crate::mesh::{AnnularMesh, MeshId};
use crate::{Error, Result};

/// Scalar density on Γ, one value per Γ loop node in loop order. The shape
/// derivative along θ is `∫_Γ G n·θ` with `n` pointing out of Ω.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryKernel {
    mesh: MeshId,
    values: Vec<f64>,
}

impl BoundaryKernel {
    pub fn new(mesh: &AnnularMesh, values: Vec<f64>) -> Result<Self> {
        let n = mesh.boundary_loop(BoundaryLabel::Gamma).len();
        if values.len() != n {
            return Err(Error::FieldMismatch(format!("kernel has {} values, Γ has {n} nodes", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("kernel is not finite".into()));
        }
        Ok(BoundaryKernel { mesh: mesh.id(), values })
    }

    pub fn zeros(mesh: &AnnularMesh) -> Self {
        BoundaryKernel { mesh: mesh.id(), values: vec![0.0; mesh.boundary_loop(BoundaryLabel::Gamma).len()] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mesh_id(&self) -> MeshId {
        self.mesh
    }

    pub fn check_mesh(&self, mesh: &AnnularMesh) -> Result<()> {
        if self.mesh != mesh.id() {
            return Err(Error::FieldMismatch("kernel belongs to another mesh".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        BoundaryKernel { mesh: self.mesh, values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Adds the perimeter term of weight `eta`: `−η κ` with κ positive on a
    /// convex inclusion, so that descent shortens Γ.
    pub fn with_perimeter(mut self, mesh: &AnnularMesh, eta: f64) -> Result<Self> {
        self.check_mesh(mesh)?;
        if eta != 0.0 {
            for (g, k) in self.values.iter_mut().zip(mesh.boundary_curvature(BoundaryLabel::Gamma)) {
                *g -= eta * k;
            }
        }
        Ok(self)
    }
}

/// How normal fluxes on Γ are obtained for the kernels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FluxRecovery {
    /// Galerkin residual over lumped boundary mass; second-order on Γ.
    #[default]
    Variational,
    /// Area-weighted average of element gradients; first-order.
    Averaged,
}

fn fluxes(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    state: &NodalScalarField,
    adjoint: &NodalScalarField,
    adjoint_load: Option<&[f64]>,
    recovery: FluxRecovery,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match recovery {
        FluxRecovery::Averaged => {
            let q = recover_boundary_flux(mesh, coeff, state, BoundaryLabel::Gamma)?;
            let d = recover_normal_derivative(mesh, adjoint, BoundaryLabel::Gamma)?;
            Ok((q, d))
        }
        FluxRecovery::Variational => {
            let a = assemble_a(mesh, coeff)?;
            let q = variational_boundary_flux(mesh, &a, state, None, BoundaryLabel::Gamma)?;
            let qa = variational_boundary_flux(mesh, &a.transpose(), adjoint, adjoint_load, BoundaryLabel::Gamma)?;
            let nodes = mesh.nodes();
            let d = mesh
                .boundary_loop(BoundaryLabel::Gamma)
                .iter()
                .zip(qa)
                .map(|(&i, q)| q / coeff.sigma(nodes[i]))
                .collect();
            Ok((q, d))
        }
    }
}

/// Kernel of the Dirichlet-tracking cost: `(σ∂ₙu_N)(∂ₙp_N)`.
pub fn kernel_gd(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_n: &NodalScalarField,
    p_n: &NodalScalarField,
) -> Result<BoundaryKernel> {
    kernel_gd_with(mesh, coeff, u_n, p_n, FluxRecovery::default())
}

pub fn kernel_gd_with(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_n: &NodalScalarField,
    p_n: &NodalScalarField,
    recovery: FluxRecovery,
) -> Result<BoundaryKernel> {
    let (q, d) = fluxes(mesh, coeff, u_n, p_n, None, recovery)?;
    BoundaryKernel::new(mesh, q.iter().zip(&d).map(|(q, d)| q * d).collect())
}

/// Kernel of the Neumann-tracking cost: `−(σ∂ₙu_D)(∂ₙp_D)`.
pub fn kernel_gn(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_d: &NodalScalarField,
    p_d: &NodalScalarField,
) -> Result<BoundaryKernel> {
    kernel_gn_with(mesh, coeff, u_d, p_d, FluxRecovery::default())
}

pub fn kernel_gn_with(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_d: &NodalScalarField,
    p_d: &NodalScalarField,
    recovery: FluxRecovery,
) -> Result<BoundaryKernel> {
    let (q, d) = fluxes(mesh, coeff, u_d, p_d, None, recovery)?;
    BoundaryKernel::new(mesh, q.iter().zip(&d).map(|(q, d)| -q * d).collect())
}

/// Kernel of the augmented Lagrangian:
/// `−(σ∂ₙw)(∂ₙu_N) + (β/2)v² − λv`, with `v` and `λ` restricted to Γ nodes.
pub fn kernel_h_admm(
    mesh: &AnnularMesh,
    coeff: &CoefficientSet,
    u_n: &NodalScalarField,
    w: &NodalScalarField,
    v: &NodalScalarField,
    lambda: &NodalScalarField,
    beta: f64,
) -> Result<BoundaryKernel> {
    v.check_mesh(mesh)?;
    lambda.check_mesh(mesh)?;
    // The adjoint carries the volume source −M(β(u − v) + λ).
    let density: Vec<f64> =
        u_n.values().iter().zip(v.values()).zip(lambda.values()).map(|((u, v), l)| beta * (u - v) + l).collect();
    let source: Vec<f64> = assemble_mass(mesh).matvec(&density).iter().map(|m| -m).collect();
    let (q_u, d_w) = fluxes(mesh, coeff, u_n, w, Some(&source), FluxRecovery::Variational)?;
    let gamma = mesh.boundary_loop(BoundaryLabel::Gamma);
    let values = gamma
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let (vi, li) = (v.values()[i], lambda.values()[i]);
            -q_u[k] * d_w[k] + 0.5 * beta * vi * vi - li * vi
        })
        .collect();
    BoundaryKernel::new(mesh, values)
}
