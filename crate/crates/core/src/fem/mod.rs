//! P1 finite elements on [`AnnularMesh`](crate::mesh::AnnularMesh): nodal
//! fields, coefficient sets, assembly of the advection-diffusion and vector
//! H¹ forms, sparse direct solves and boundary flux recovery.

mod assembly;
mod coeff;
mod field;
mod flux;
mod sparse;

pub(crate) use assembly::GAUSS2;
pub use assembly::{
    assemble_a, assemble_a_adjoint, assemble_boundary_load, assemble_boundary_load_nodal, assemble_h1_scalar,
    assemble_h1_vector, assemble_mass, assemble_volume_load, boundary_integral, boundary_integral_nodal, element_a,
    p1_gradients,
};
pub use coeff::{CoefficientSet, ScalarFn, VectorFn, DEFAULT_POINCARE};
pub use field::{NodalScalarField, NodalVectorField};
pub use flux::{recover_boundary_flux, recover_normal_derivative, variational_boundary_flux};
pub use sparse::{CsrMatrix, FactoredSystem, LinearSystem, RESIDUAL_TOLERANCE};
