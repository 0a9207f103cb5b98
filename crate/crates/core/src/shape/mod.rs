//! Shape-gradient kernels on Γ, their H¹ extension to descent fields, and
//! gradient verification.

mod extension;
pub mod identities;
mod kernel;
mod objective;
mod verify;

pub use extension::{directional_derivative, h1_norm_sq, sobolev_extend, step_size, DescentField, StepRule};
pub use identities::{verify_identities, IdentityCheck, IdentityReport, QuadratureConfig};
pub use kernel::{kernel_gd, kernel_gd_with, kernel_gn, kernel_gn_with, kernel_h_admm, BoundaryKernel, FluxRecovery};
pub use objective::{evaluate, evaluate_cost, AugmentedTerms, Evaluation, Objective};
pub use verify::{verify_gradient_fd, FdObjective, GradientCheck, GradientProblem, FD_FLOOR};
