//! Boundary-value problems on the annulus: the Neumann and Dirichlet states,
//! their adjoints, the ADMM adjoint, cost functionals and Cauchy data.

mod cost;
mod data;
mod state;

pub use cost::{cost_admm_y, cost_jd, cost_jn, CostKind, CostReport};
pub use data::{apply_noise, synthesize_data, transfer_trace, CauchyData, DataSource, NoiseMode, Synthesis};
pub use state::{
    dirichlet_state_flux, solve_adjoint_pd, solve_adjoint_pn, solve_admm_adjoint_w, solve_state_dirichlet,
    solve_state_neumann, solve_state_neumann_with_source,
};
