//! Inclusion detection for the 2D advection-diffusion equation.
//!
//! Given a Cauchy pair (Dirichlet trace `f`, Neumann flux `g`) measured on the
//! outer boundary of a domain, this crate reconstructs an unknown interior
//! inclusion by adjoint-based shape-gradient descent on a moving P1 mesh, or
//! by an ADMM variant that adds a box constraint on the state.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: points, boundary curves, parametric shapes, Hausdorff distance.
//! - [`mesh`]: annular triangulations, deformation, remeshing, CSV/VTK I/O.
//! - [`fem`]: P1 assembly, sparse solves, boundary flux recovery.
//! - [`pde`]: state/adjoint solvers, cost functionals, synthetic data.
//! - [`shape`]: shape-gradient kernels, Sobolev extension, verification probes.
//! - [`reconstruction`]: the descent and ADMM outer loops.
//! - [`experiment`]: run specifications, expression registry, artifact output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod fem;
pub mod geometry;
pub mod mesh;
pub mod pde;
pub mod reconstruction;
pub mod shape;

pub use error::{Error, Result};
pub use geometry::{BoundaryCurve, BoundaryLabel, ParametricShape, Vec2};
pub use mesh::AnnularMesh;
