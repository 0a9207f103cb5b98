#![allow(dead_code)]

use shape_recover::experiment::registry;
use shape_recover::fem::CoefficientSet;
use shape_recover::{AnnularMesh, BoundaryLabel, ParametricShape};

/// Concentric annulus with the unit circle outside.
pub fn annulus(inner_radius: f64, h: f64) -> AnnularMesh {
    offset_annulus(0.0, 0.0, inner_radius, h)
}

pub fn offset_annulus(cx: f64, cy: f64, inner_radius: f64, h: f64) -> AnnularMesh {
    let n_outer = ((2.0 * std::f64::consts::PI / h).ceil() as usize).max(120);
    let n_inner = ((2.0 * std::f64::consts::PI * inner_radius / h).ceil() as usize).max(100);
    let outer = ParametricShape::circle(0.0, 0.0, 1.0).sample(n_outer, BoundaryLabel::Sigma).unwrap();
    let inner = ParametricShape::circle(cx, cy, inner_radius).sample(n_inner, BoundaryLabel::Gamma).unwrap();
    shape_recover::mesh::triangulate_annulus(&outer, &inner, h).unwrap()
}

/// σ = 1.1 with the swirling advection field.
pub fn swirl_coefficients() -> CoefficientSet {
    let (sigma, floor) = registry::sigma("sigma_const_1.1").unwrap();
    CoefficientSet::new(sigma, registry::advection("b_swirl").unwrap(), floor)
}

pub fn laplace() -> CoefficientSet {
    CoefficientSet::constant(1.0, shape_recover::Vec2::ZERO)
}

/// Values of `f` at the Σ loop nodes.
pub fn on_sigma(mesh: &AnnularMesh, f: impl Fn(shape_recover::Vec2) -> f64) -> Vec<f64> {
    mesh.boundary_points(BoundaryLabel::Sigma).into_iter().map(f).collect()
}

/// Discrete L² norm of a nodal vector via the mass matrix.
pub fn l2_norm(mesh: &AnnularMesh, values: &[f64]) -> f64 {
    shape_recover::fem::assemble_mass(mesh).quadratic_form(values).sqrt()
}
