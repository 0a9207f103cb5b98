//! Named analytic coefficient and data functions.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::fem::{ScalarFn, VectorFn};
use crate::geometry::Vec2;
use crate::{Error, Result};

pub const SIGMA_IDS: &[&str] = &["sigma_const_1.1", "sigma_sin_cos"];
pub const ADVECTION_IDS: &[&str] = &["b_swirl", "b_zero"];
pub const FLUX_IDS: &[&str] = &["g_exp_x1", "g_exp_sin"];

/// Polar angle with the origin mapped to 0.
fn angle(x: Vec2) -> f64 {
    if x.x == 0.0 && x.y == 0.0 {
        0.0
    } else {
        x.y.atan2(x.x)
    }
}

/// Diffusion coefficient and its lower bound on the unit disk.
pub fn sigma(id: &str) -> Result<(ScalarFn, f64)> {
    match id {
        "sigma_const_1.1" => Ok((Arc::new(|_| 1.1), 1.1)),
        "sigma_sin_cos" => Ok((Arc::new(|x: Vec2| 2.0 + 0.5 * (0.5 * PI * x.x).sin() * (0.5 * PI * x.y).cos()), 1.5)),
        other => Err(Error::UnknownExpression(other.to_string())),
    }
}

pub fn advection(id: &str) -> Result<VectorFn> {
    match id {
        "b_swirl" => Ok(Arc::new(|x: Vec2| {
            let t = angle(x);
            Vec2::new(1.0 + 0.5 * t.sin(), 1.0 + 0.5 * t.cos())
        })),
        "b_zero" => Ok(Arc::new(|_| Vec2::ZERO)),
        other => Err(Error::UnknownExpression(other.to_string())),
    }
}

/// Neumann datum on the outer boundary.
pub fn flux(id: &str) -> Result<ScalarFn> {
    match id {
        "g_exp_x1" => Ok(Arc::new(|x: Vec2| x.x.exp())),
        "g_exp_sin" => Ok(Arc::new(|x: Vec2| angle(x).sin().exp())),
        other => Err(Error::UnknownExpression(other.to_string())),
    }
}
