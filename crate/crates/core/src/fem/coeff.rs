use std::fmt;
use std::sync::Arc;

use crate::geometry::Vec2;
use crate::mesh::AnnularMesh;
use crate::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;

/// Default constant in the coercivity test `σ₀ − C_P |b|_∞ > 0`.
pub const DEFAULT_POINCARE: f64 = 0.5;

/// Diffusion `σ(x)` and advection `b(x)` with the ellipticity floor `σ₀`.
#[derive(Clone)]
pub struct CoefficientSet {
    sigma: ScalarFn,
    advection: VectorFn,
    sigma_floor: f64,
    poincare: f64,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("sigma_floor", &self.sigma_floor)
            .field("poincare", &self.poincare)
            .finish_non_exhaustive()
    }
}

impl CoefficientSet {
    pub fn new(sigma: ScalarFn, advection: VectorFn, sigma_floor: f64) -> Self {
        CoefficientSet { sigma, advection, sigma_floor, poincare: DEFAULT_POINCARE }
    }

    /// Constant σ and b, with `σ₀ = σ`.
    pub fn constant(sigma: f64, advection: Vec2) -> Self {
        Self::new(Arc::new(move |_| sigma), Arc::new(move |_| advection), sigma)
    }

    pub fn with_poincare(mut self, poincare: f64) -> Self {
        self.poincare = poincare;
        self
    }

    pub fn with_sigma_floor(mut self, floor: f64) -> Self {
        self.sigma_floor = floor;
        self
    }

    pub fn sigma(&self, x: Vec2) -> f64 {
        (self.sigma)(x)
    }

    pub fn advection(&self, x: Vec2) -> Vec2 {
        (self.advection)(x)
    }

    pub fn sigma_fn(&self) -> &ScalarFn {
        &self.sigma
    }

    pub fn advection_fn(&self) -> &VectorFn {
        &self.advection
    }

    pub fn sigma_floor(&self) -> f64 {
        self.sigma_floor
    }

    pub fn poincare(&self) -> f64 {
        self.poincare
    }

    /// `σ₀ − C_P |b|_∞` with `|b|_∞` the largest component magnitude over
    /// the triangle quadrature points of `mesh`.
    ///
    /// Fails if σ or b is non-finite at a quadrature point or σ drops below
    /// `σ₀` there. Logs a warning when the mesh Péclet number exceeds one.
    pub fn coercivity_margin(&self, mesh: &AnnularMesh) -> Result<f64> {
        let mut b_inf = 0.0f64;
        let mut sigma_min = f64::INFINITY;
        for t in 0..mesh.triangles().len() {
            let v = mesh.vertices_of(t);
            for k in 0..3 {
                let x = (v[k] + v[(k + 1) % 3]) * 0.5;
                let s = self.sigma(x);
                let b = self.advection(x);
                if !s.is_finite() || !b.is_finite() {
                    return Err(Error::NonFiniteCoefficient { x: x.x, y: x.y });
                }
                sigma_min = sigma_min.min(s);
                b_inf = b_inf.max(b.x.abs()).max(b.y.abs());
            }
        }
        if sigma_min < self.sigma_floor {
            return Err(Error::CoercivityViolated { margin: sigma_min - self.sigma_floor });
        }
        let peclet = mesh.max_edge_length() * b_inf / (2.0 * sigma_min);
        if peclet > 1.0 {
            log::warn!("mesh Péclet number {peclet:.3} exceeds 1");
        }
        Ok(self.sigma_floor - self.poincare * b_inf)
    }

    /// Like [`coercivity_margin`](Self::coercivity_margin) but fails unless the
    /// margin is positive.
    pub fn require_coercive(&self, mesh: &AnnularMesh) -> Result<f64> {
        let margin = self.coercivity_margin(mesh)?;
        if margin > 0.0 {
            Ok(margin)
        } else {
            Err(Error::CoercivityViolated { margin })
        }
    }
}
