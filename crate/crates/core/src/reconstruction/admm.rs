use super::BoundsRule;
use crate::fem::NodalScalarField;
use crate::pde::CauchyData;
use crate::{Error, Result};

/// Auxiliary field, multiplier, penalty and box of the ADMM iteration.
#[derive(Clone, Debug)]
pub struct AdmmState {
    pub v: NodalScalarField,
    pub lambda: NodalScalarField,
    pub beta: f64,
    pub bounds: (f64, f64),
}

/// `v = max(lo, min(hi, u + λ/β))` nodewise.
pub fn admm_v_update(u: &[f64], lambda: &[f64], beta: f64, bounds: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = bounds;
    u.iter().zip(lambda).map(|(u, l)| (u + l / beta).min(hi).max(lo)).collect()
}

/// `λ + β(u − v)` nodewise.
pub fn admm_lambda_update(lambda: &[f64], beta: f64, u: &[f64], v: &[f64]) -> Vec<f64> {
    lambda.iter().zip(u).zip(v).map(|((l, u), v)| l + beta * (u - v)).collect()
}

/// `(0, max f)`.
pub fn default_bounds(data: &CauchyData) -> (f64, f64) {
    (0.0, data.max_f())
}

impl BoundsRule {
    /// Box for this rule; `reference` is the state used by the scaled rule.
    pub fn bounds(&self, data: &CauchyData, reference: &[f64]) -> Result<(f64, f64)> {
        match self {
            BoundsRule::MaxPrinciple => Ok(default_bounds(data)),
            BoundsRule::ScaledRange => {
                if reference.is_empty() {
                    return Err(Error::range("bounds", "scaled_range needs a reference state"));
                }
                let lo = reference.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = reference.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok((0.5 * lo, 1.5 * hi))
            }
        }
    }
}

impl AdmmState {
    /// Largest amount by which `v` leaves its box; zero after every update.
    pub fn box_violation(&self) -> f64 {
        let (lo, hi) = self.bounds;
        self.v.values().iter().fold(0.0f64, |m, &v| m.max(lo - v).max(v - hi))
    }
}
