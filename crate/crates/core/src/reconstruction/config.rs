use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::shape::StepRule;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "SO_JD")]
    SoJd,
    #[serde(rename = "SO_JN")]
    SoJn,
    #[serde(rename = "ADMM")]
    Admm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::SoJd => "SO_JD",
            Method::SoJn => "SO_JN",
            Method::Admm => "ADMM",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SO_JD" => Ok(Method::SoJd),
            "SO_JN" => Ok(Method::SoJn),
            "ADMM" => Ok(Method::Admm),
            other => Err(Error::parse("method", format!("unknown method `{other}`"))),
        }
    }
}

/// Box for the auxiliary ADMM field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsRule {
    /// `(0, max f)`.
    #[default]
    #[serde(rename = "max_principle", alias = "paper_maxprinciple")]
    MaxPrinciple,
    /// `(0.5 min u, 1.5 max u)` over a reference state.
    ScaledRange,
}

/// Outer-loop settings shared by the descent and ADMM drivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: Method,
    /// Number of outer iterations N.
    pub max_iter: usize,
    pub mu: f64,
    /// Perimeter weight η.
    pub eta: f64,
    /// ADMM penalty; required for [`Method::Admm`].
    pub beta: Option<f64>,
    pub lambda0: f64,
    /// Constant initial auxiliary field; `None` starts from the initial state.
    pub v0: Option<f64>,
    /// Stop once `‖θ‖_{H¹} < ε` or `J < ε²`.
    pub tolerance: f64,
    pub bounds: BoundsRule,
    /// Remesh after every this many iterations; 0 disables the cadence.
    pub remesh_every: usize,
    /// Remesh whenever the worst triangle quality drops below this.
    pub remesh_quality: f64,
    /// Target edge length for remeshing.
    pub h: f64,
    /// Noise level of the data, recorded with the run.
    pub noise: f64,
    pub step_rule: StepRule,
    /// Descent steps per ADMM outer iteration.
    pub max_inner: usize,
    pub max_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::SoJd,
            max_iter: 200,
            mu: 0.5,
            eta: 0.003,
            beta: None,
            lambda0: 0.0,
            v0: None,
            tolerance: 1e-6,
            bounds: BoundsRule::default(),
            remesh_every: 50,
            remesh_quality: 0.15,
            h: 0.03,
            noise: 0.0,
            step_rule: StepRule::Squared,
            max_inner: 1,
            max_halvings: 8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::range(key, format!("{v} must be positive")))
            }
        };
        if self.max_iter == 0 {
            return Err(Error::range("max_iter", "N must be at least 1"));
        }
        positive("mu", self.mu)?;
        positive("h", self.h)?;
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::range("eta", format!("{} must be non-negative", self.eta)));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::range("tolerance", "must be non-negative"));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::range("noise", "must be non-negative"));
        }
        if !self.lambda0.is_finite() || self.v0.is_some_and(|v| !v.is_finite()) {
            return Err(Error::range("lambda0", "initial ADMM values must be finite"));
        }
        if self.method == Method::Admm {
            match self.beta {
                Some(b) => positive("beta", b)?,
                None => return Err(Error::range("beta", "ADMM requires a penalty beta > 0")),
            }
            if self.max_inner == 0 {
                return Err(Error::range("max_inner", "must be at least 1"));
            }
        }
        Ok(())
    }
}
