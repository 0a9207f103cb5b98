use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::registry;
use crate::fem::CoefficientSet;
use crate::geometry::{BoundaryCurve, BoundaryLabel, ParametricShape};
use crate::pde::NoiseMode;
use crate::reconstruction::{Method, SolverConfig};
use crate::{Error, Result};

/// Exact inclusion used to synthesize data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactShape {
    Case1,
    Case2,
    Circle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub exact: ExactShape,
    /// Centre and radius of a circular exact inclusion.
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default)]
    pub radius: Option<f64>,
    /// Initial guess: a circle.
    #[serde(default)]
    pub initial_center: [f64; 2],
    #[serde(default = "defaults::initial_radius")]
    pub initial_radius: f64,
    #[serde(default = "defaults::outer_points")]
    pub outer_points: usize,
    #[serde(default = "defaults::inner_points")]
    pub inner_points: usize,
    /// Samples of the exact boundary; 900 for Case 2, 700 otherwise.
    #[serde(default)]
    pub exact_points: Option<usize>,
    /// Σ samples of the fine forward mesh.
    #[serde(default = "defaults::forward_outer_points")]
    pub forward_outer_points: usize,
}

/// A diffusion coefficient given by registry id or as a constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Constant(f64),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    #[serde(default = "defaults::sigma")]
    pub sigma: SigmaSpec,
    #[serde(default = "defaults::advection")]
    pub advection: String,
    #[serde(default = "defaults::poincare")]
    pub poincare: f64,
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        CoefficientSpec { sigma: defaults::sigma(), advection: defaults::advection(), poincare: defaults::poincare() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default = "defaults::flux")]
    pub flux: String,
    /// One run per noise level.
    #[serde(default = "defaults::noise")]
    pub noise: Vec<f64>,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    /// Mesh size of the forward solve; a third of the inversion `h` when absent.
    #[serde(default)]
    pub h_fine: Option<f64>,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec { flux: defaults::flux(), noise: defaults::noise(), noise_mode: NoiseMode::default(), h_fine: None }
    }
}

/// A complete run description, read from TOML.
///
/// ```toml
/// seed = 7
/// methods = ["SO_JD", "ADMM"]
///
/// [geometry]
/// exact = "case2"
/// initial_radius = 0.7
///
/// [data]
/// noise = [0.0, 0.1, 0.3]
///
/// [solver]
/// beta = 0.0001
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub seed: u64,
    /// Methods swept; `solver.method` alone when empty.
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub solver: SolverConfig,
}

mod defaults {
    use super::SigmaSpec;

    pub fn initial_radius() -> f64 {
        0.5
    }
    pub fn outer_points() -> usize {
        120
    }
    pub fn inner_points() -> usize {
        100
    }
    pub fn forward_outer_points() -> usize {
        500
    }
    pub fn sigma() -> SigmaSpec {
        SigmaSpec::Named("sigma_const_1.1".into())
    }
    pub fn advection() -> String {
        "b_swirl".into()
    }
    pub fn poincare() -> f64 {
        crate::fem::DEFAULT_POINCARE
    }
    pub fn flux() -> String {
        "g_exp_x1".into()
    }
    pub fn noise() -> Vec<f64> {
        vec![0.0]
    }
}

/// Parses and validates a TOML run description.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| {
        let context = match e.span() {
            Some(span) => {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                format!("line {line}")
            }
            None => "spec".to_string(),
        };
        Error::parse(context, e.message())
    })?;
    spec.validate()?;
    Ok(spec)
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.coefficients()?;
        registry::flux(&self.data.flux)?;
        let g = &self.geometry;
        if g.exact == ExactShape::Circle && g.radius.is_none() {
            return Err(Error::range("geometry.radius", "a circular exact shape needs a radius"));
        }
        self.exact_shape()?;
        if !(g.initial_radius > 0.0 && g.initial_radius.is_finite()) {
            return Err(Error::range("geometry.initial_radius", "must be positive"));
        }
        for (key, n) in [("geometry.outer_points", g.outer_points), ("geometry.inner_points", g.inner_points)] {
            if n < 3 {
                return Err(Error::range(key, "at least 3 points"));
            }
        }
        if self.data.noise.is_empty() {
            return Err(Error::range("data.noise", "at least one noise level"));
        }
        if let Some(d) = self.data.noise.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
            return Err(Error::range("data.noise", format!("noise level {d} must be non-negative")));
        }
        if let Some(h_fine) = self.data.h_fine {
            if !(h_fine > 0.0 && h_fine <= self.solver.h / 3.0) {
                return Err(Error::range("data.h_fine", "must be positive and at most a third of solver.h"));
            }
        }
        for method in self.methods() {
            SolverConfig { method, ..self.solver.clone() }.validate()?;
        }
        Ok(())
    }

    /// Methods in sweep order.
    pub fn methods(&self) -> Vec<Method> {
        if self.methods.is_empty() {
            vec![self.solver.method]
        } else {
            self.methods.clone()
        }
    }

    pub fn coefficients(&self) -> Result<CoefficientSet> {
        let (sigma, floor) = match &self.coefficients.sigma {
            SigmaSpec::Named(id) => registry::sigma(id)?,
            SigmaSpec::Constant(c) if *c > 0.0 && c.is_finite() => {
                let c = *c;
                (std::sync::Arc::new(move |_| c) as crate::fem::ScalarFn, c)
            }
            SigmaSpec::Constant(c) => return Err(Error::range("coefficients.sigma", format!("{c} must be positive"))),
        };
        if !(self.coefficients.poincare > 0.0) {
            return Err(Error::range("coefficients.poincare", "must be positive"));
        }
        let advection = registry::advection(&self.coefficients.advection)?;
        Ok(CoefficientSet::new(sigma, advection, floor).with_poincare(self.coefficients.poincare))
    }

    pub fn exact_shape(&self) -> Result<ParametricShape> {
        let g = &self.geometry;
        Ok(match g.exact {
            ExactShape::Case1 => ParametricShape::Case1Curve,
            ExactShape::Case2 => ParametricShape::Case2LShape,
            ExactShape::Circle => {
                let r = g.radius.unwrap_or(0.0);
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::range("geometry.radius", "must be positive"));
                }
                ParametricShape::circle(g.center[0], g.center[1], r)
            }
        })
    }

    pub fn exact_points(&self) -> usize {
        self.geometry.exact_points.unwrap_or(match self.geometry.exact {
            ExactShape::Case2 => 900,
            _ => 700,
        })
    }

    /// Exact boundary sampled with `exact_points` points.
    pub fn exact_curve(&self) -> Result<BoundaryCurve> {
        self.exact_shape()?.sample(self.exact_points(), BoundaryLabel::Gamma)
    }

    pub fn initial_curve(&self) -> Result<BoundaryCurve> {
        let g = &self.geometry;
        ParametricShape::circle(g.initial_center[0], g.initial_center[1], g.initial_radius)
            .sample(g.inner_points, BoundaryLabel::Gamma)
    }

    /// Unit circle carrying Σ with `points` samples.
    pub fn outer_curve(&self, points: usize) -> Result<BoundaryCurve> {
        ParametricShape::circle(0.0, 0.0, 1.0).sample(points, BoundaryLabel::Sigma)
    }

    pub fn h_fine(&self) -> f64 {
        self.data.h_fine.unwrap_or(self.solver.h / 3.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_spec_takes_defaults() {
        let spec = parse_spec("[geometry]\nexact = \"case1\"\n[solver]\nmethod = \"SO_JD\"\n").unwrap();
        assert_eq!(spec.solver.h, 0.03);
        assert_eq!(spec.solver.mu, 0.5);
        assert_eq!(spec.solver.max_iter, 200);
        assert_eq!(spec.methods(), vec![Method::SoJd]);
        assert_eq!(spec.data.noise, vec![0.0]);
        assert_eq!(spec.exact_points(), 700);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_spec("[geometry]\nexact = \"case1\"\n[solver]\nmhu = 0.5\n").unwrap_err();
        match err {
            Error::Parse { context, message } => {
                assert!(message.contains("mhu"), "{message}");
                assert_eq!(context, "line 4");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn admm_needs_beta() {
        let err = parse_spec("[geometry]\nexact = \"case2\"\n[solver]\nmethod = \"ADMM\"\n").unwrap_err();
        assert!(matches!(err, Error::InvalidRange { ref key, .. } if key == "beta"), "{err:?}");
    }

    #[test]
    fn unknown_expression_is_reported() {
        let err = parse_spec("[geometry]\nexact = \"case1\"\n[data]\nflux = \"g_cubic\"\n").unwrap_err();
        assert!(matches!(err, Error::UnknownExpression(ref id) if id == "g_cubic"));
    }

    #[test]
    fn negative_noise_is_rejected() {
        let err = parse_spec("[geometry]\nexact = \"case1\"\n[data]\nnoise = [0.0, -0.1]\n").unwrap_err();
        assert!(matches!(err, Error::InvalidRange { .. }));
    }

    #[test]
    fn bounds_rule_accepts_legacy_id() {
        let spec = parse_spec("[geometry]\nexact = \"case1\"\n[solver]\nbounds = \"paper_maxprinciple\"\n").unwrap();
        assert_eq!(spec.solver.bounds, crate::reconstruction::BoundsRule::MaxPrinciple);
        assert!(toml::to_string(&spec).unwrap().contains("bounds = \"max_principle\""));
    }

    #[test]
    fn constant_sigma_is_accepted() {
        let spec = parse_spec(
            "[geometry]\nexact = \"circle\"\nradius = 0.3\ncenter = [0.2, 0.0]\n[coefficients]\nsigma = 2.0\n",
        )
        .unwrap();
        assert_eq!(spec.coefficients().unwrap().sigma(crate::Vec2::ZERO), 2.0);
    }
}
