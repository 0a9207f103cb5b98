use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BoundaryKernel;
use crate::fem::{assemble_h1_scalar, FactoredSystem, NodalVectorField, GAUSS2};
use crate::geometry::{BoundaryLabel, Vec2};
use crate::mesh::AnnularMesh;
use crate::{Error, Result};

/// Deformation field vanishing on Σ, with its H¹ norm. `h1_norm_sq` is the
/// assembled quadratic form itself, `h1_norm` its square root.
#[derive(Clone, Debug)]
pub struct DescentField {
    pub theta: NodalVectorField,
    pub h1_norm: f64,
    pub h1_norm_sq: f64,
}

impl DescentField {
    pub fn zeros(mesh: &AnnularMesh) -> Self {
        DescentField { theta: NodalVectorField::zeros(mesh), h1_norm: 0.0, h1_norm_sq: 0.0 }
    }

    /// Field with a given squared norm and no geometric content, for step
    /// arithmetic.
    pub fn with_norm_sq(mesh: &AnnularMesh, h1_norm_sq: f64) -> Self {
        DescentField { theta: NodalVectorField::zeros(mesh), h1_norm: h1_norm_sq.sqrt(), h1_norm_sq }
    }

    /// Wraps an arbitrary field; its Σ values must already be zero.
    pub fn from_field(mesh: &AnnularMesh, theta: NodalVectorField) -> Result<Self> {
        theta.check_mesh(mesh)?;
        let values = theta.values();
        if mesh.boundary_loop(BoundaryLabel::Sigma).iter().any(|&i| values[i] != Vec2::ZERO) {
            return Err(Error::InvalidField("descent field must vanish on Σ".into()));
        }
        let h1_norm_sq = h1_norm_sq(mesh, values);
        Ok(DescentField { theta, h1_norm: h1_norm_sq.sqrt(), h1_norm_sq })
    }

    pub fn scaled(&self, c: f64) -> Self {
        DescentField {
            theta: self.theta.scaled(c),
            h1_norm: c.abs() * self.h1_norm,
            h1_norm_sq: c * c * self.h1_norm_sq,
        }
    }

    /// Largest nodal magnitude of θ.
    pub fn max_norm(&self) -> f64 {
        self.theta.values().iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

fn split(values: &[Vec2]) -> (Vec<f64>, Vec<f64>) {
    (values.iter().map(|v| v.x).collect(), values.iter().map(|v| v.y).collect())
}

/// `‖θ‖²_{H¹}` from the assembled form.
pub fn h1_norm_sq(mesh: &AnnularMesh, values: &[Vec2]) -> f64 {
    let k = assemble_h1_scalar(mesh);
    let (x, y) = split(values);
    (k.quadratic_form(&x) + k.quadratic_form(&y)).max(0.0)
}

/// Solves `∫∇θ:∇φ + θ·φ = −∫_Γ G n·φ` for θ with `θ = 0` on Σ.
///
/// The right-hand side uses two-point Gauss quadrature per Γ edge with the
/// edge normal and `G` interpolated linearly.
pub fn sobolev_extend(mesh: &AnnularMesh, kernel: &BoundaryKernel) -> Result<DescentField> {
    kernel.check_mesh(mesh)?;
    let n = mesh.num_nodes();
    let nodes = mesh.nodes();
    let g = kernel.values();
    let mut rhs = vec![Vec2::ZERO; n];
    for (k, a, b) in mesh.loop_edges(BoundaryLabel::Gamma) {
        let d = nodes[b] - nodes[a];
        let normal = Vec2::new(d.y, -d.x).normalized();
        let len = d.norm();
        let (ga, gb) = (g[k], g[(k + 1) % g.len()]);
        for s in GAUSS2 {
            let gx = ga * (1.0 - s) + gb * s;
            rhs[a] -= normal * (0.5 * len * gx * (1.0 - s));
            rhs[b] -= normal * (0.5 * len * gx * s);
        }
    }
    let matrix = assemble_h1_scalar(mesh);
    let sigma = mesh.boundary_loop(BoundaryLabel::Sigma);
    let system = FactoredSystem::new(&matrix, sigma)?;
    let fixed: Vec<(usize, f64)> = sigma.iter().map(|&i| (i, 0.0)).collect();
    let (rx, ry) = split(&rhs);
    let tx = system.solve(&rx, &fixed)?;
    let ty = system.solve(&ry, &fixed)?;
    let norm_sq = (matrix.quadratic_form(&tx) + matrix.quadratic_form(&ty)).max(0.0);
    let theta: Vec<Vec2> = tx.into_iter().zip(ty).map(|(x, y)| Vec2::new(x, y)).collect();
    Ok(DescentField { theta: NodalVectorField::new(mesh, theta)?, h1_norm: norm_sq.sqrt(), h1_norm_sq: norm_sq })
}

/// `∫_Γ G n·θ` by two-point Gauss quadrature with edge normals.
pub fn directional_derivative(mesh: &AnnularMesh, kernel: &BoundaryKernel, theta: &NodalVectorField) -> Result<f64> {
    kernel.check_mesh(mesh)?;
    theta.check_mesh(mesh)?;
    let nodes = mesh.nodes();
    let g = kernel.values();
    let th = theta.values();
    Ok(mesh
        .loop_edges(BoundaryLabel::Gamma)
        .map(|(k, a, b)| {
            let d = nodes[b] - nodes[a];
            let normal = Vec2::new(d.y, -d.x).normalized();
            let (ga, gb) = (g[k], g[(k + 1) % g.len()]);
            let (na, nb) = (normal.dot(th[a]), normal.dot(th[b]));
            GAUSS2.iter().map(|&s| 0.5 * d.norm() * (ga * (1.0 - s) + gb * s) * (na * (1.0 - s) + nb * s)).sum::<f64>()
        })
        .sum())
}

/// Step-length rule: `μJ/‖θ‖²` or `μJ/‖θ‖`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    #[default]
    Squared,
    Plain,
}

impl fmt::Display for StepRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepRule::Squared => "squared",
            StepRule::Plain => "plain",
        })
    }
}

impl FromStr for StepRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(StepRule::Squared),
            "plain" => Ok(StepRule::Plain),
            other => Err(Error::parse("step_rule", format!("unknown rule `{other}`"))),
        }
    }
}

/// Step length for the descent update. Zero cost gives zero step.
pub fn step_size(mu: f64, cost: f64, field: &DescentField, rule: StepRule) -> Result<f64> {
    let norm = field.h1_norm;
    if !(norm > f64::EPSILON * cost.abs().max(1.0)) {
        return Err(Error::ZeroDescentField);
    }
    Ok(match rule {
        StepRule::Squared => mu * cost / field.h1_norm_sq,
        StepRule::Plain => mu * cost / norm,
    })
}
