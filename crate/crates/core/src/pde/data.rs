use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::state::solve_state_neumann;
use crate::fem::{CoefficientSet, ScalarFn};
use crate::geometry::{BoundaryCurve, BoundaryLabel, ParametricShape, Vec2};
use crate::mesh::{triangulate_annulus, AnnularMesh};
use crate::{Error, Result};

/// Which datum the multiplicative noise scales.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    #[default]
    ScaleF,
    ScaleG,
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseMode::ScaleF => "scale_f",
            NoiseMode::ScaleG => "scale_g",
        })
    }
}

impl FromStr for NoiseMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scale_f" => Ok(NoiseMode::ScaleF),
            "scale_g" => Ok(NoiseMode::ScaleG),
            other => Err(Error::parse("noise_mode", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DataSource {
    /// Forward solve on an independent fine mesh.
    Synthetic { forward_nodes: usize, h_fine: f64 },
    /// Read from files.
    Loaded,
}

/// Measured Dirichlet trace `f` and imposed flux `g` at the Σ nodes of an
/// inversion mesh, in loop order.
///
/// `arc_param` is the normalized arc length of each node along Σ, starting
/// at loop node 0 and following the loop (counterclockwise).
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData {
    pub arc_param: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub noise_level: f64,
    pub noise_mode: NoiseMode,
    pub source: DataSource,
}

impl CauchyData {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Fails unless the data is sized to the Σ loop of `mesh`.
    pub fn check_mesh(&self, mesh: &AnnularMesh) -> Result<()> {
        let n = mesh.boundary_loop(BoundaryLabel::Sigma).len();
        if self.f.len() != n || self.g.len() != n {
            return Err(Error::FieldMismatch(format!("data has {} values, Σ has {n} nodes", self.f.len())));
        }
        Ok(())
    }

    pub fn max_f(&self) -> f64 {
        self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `arc_param,f,g`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("arc_param,f,g\n");
        for ((s, f), g) in self.arc_param.iter().zip(&self.f).zip(&self.g) {
            let _ = writeln!(out, "{s},{f},{g}");
        }
        out
    }

    /// `key=value` metadata describing noise and origin.
    pub fn sidecar(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "noise_level={}", self.noise_level);
        let _ = writeln!(out, "noise_mode={}", self.noise_mode);
        match self.source {
            DataSource::Synthetic { forward_nodes, h_fine } => {
                let _ = writeln!(out, "source=synthetic");
                let _ = writeln!(out, "forward_nodes={forward_nodes}");
                let _ = writeln!(out, "h_fine={h_fine}");
            }
            DataSource::Loaded => {
                let _ = writeln!(out, "source=loaded");
            }
        }
        out
    }

    /// Inverse of [`to_csv`](Self::to_csv) and [`sidecar`](Self::sidecar).
    pub fn from_csv(csv: &str, sidecar: &str) -> Result<Self> {
        let (arc_param, f, g) = parse_values(csv)?;
        let mut noise_level = 0.0;
        let mut noise_mode = NoiseMode::ScaleF;
        let mut source = None;
        let mut forward_nodes = None;
        let mut h_fine = None;
        for (ln, line) in sidecar.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = || format!("sidecar line {}", ln + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| Error::parse(ctx(), "expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::parse(ctx(), format!("bad number for `{key}`")))
            };
            match key {
                "noise_level" => noise_level = num(value)?,
                "noise_mode" => noise_mode = value.parse()?,
                "source" => source = Some(value.to_string()),
                "forward_nodes" => {
                    forward_nodes = Some(value.parse::<usize>().map_err(|_| Error::parse(ctx(), "bad forward_nodes"))?)
                }
                "h_fine" => h_fine = Some(num(value)?),
                other => return Err(Error::parse(ctx(), format!("unknown key `{other}`"))),
            }
        }
        if noise_level < 0.0 {
            return Err(Error::parse("sidecar", "noise_level must be non-negative"));
        }
        let source = match source.as_deref() {
            Some("synthetic") => DataSource::Synthetic {
                forward_nodes: forward_nodes.ok_or_else(|| Error::parse("sidecar", "missing forward_nodes"))?,
                h_fine: h_fine.ok_or_else(|| Error::parse("sidecar", "missing h_fine"))?,
            },
            Some("loaded") | None => DataSource::Loaded,
            Some(other) => return Err(Error::parse("sidecar", format!("unknown source `{other}`"))),
        };
        Ok(CauchyData { arc_param, f, g, noise_level, noise_mode, source })
    }
}

type Columns = (Vec<f64>, Vec<f64>, Vec<f64>);

fn parse_values(csv: &str) -> Result<Columns> {
    let mut lines = csv.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "arc_param,f,g" => {}
        _ => return Err(Error::parse("cauchy csv", "expected header `arc_param,f,g`")),
    }
    let (mut s, mut f, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for (ln, line) in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::parse("cauchy csv", format!("line {}: expected 3 columns", ln + 1)));
        }
        let mut vals = [0.0; 3];
        for (v, c) in vals.iter_mut().zip(&cols) {
            *v = c
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse("cauchy csv", format!("line {}: bad number `{c}`", ln + 1)))?;
        }
        s.push(vals[0]);
        f.push(vals[1]);
        g.push(vals[2]);
    }
    Ok((s, f, g))
}

/// Normalized cumulative arc length of a closed polyline's vertices.
pub(crate) fn arc_parameters(points: &[Vec2]) -> Vec<f64> {
    let m = points.len();
    let mut acc = Vec::with_capacity(m);
    let mut total = 0.0;
    for k in 0..m {
        acc.push(total);
        total += (points[(k + 1) % m] - points[k]).norm();
    }
    acc.iter().map(|s| s / total).collect()
}

/// Values of a piecewise-linear function on the closed polyline `from`
/// (nodal values `values`) at the points `to`, each projected onto its
/// nearest segment.
pub fn transfer_trace(from: &[Vec2], values: &[f64], to: &[Vec2]) -> Vec<f64> {
    assert_eq!(from.len(), values.len());
    let m = from.len();
    to.iter()
        .map(|&p| {
            let mut best = (f64::INFINITY, 0.0);
            for k in 0..m {
                let (a, b) = (from[k], from[(k + 1) % m]);
                let d = b - a;
                let s = if d.norm_sq() > 0.0 { ((p - a).dot(d) / d.norm_sq()).clamp(0.0, 1.0) } else { 0.0 };
                let dist = (a + d * s - p).norm();
                if dist < best.0 {
                    best = (dist, values[k] * (1.0 - s) + values[(k + 1) % m] * s);
                }
            }
            best.1
        })
        .collect()
}

/// Inputs of a synthetic forward solve on the exact geometry.
pub struct Synthesis<'a> {
    pub exact: &'a ParametricShape,
    /// Sample count of the exact inclusion boundary.
    pub inner_points: usize,
    /// Finely sampled outer boundary.
    pub outer: &'a BoundaryCurve,
    pub coeff: &'a CoefficientSet,
    pub g: &'a ScalarFn,
    pub h_fine: f64,
}

/// Solves the Neumann state on a fine mesh of the exact annulus and samples
/// the resulting trace and the flux datum at the Σ nodes of `mesh`.
pub fn synthesize_data(spec: &Synthesis<'_>, mesh: &AnnularMesh, h_inversion: f64) -> Result<CauchyData> {
    if !(spec.h_fine > 0.0 && spec.h_fine <= h_inversion / 3.0 * (1.0 + 1e-12)) {
        return Err(Error::range(
            "h_fine",
            format!("{} must be positive and at most a third of {h_inversion}", spec.h_fine),
        ));
    }
    let inner = spec.exact.sample(spec.inner_points, BoundaryLabel::Gamma)?;
    let fine = triangulate_annulus(spec.outer, &inner, spec.h_fine)?;
    let fine_sigma = fine.boundary_points(BoundaryLabel::Sigma);
    let g_fine: Vec<f64> = fine_sigma.iter().map(|&x| (spec.g)(x)).collect();
    let u = solve_state_neumann(&fine, spec.coeff, &g_fine)?;
    let trace = u.restrict(fine.boundary_loop(BoundaryLabel::Sigma));
    let sigma = mesh.boundary_points(BoundaryLabel::Sigma);
    let f = transfer_trace(&fine_sigma, &trace, &sigma);
    let g = sigma.iter().map(|&x| (spec.g)(x)).collect();
    Ok(CauchyData {
        arc_param: arc_parameters(&sigma),
        f,
        g,
        noise_level: 0.0,
        noise_mode: NoiseMode::ScaleF,
        source: DataSource::Synthetic { forward_nodes: fine.num_nodes(), h_fine: spec.h_fine },
    })
}

/// Multiplies the selected datum by `1 + delta`; noise levels compose
/// multiplicatively.
pub fn apply_noise(data: &CauchyData, delta: f64, mode: NoiseMode) -> Result<CauchyData> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::range("delta", format!("{delta} must be non-negative")));
    }
    if data.noise_level > 0.0 && mode != data.noise_mode {
        return Err(Error::range("noise_mode", "cannot mix noise modes"));
    }
    let scale = 1.0 + delta;
    let mut out = data.clone();
    match mode {
        NoiseMode::ScaleF => out.f.iter_mut().for_each(|v| *v *= scale),
        NoiseMode::ScaleG => out.g.iter_mut().for_each(|v| *v *= scale),
    }
    out.noise_level = if data.noise_level == 0.0 { delta } else { (1.0 + data.noise_level) * scale - 1.0 };
    out.noise_mode = mode;
    Ok(out)
}
