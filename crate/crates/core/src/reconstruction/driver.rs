use super::admm::{admm_lambda_update, admm_v_update, AdmmState};
use super::history::RunRecord;
use super::{Method, SolverConfig};
use crate::fem::{CoefficientSet, NodalScalarField};
use crate::geometry::{hausdorff_distance, BoundaryLabel, Vec2};
use crate::mesh::{AnnularMesh, PointLocator};
use crate::pde::{solve_state_neumann, CauchyData, CostReport};
use crate::shape::{evaluate, evaluate_cost, sobolev_extend, step_size, AugmentedTerms, DescentField, Objective};
use crate::{Error, Result};

/// λ is flagged once `max|λ|` exceeds this multiple of `β max|u|`.
pub const LAMBDA_DIVERGENCE: f64 = 1e3;

/// Fixed inputs of a reconstruction.
#[derive(Clone, Copy, Debug)]
pub struct ReconstructionProblem<'a> {
    pub coeff: &'a CoefficientSet,
    pub data: &'a CauchyData,
    /// True Γ polyline, for the Hausdorff column.
    pub truth: Option<&'a [Vec2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    SmallGradient,
    SmallCost,
    /// No halving of the step lowered the cost.
    NoDescent,
}

/// Records, final mesh and, for ADMM, the final auxiliary state.
///
/// The last record describes the final shape and has step 0.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    pub mesh: AnnularMesh,
    pub admm: Option<AdmmState>,
    pub stop: StopReason,
}

impl RunOutcome {
    pub fn final_record(&self) -> &RunRecord {
        self.records.last().expect("a run records at least one iteration")
    }
}

/// Runs the method selected in `config`.
pub fn reconstruct(
    config: &SolverConfig,
    problem: &ReconstructionProblem<'_>,
    mesh: AnnularMesh,
) -> Result<RunOutcome> {
    match config.method {
        Method::SoJd | Method::SoJn => run_so(config, problem, mesh),
        Method::Admm => run_admm(config, problem, mesh),
    }
}

struct Accepted {
    mesh: AnnularMesh,
    step: f64,
}

/// Deforms along θ from step `t0`, halving on inversion or cost increase.
fn backtrack(
    mesh: &AnnularMesh,
    field: &DescentField,
    t0: f64,
    cost0: f64,
    max_halvings: usize,
    cost_on: impl Fn(&AnnularMesh) -> Result<CostReport>,
) -> Result<Option<Accepted>> {
    let mut t = t0;
    let mut inverted = false;
    for _ in 0..=max_halvings {
        match mesh.deform(field.theta.values(), t) {
            Ok(trial) => {
                inverted = false;
                if cost_on(&trial)?.value <= cost0 {
                    return Ok(Some(Accepted { mesh: trial, step: t }));
                }
            }
            Err(Error::StepTooLarge { .. }) => inverted = true,
            Err(e) => return Err(e),
        }
        t *= 0.5;
    }
    if inverted {
        Err(Error::StepStalled { halvings: max_halvings })
    } else {
        Ok(None)
    }
}

/// Rebuilds the mesh around the current boundary loops.
fn remesh(mesh: &AnnularMesh, h: f64) -> Result<AnnularMesh> {
    let fresh = mesh.remesh(h)?;
    if fresh.boundary_points(BoundaryLabel::Sigma) != mesh.boundary_points(BoundaryLabel::Sigma) {
        return Err(Error::FieldMismatch("remeshing changed the Σ nodes".into()));
    }
    Ok(fresh)
}

fn needs_remesh(config: &SolverConfig, iter: usize, mesh: &AnnularMesh) -> bool {
    (config.remesh_every > 0 && (iter + 1).is_multiple_of(config.remesh_every))
        || mesh.min_quality() < config.remesh_quality
}

fn hausdorff(problem: &ReconstructionProblem<'_>, mesh: &AnnularMesh) -> Option<f64> {
    problem.truth.map(|truth| hausdorff_distance(&mesh.boundary_points(BoundaryLabel::Gamma), truth))
}

/// Plain shape-gradient descent on J_D or J_N.
///
/// Each iteration evaluates the cost and kernel, extends the kernel to a
/// descent field, and accepts the first step of the halving sequence that
/// keeps every triangle valid and does not raise the cost.
pub fn run_so(config: &SolverConfig, problem: &ReconstructionProblem<'_>, mut mesh: AnnularMesh) -> Result<RunOutcome> {
    config.validate()?;
    let objective = match config.method {
        Method::SoJd => Objective::DirichletTracking,
        Method::SoJn => {
            log::warn!("J_N tracking is less stable than J_D tracking");
            Objective::NeumannTracking
        }
        Method::Admm => return Err(Error::range("method", "run_so needs SO_JD or SO_JN")),
    };
    problem.data.check_mesh(&mesh)?;
    let eta = config.eta;
    let mut records = Vec::with_capacity(config.max_iter + 1);
    let mut remeshed = false;
    let mut stop = StopReason::MaxIterations;

    for iter in 0..=config.max_iter {
        let eval = evaluate(&mesh, problem.coeff, problem.data, &objective, eta)?;
        let field = sobolev_extend(&mesh, &eval.kernel)?;
        let mut record = RunRecord {
            iter,
            cost: eval.cost,
            grad_norm: field.h1_norm,
            step: 0.0,
            hausdorff: hausdorff(problem, &mesh),
            gamma: mesh.boundary_points(BoundaryLabel::Gamma),
            remeshed,
            box_violation: None,
            warning: None,
        };
        if iter == config.max_iter {
            records.push(record);
            break;
        }
        if field.h1_norm < config.tolerance {
            stop = StopReason::SmallGradient;
        } else if eval.cost.value < config.tolerance * config.tolerance {
            stop = StopReason::SmallCost;
        }
        if stop != StopReason::MaxIterations {
            records.push(record);
            break;
        }
        let t0 = match step_size(config.mu, eval.cost.value, &field, config.step_rule) {
            Ok(t) => t,
            Err(Error::ZeroDescentField) => {
                stop = StopReason::SmallGradient;
                records.push(record);
                break;
            }
            Err(e) => return Err(e),
        };
        let accepted = backtrack(&mesh, &field, t0, eval.cost.value, config.max_halvings, |m| {
            evaluate_cost(m, problem.coeff, problem.data, &objective, eta)
        })?;
        let Some(accepted) = accepted else {
            stop = StopReason::NoDescent;
            records.push(record);
            break;
        };
        record.step = accepted.step;
        records.push(record);
        mesh = accepted.mesh;
        remeshed = needs_remesh(config, iter, &mesh);
        if remeshed {
            mesh = remesh(&mesh, config.h)?;
        }
    }
    Ok(RunOutcome { records, mesh, admm: None, stop })
}

/// Carries nodal values from `old` to the nodes of `new` by barycentric
/// lookup.
fn reinterpolate(old: &AnnularMesh, values: &[f64], new: &AnnularMesh) -> Result<NodalScalarField> {
    let locator = PointLocator::new(old);
    NodalScalarField::new(new, new.nodes().iter().map(|&p| locator.interpolate(values, p)).collect())
}

/// ADMM with the box `a ≤ v ≤ b` on the auxiliary field.
///
/// Each outer iteration takes up to `max_inner` descent steps on the
/// augmented Lagrangian with `v` and `λ` frozen, then solves the state on the
/// new shape and applies the projection and multiplier updates.
pub fn run_admm(
    config: &SolverConfig,
    problem: &ReconstructionProblem<'_>,
    mut mesh: AnnularMesh,
) -> Result<RunOutcome> {
    config.validate()?;
    let beta = match (config.method, config.beta) {
        (Method::Admm, Some(beta)) => beta,
        _ => return Err(Error::range("method", "run_admm needs ADMM with beta")),
    };
    problem.data.check_mesh(&mesh)?;
    let u0 = solve_state_neumann(&mesh, problem.coeff, &problem.data.g)?;
    let bounds = config.bounds.bounds(problem.data, u0.values())?;
    if !(bounds.0 <= bounds.1) {
        return Err(Error::range("bounds", format!("lower bound {} exceeds upper bound {}", bounds.0, bounds.1)));
    }
    let v = match config.v0 {
        Some(v0) => NodalScalarField::new(&mesh, vec![v0; mesh.num_nodes()])?,
        None => u0.clone(),
    };
    let lambda = NodalScalarField::new(&mesh, vec![config.lambda0; mesh.num_nodes()])?;
    let mut admm = AdmmState { v, lambda, beta, bounds };

    let eta = config.eta;
    let mut records = Vec::with_capacity(config.max_iter + 1);
    let mut remeshed = false;
    let mut stop = StopReason::MaxIterations;

    for iter in 0..=config.max_iter {
        let mut record: Option<RunRecord> = None;
        let mut moved = false;
        for _ in 0..config.max_inner {
            let terms = AugmentedTerms { v: &admm.v, lambda: &admm.lambda, beta };
            let objective = Objective::Admm(terms);
            let eval = evaluate(&mesh, problem.coeff, problem.data, &objective, eta)?;
            let field = sobolev_extend(&mesh, &eval.kernel)?;
            let rec = record.get_or_insert_with(|| RunRecord {
                iter,
                cost: eval.cost,
                grad_norm: field.h1_norm,
                step: 0.0,
                hausdorff: hausdorff(problem, &mesh),
                gamma: mesh.boundary_points(BoundaryLabel::Gamma),
                remeshed,
                box_violation: None,
                warning: None,
            });
            if iter == config.max_iter || field.h1_norm < config.tolerance {
                break;
            }
            let t0 = match step_size(config.mu, eval.cost.value.abs(), &field, config.step_rule) {
                Ok(t) => t,
                Err(Error::ZeroDescentField) => break,
                Err(e) => return Err(e),
            };
            let accepted = backtrack(&mesh, &field, t0, eval.cost.value, config.max_halvings, |m| {
                let v = admm.v.rebind(m)?;
                let lambda = admm.lambda.rebind(m)?;
                let objective = Objective::Admm(AugmentedTerms { v: &v, lambda: &lambda, beta });
                evaluate_cost(m, problem.coeff, problem.data, &objective, eta)
            })?;
            let Some(accepted) = accepted else { break };
            rec.step += accepted.step;
            admm.v = admm.v.rebind(&accepted.mesh)?;
            admm.lambda = admm.lambda.rebind(&accepted.mesh)?;
            mesh = accepted.mesh;
            moved = true;
        }
        let mut record = record.expect("max_inner is at least 1");
        if iter == config.max_iter {
            record.box_violation = Some(admm.box_violation());
            records.push(record);
            break;
        }

        let u = solve_state_neumann(&mesh, problem.coeff, &problem.data.g)?;
        let v = admm_v_update(u.values(), admm.lambda.values(), beta, bounds);
        let lambda = admm_lambda_update(admm.lambda.values(), beta, u.values(), &v);
        admm.v = NodalScalarField::new(&mesh, v)?;
        admm.lambda = NodalScalarField::new(&mesh, lambda)?;
        record.box_violation = Some(admm.box_violation());

        let max_u = u.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let max_lambda = admm.lambda.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max_lambda > LAMBDA_DIVERGENCE * beta * max_u {
            let message = format!("multiplier growing: max|λ| = {max_lambda:.3e}, β max|u| = {:.3e}", beta * max_u);
            log::warn!("iteration {iter}: {message}");
            record.warning = Some(message);
        }
        records.push(record);

        if !moved {
            if records.last().is_some_and(|r| r.grad_norm < config.tolerance) {
                stop = StopReason::SmallGradient;
                break;
            }
            continue;
        }
        remeshed = needs_remesh(config, iter, &mesh);
        if remeshed {
            let fresh = remesh(&mesh, config.h)?;
            admm.v = reinterpolate(&mesh, admm.v.values(), &fresh)?;
            admm.lambda = reinterpolate(&mesh, admm.lambda.values(), &fresh)?;
            mesh = fresh;
        }
    }
    Ok(RunOutcome { records, mesh, admm: Some(admm), stop })
}
