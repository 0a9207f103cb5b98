use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::spec::ExperimentSpec;
use crate::geometry::BoundaryLabel;
use crate::mesh::{format_polyline_csv, format_vtk, triangulate_annulus, AnnularMesh, VtkField};
use crate::pde::{apply_noise, solve_state_neumann, synthesize_data, CauchyData, Synthesis};
use crate::reconstruction::{
    format_history_csv, reconstruct, snapshot_name, Method, ReconstructionProblem, RunOutcome, SolverConfig,
};
use crate::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.sha256";
pub const FAILED_MARKER: &str = "FAILED";

/// Output settings that do not change results.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Γ snapshot stride; the final iteration is always written.
    pub stride: usize,
    /// Worker threads for the sweep; 0 lets rayon decide.
    pub jobs: usize,
}

/// Outcome of one (noise level, method) pair.
#[derive(Clone, Debug)]
pub struct JobReport {
    pub name: String,
    pub method: Method,
    pub noise: f64,
    pub dir: PathBuf,
    pub result: std::result::Result<JobSummary, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobSummary {
    pub iterations: usize,
    pub final_cost: f64,
    pub final_misfit: f64,
    pub final_hausdorff: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub jobs: Vec<JobReport>,
    pub manifest: Vec<ManifestEntry>,
    pub manifest_path: PathBuf,
}

impl ExperimentReport {
    pub fn all_succeeded(&self) -> bool {
        self.jobs.iter().all(|j| j.result.is_ok())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path relative to the output root, `/`-separated.
    pub path: String,
    pub sha256: String,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Directory name of a job, e.g. `SO_JD_delta_0.1`.
pub fn job_name(method: Method, noise: f64) -> String {
    format!("{method}_delta_{noise}")
}

/// Initial mesh of the inversion.
pub fn initial_mesh(spec: &ExperimentSpec) -> Result<AnnularMesh> {
    let outer = spec.outer_curve(spec.geometry.outer_points)?;
    triangulate_annulus(&outer, &spec.initial_curve()?, spec.solver.h)
}

/// Noise-free data on the Σ nodes of `mesh`.
pub fn synthesize(spec: &ExperimentSpec, mesh: &AnnularMesh) -> Result<CauchyData> {
    let coeff = spec.coefficients()?;
    let g = super::registry::flux(&spec.data.flux)?;
    let exact = spec.exact_shape()?;
    let outer_fine = spec.outer_curve(spec.geometry.forward_outer_points)?;
    let synthesis = Synthesis {
        exact: &exact,
        inner_points: spec.exact_points(),
        outer: &outer_fine,
        coeff: &coeff,
        g: &g,
        h_fine: spec.h_fine(),
    };
    synthesize_data(&synthesis, mesh, spec.solver.h)
}

fn write_data(dir: &Path, data: &CauchyData) -> Result<()> {
    write(&dir.join("data.csv"), data.to_csv())?;
    write(&dir.join("data.meta"), data.sidecar())
}

/// Writes the initial mesh and boundary polylines.
pub fn write_mesh_artifacts(spec: &ExperimentSpec, out: &Path) -> Result<ExperimentReport> {
    create_dir(out)?;
    let mesh = initial_mesh(spec)?;
    write(&out.join("initial_mesh.vtk"), format_vtk(&mesh, &[])?)?;
    write(&out.join("sigma.csv"), format_polyline_csv(&mesh.boundary_points(BoundaryLabel::Sigma)))?;
    write(&out.join("gamma_initial.csv"), format_polyline_csv(&mesh.boundary_points(BoundaryLabel::Gamma)))?;
    write(&out.join("exact.csv"), format_polyline_csv(spec.exact_curve()?.points()))?;
    finish(out, Vec::new())
}

/// Writes the synthetic data at every noise level.
pub fn write_data_artifacts(spec: &ExperimentSpec, out: &Path) -> Result<ExperimentReport> {
    create_dir(out)?;
    let mesh = initial_mesh(spec)?;
    let clean = synthesize(spec, &mesh)?;
    for &noise in &spec.data.noise {
        let dir = out.join(format!("delta_{noise}"));
        create_dir(&dir)?;
        write_data(&dir, &apply_noise(&clean, noise, spec.data.noise_mode)?)?;
    }
    write(&out.join("exact.csv"), format_polyline_csv(spec.exact_curve()?.points()))?;
    finish(out, Vec::new())
}

/// Synthesizes data, runs every (noise level, method) pair and writes
/// histories, Γ snapshots, the final mesh and a hash manifest.
///
/// A failing job leaves its partial artifacts and a `FAILED` file holding
/// the error; the others still run.
pub fn run_experiment(spec: &ExperimentSpec, options: &RunOptions) -> Result<ExperimentReport> {
    spec.validate()?;
    create_dir(&options.out)?;
    let resolved = toml::to_string(spec).map_err(|e| Error::parse("spec", e.to_string()))?;
    write(&options.out.join("spec.toml"), resolved)?;

    let mesh = initial_mesh(spec)?;
    let clean = synthesize(spec, &mesh)?;
    let truth = spec.exact_curve()?.into_points();
    write(&options.out.join("exact.csv"), format_polyline_csv(&truth))?;
    let coeff = spec.coefficients()?;

    let mut pairs: Vec<(f64, Method)> =
        spec.data.noise.iter().flat_map(|&d| spec.methods().into_iter().map(move |m| (d, m))).collect();
    let order: Vec<(f64, Method)> = pairs.clone();
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));

    let run_job = |&(noise, method): &(f64, Method)| -> JobReport {
        let name = job_name(method, noise);
        let dir = options.out.join(&name);
        let result = (|| {
            create_dir(&dir)?;
            let data = apply_noise(&clean, noise, spec.data.noise_mode)?;
            write_data(&dir, &data)?;
            let config = SolverConfig { method, noise, ..spec.solver.clone() };
            let problem = ReconstructionProblem { coeff: &coeff, data: &data, truth: Some(&truth) };
            let outcome = reconstruct(&config, &problem, mesh.clone())?;
            write_run(&dir, &outcome, &problem, options.stride)
        })();
        let result = result.map_err(|e| {
            log::error!("{name}: {e}");
            let _ = fs::write(dir.join(FAILED_MARKER), format!("{e}\n"));
            e.to_string()
        });
        JobReport { name, method, noise, dir, result }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::range("jobs", e.to_string()))?;
    let mut jobs: Vec<JobReport> = pool.install(|| pairs.par_iter().map(run_job).collect());
    jobs.sort_by_key(|j| order.iter().position(|&(d, m)| d == j.noise && m == j.method));
    finish(&options.out, jobs)
}

fn write_run(
    dir: &Path,
    outcome: &RunOutcome,
    problem: &ReconstructionProblem<'_>,
    stride: usize,
) -> Result<JobSummary> {
    write(&dir.join("history.csv"), format_history_csv(&outcome.records))?;
    let last = outcome.final_record();
    for record in &outcome.records {
        if (stride > 0 && record.iter % stride == 0) || record.iter == last.iter {
            write(&dir.join(snapshot_name(record.iter)), format_polyline_csv(&record.gamma))?;
        }
    }
    let mesh = &outcome.mesh;
    let state = solve_state_neumann(mesh, problem.coeff, &problem.data.g)?;
    let mut fields = vec![VtkField::Scalar("u", state.values())];
    if let Some(admm) = &outcome.admm {
        fields.push(VtkField::Scalar("v", admm.v.values()));
        fields.push(VtkField::Scalar("lambda", admm.lambda.values()));
    }
    write(&dir.join("final_mesh.vtk"), format_vtk(mesh, &fields)?)?;
    Ok(JobSummary {
        iterations: last.iter,
        final_cost: last.cost.value,
        final_misfit: last.cost.misfit,
        final_hausdorff: last.hausdorff,
    })
}

/// Hashes every file under `out` except the manifest itself and writes the
/// manifest in `sha256sum` format, sorted by path.
fn finish(out: &Path, jobs: Vec<JobReport>) -> Result<ExperimentReport> {
    let manifest = build_manifest(out)?;
    let mut text = String::new();
    for entry in &manifest {
        let _ = writeln!(text, "{}  {}", entry.sha256, entry.path);
    }
    let manifest_path = out.join(MANIFEST_NAME);
    write(&manifest_path, text)?;
    Ok(ExperimentReport { jobs, manifest, manifest_path })
}

pub fn build_manifest(root: &Path) -> Result<Vec<ManifestEntry>> {
    let mut files = Vec::new();
    collect_files(root, root, &mut files)?;
    files.retain(|p| p != MANIFEST_NAME);
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let full = root.join(&path);
            let bytes = fs::read(&full).map_err(|e| Error::io(&full, e))?;
            Ok(ManifestEntry { path, sha256: hex::encode(Sha256::digest(&bytes)) })
        })
        .collect()
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walk stays under the root");
            let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.push(parts.join("/"));
        }
    }
    Ok(())
}
