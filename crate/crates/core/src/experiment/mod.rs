//! Run specifications, the expression registry and artifact output.

pub mod registry;
mod runner;
mod spec;
mod verification;

pub use runner::{
    build_manifest, initial_mesh, job_name, run_experiment, synthesize, write_data_artifacts, write_mesh_artifacts,
    ExperimentReport, JobReport, JobSummary, ManifestEntry, RunOptions, FAILED_MARKER, MANIFEST_NAME,
};
pub use spec::{parse_spec, CoefficientSpec, DataSpec, ExactShape, ExperimentSpec, GeometrySpec, SigmaSpec};
pub use verification::{run_verification_suite, VerificationReport};
