//! `shape-recover`: run inclusion-reconstruction experiments from TOML specs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shape_recover::experiment::{
    parse_spec, run_experiment, run_verification_suite, write_data_artifacts, write_mesh_artifacts, ExperimentSpec,
    RunOptions,
};
use shape_recover::Error;

const EXIT_SPEC: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VERIFICATION: u8 = 4;

#[derive(Parser)]
#[command(name = "shape-recover", version, about = "Inclusion detection by shape-gradient descent and ADMM")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory [default: $SHAPE_RECOVER_OUT, else ./shape-recover-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the spec's seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Γ snapshot stride
    #[arg(long, global = true, default_value_t = 10)]
    stride: usize,
    /// Parallel jobs (0: one per core)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize data and reconstruct for every noise level and method
    Run { spec: PathBuf },
    /// Run the identity and gradient-consistency battery
    Verify,
    /// Write the synthetic data only
    Synthesize { spec: PathBuf },
    /// Write the initial mesh only
    Mesh { spec: PathBuf },
}

/// An error together with the exit code it maps to.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::UnknownExpression(_) | Error::InvalidRange { .. } => EXIT_SPEC,
            _ => EXIT_SOLVER,
        };
        Failure(code, e.to_string())
    }
}

fn load_spec(path: &Path, seed: Option<u64>) -> Result<ExperimentSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(EXIT_SPEC, format!("cannot read {}: {e}", path.display())))?;
    let mut spec = parse_spec(&text)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn output_dir(cli_out: Option<PathBuf>, spec: Option<&ExperimentSpec>) -> PathBuf {
    cli_out
        .or_else(|| spec.and_then(|s| s.output.clone()))
        .or_else(|| std::env::var_os("SHAPE_RECOVER_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("shape-recover-out"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { spec } => {
            let spec = load_spec(&spec, cli.seed)?;
            let out = output_dir(cli.out, Some(&spec));
            let report = run_experiment(&spec, &RunOptions { out, stride: cli.stride, jobs: cli.jobs })?;
            for job in &report.jobs {
                match &job.result {
                    Ok(s) => println!(
                        "{}: {} iterations, cost {:e}, hausdorff {}",
                        job.name,
                        s.iterations,
                        s.final_cost,
                        s.final_hausdorff.map_or("-".to_string(), |h| format!("{h:.4}"))
                    ),
                    Err(e) => println!("{}: FAILED: {e}", job.name),
                }
            }
            println!("manifest: {}", report.manifest_path.display());
            if !report.all_succeeded() {
                return Err(Failure(EXIT_SOLVER, "one or more runs failed".into()));
            }
        }
        Command::Verify => {
            let report = run_verification_suite()?;
            let csv = report.to_csv();
            print!("{csv}");
            if let Some(out) = cli.out.or_else(|| std::env::var_os("SHAPE_RECOVER_OUT").map(PathBuf::from)) {
                std::fs::create_dir_all(&out)
                    .and_then(|_| std::fs::write(out.join("verification.csv"), &csv))
                    .map_err(|e| Failure(EXIT_SOLVER, format!("cannot write report: {e}")))?;
            }
            if !report.all_passed() {
                return Err(Failure(EXIT_VERIFICATION, "verification residuals exceed tolerance".into()));
            }
        }
        Command::Synthesize { spec } => {
            let spec = load_spec(&spec, cli.seed)?;
            let out = output_dir(cli.out, Some(&spec));
            let report = write_data_artifacts(&spec, &out)?;
            println!("manifest: {}", report.manifest_path.display());
        }
        Command::Mesh { spec } => {
            let spec = load_spec(&spec, cli.seed)?;
            let out = output_dir(cli.out, Some(&spec));
            let report = write_mesh_artifacts(&spec, &out)?;
            println!("manifest: {}", report.manifest_path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
