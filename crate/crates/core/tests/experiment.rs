use std::fs;

use shape_recover::experiment::{build_manifest, parse_spec, run_experiment, RunOptions, FAILED_MARKER, MANIFEST_NAME};
use shape_recover::mesh::parse_polyline_csv;
use shape_recover::reconstruction::parse_history_csv;

const SMALL: &str = r#"
seed = 11
[geometry]
exact = "circle"
center = [0.15, 0.0]
radius = 0.3
initial_radius = 0.45
outer_points = 60
inner_points = 40
forward_outer_points = 120

[data]
noise = [0.0, 0.2]

[solver]
h = 0.12
max_iter = 4
eta = 0.0
"#;

fn options(out: &std::path::Path) -> RunOptions {
    RunOptions { out: out.to_path_buf(), stride: 3, jobs: 1 }
}

#[test]
fn artifacts_parse_and_manifest_covers_them() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = parse_spec(SMALL).unwrap();
    let report = run_experiment(&spec, &options(tmp.path())).unwrap();
    assert!(report.all_succeeded());
    assert_eq!(report.jobs.iter().map(|j| j.name.as_str()).collect::<Vec<_>>(), ["SO_JD_delta_0", "SO_JD_delta_0.2"]);

    for job in &report.jobs {
        let summary = job.result.as_ref().unwrap();
        let history = parse_history_csv(&fs::read_to_string(job.dir.join("history.csv")).unwrap()).unwrap();
        assert_eq!(history.len(), summary.iterations + 1);
        assert_eq!(history.last().unwrap().cost, summary.final_cost);
        for iter in [0, 3, summary.iterations] {
            let gamma =
                parse_polyline_csv(&fs::read_to_string(job.dir.join(format!("gamma_{iter:06}.csv"))).unwrap()).unwrap();
            assert_eq!(gamma.len(), 40);
        }
    }
    // The noisier run cannot fit its data better.
    let misfits: Vec<f64> = report.jobs.iter().map(|j| j.result.as_ref().unwrap().final_misfit).collect();
    assert!(misfits[0] < misfits[1], "{misfits:?}");

    let listed = fs::read_to_string(&report.manifest_path).unwrap();
    assert_eq!(build_manifest(tmp.path()).unwrap(), report.manifest);
    assert_eq!(listed.lines().count(), report.manifest.len());
    assert!(report.manifest.iter().all(|e| e.path != MANIFEST_NAME && e.sha256.len() == 64));
}

#[test]
fn same_seed_same_bytes() {
    let spec = parse_spec(SMALL).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_experiment(&spec, &RunOptions { jobs: 2, ..options(a.path()) }).unwrap();
    let second = run_experiment(&spec, &options(b.path())).unwrap();
    assert_eq!(first.manifest, second.manifest);
}

#[test]
fn failing_jobs_leave_markers() {
    let tmp = tempfile::tempdir().unwrap();
    // Every first step inverts the mesh and no halving is allowed.
    let text = SMALL.replace("eta = 0.0", "eta = 0.0\nmu = 1e8\nmax_halvings = 0");
    let spec = parse_spec(&text).unwrap();
    let report = run_experiment(&spec, &options(tmp.path())).unwrap();
    assert!(report.jobs.iter().all(|j| j.result.is_err()));
    for job in &report.jobs {
        let marker = job.dir.join(FAILED_MARKER);
        assert_eq!(marker.exists(), job.result.is_err(), "{}", job.name);
        if let Err(message) = &job.result {
            assert_eq!(fs::read_to_string(&marker).unwrap().trim(), message);
            assert!(job.dir.join("data.csv").exists());
        }
    }
    assert!(report.manifest.iter().any(|e| e.path.ends_with(FAILED_MARKER)));
}

#[test]
fn clean_data_never_reconstructs_worse() {
    for exact in ["exact = \"circle\"\ncenter = [0.2, 0.0]\nradius = 0.3", "exact = \"case1\"", "exact = \"case2\""] {
        let text = format!(
            "methods = [\"SO_JD\", \"ADMM\"]\n[geometry]\n{exact}\ninitial_radius = 0.6\n[data]\nnoise = [0.0, 0.3]\n\
             [solver]\nh = 0.08\nmax_iter = 40\neta = 0.0\nbeta = 0.1\nlambda0 = 0.0001\n"
        );
        let spec = parse_spec(&text).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let report = run_experiment(&spec, &options(tmp.path())).unwrap();
        let hausdorff = |name: &str| {
            let job = report.jobs.iter().find(|j| j.name == name).unwrap();
            job.result.as_ref().unwrap().final_hausdorff.unwrap()
        };
        for method in ["SO_JD", "ADMM"] {
            let (clean, noisy) = (hausdorff(&format!("{method}_delta_0")), hausdorff(&format!("{method}_delta_0.3")));
            assert!(clean <= noisy, "{exact} {method}: {clean} > {noisy}");
        }
    }
}
