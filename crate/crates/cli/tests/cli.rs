use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_shape-recover");

const SMALL_RUN: &str = r#"
seed = 3
methods = ["SO_JD", "ADMM"]

[geometry]
exact = "circle"
center = [0.15, 0.0]
radius = 0.3
initial_radius = 0.45
outer_points = 60
inner_points = 40
forward_outer_points = 120

[data]
noise = [0.0, 0.1]

[solver]
h = 0.12
max_iter = 3
eta = 0.0
beta = 0.1
"#;

fn shape_recover(args: &[&str], out: &Path) -> Output {
    Command::new(BIN).args(args).arg("--out").arg(out).env_remove("SHAPE_RECOVER_OUT").output().expect("binary runs")
}

fn write_spec(dir: &Path, text: &str) -> String {
    let path = dir.join("spec.in.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn bad_spec_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "[geometry]\nexact = \"case1\"\n[solver]\nmhu = 0.5\n");
    let out = shape_recover(&["run", &spec], &tmp.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mhu") && stderr.contains("line 4"), "{stderr}");

    let spec = write_spec(tmp.path(), "[geometry]\nexact = \"case1\"\n[data]\nflux = \"g_cubic\"\n");
    assert_eq!(shape_recover(&["mesh", &spec], &tmp.path().join("out")).status.code(), Some(2));

    let missing = tmp.path().join("absent.toml");
    assert_eq!(shape_recover(&["run", missing.to_str().unwrap()], &tmp.path().join("out")).status.code(), Some(2));
}

#[test]
fn run_writes_a_complete_reproducible_tree() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), SMALL_RUN);
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    for out in [&first, &second] {
        let result = shape_recover(&["run", &spec, "--stride", "2"], out);
        assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    }

    let manifest = fs::read_to_string(first.join("manifest.sha256")).unwrap();
    let paths: Vec<&str> = manifest.lines().map(|l| l.split_once("  ").unwrap().1).collect();
    assert!(paths.windows(2).all(|w| w[0] < w[1]));
    for job in ["SO_JD_delta_0", "SO_JD_delta_0.1", "ADMM_delta_0", "ADMM_delta_0.1"] {
        for file in [
            "history.csv",
            "final_mesh.vtk",
            "data.csv",
            "data.meta",
            "gamma_000000.csv",
            "gamma_000002.csv",
            "gamma_000003.csv",
        ] {
            let path = format!("{job}/{file}");
            assert!(paths.contains(&path.as_str()), "{path} missing from manifest");
        }
        assert!(!first.join(job).join("FAILED").exists());
    }
    assert!(paths.contains(&"spec.toml") && paths.contains(&"exact.csv"));
    let vtk = fs::read_to_string(first.join("ADMM_delta_0.1/final_mesh.vtk")).unwrap();
    assert!(vtk.contains("SCALARS v") && vtk.contains("SCALARS lambda"));

    assert_eq!(manifest, fs::read_to_string(second.join("manifest.sha256")).unwrap());
}

#[test]
fn mesh_and_synthesize_verbs() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), SMALL_RUN);
    let out = tmp.path().join("mesh");
    assert!(shape_recover(&["mesh", &spec], &out).status.success());
    for file in ["initial_mesh.vtk", "sigma.csv", "gamma_initial.csv", "exact.csv", "manifest.sha256"] {
        assert!(out.join(file).exists(), "{file}");
    }
    let out = tmp.path().join("data");
    assert!(shape_recover(&["synthesize", &spec], &out).status.success());
    for dir in ["delta_0", "delta_0.1"] {
        assert!(out.join(dir).join("data.csv").exists() && out.join(dir).join("data.meta").exists());
    }
}

#[test]
fn verify_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = shape_recover(&["verify"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report = fs::read_to_string(tmp.path().join("verification.csv")).unwrap();
    assert_eq!(report.lines().count(), 8);
    assert!(report.lines().skip(1).all(|l| l.ends_with(",true")));
}
