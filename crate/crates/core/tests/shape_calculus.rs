mod common;

use std::sync::Arc;

use common::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shape_recover::fem::{assemble_h1_scalar, CoefficientSet, NodalScalarField, NodalVectorField};
use shape_recover::pde::*;
use shape_recover::shape::*;
use shape_recover::{AnnularMesh, BoundaryLabel, Vec2};

fn data_on(mesh: &AnnularMesh, f: impl Fn(Vec2) -> f64, g: impl Fn(Vec2) -> f64) -> CauchyData {
    let n = mesh.boundary_loop(BoundaryLabel::Sigma).len();
    CauchyData {
        arc_param: (0..n).map(|k| k as f64 / n as f64).collect(),
        f: on_sigma(mesh, f),
        g: on_sigma(mesh, g),
        noise_level: 0.0,
        noise_mode: NoiseMode::ScaleF,
        source: DataSource::Loaded,
    }
}

fn sigma_trace(mesh: &AnnularMesh, u: &NodalScalarField) -> Vec<f64> {
    u.restrict(mesh.boundary_loop(BoundaryLabel::Sigma))
}

fn spread(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    (hi - lo) / mean.abs()
}

#[test]
fn matched_data_gives_zero_kernels() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let p = solve_adjoint_pn(&mesh, &coeff, &u, &sigma_trace(&mesh, &u)).unwrap();
    assert_eq!(kernel_gd(&mesh, &coeff, &u, &p).unwrap().max_abs(), 0.0);

    let f = on_sigma(&mesh, |x| 1.0 + 0.3 * x.y);
    let ud = solve_state_dirichlet(&mesh, &coeff, &f).unwrap();
    let flux = dirichlet_state_flux(&mesh, &coeff, &ud).unwrap();
    let pd = solve_adjoint_pd(&mesh, &coeff, &ud, &flux).unwrap();
    assert_eq!(kernel_gn(&mesh, &coeff, &ud, &pd).unwrap().max_abs(), 0.0);
}

#[test]
fn neumann_kernel_is_negated_dirichlet_formula() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let u = NodalScalarField::from_fn(&mesh, |x| (x.norm() - 0.5) * (1.0 + x.x)).unwrap();
    let p = NodalScalarField::from_fn(&mesh, |x| (x.norm() - 0.5) * x.y).unwrap();
    for recovery in [FluxRecovery::Variational, FluxRecovery::Averaged] {
        let gd = kernel_gd_with(&mesh, &coeff, &u, &p, recovery).unwrap();
        let gn = kernel_gn_with(&mesh, &coeff, &u, &p, recovery).unwrap();
        for (a, b) in gd.values().iter().zip(gn.values()) {
            assert_eq!(*a, -b);
        }
    }
}

#[test]
fn kernel_scales_inversely_with_conductivity() {
    let mesh = annulus(0.5, 0.06);
    let g = on_sigma(&mesh, |x| x.x.exp());
    let load = on_sigma(&mesh, |x| 0.2 * x.y - 0.1);
    let kernel = |c: f64| {
        let coeff = CoefficientSet::constant(1.1 * c, Vec2::ZERO);
        let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
        // With b = 0 the adjoint for a fixed Σ load is a Neumann state.
        let p = solve_state_neumann(&mesh, &coeff, &load).unwrap();
        kernel_gd(&mesh, &coeff, &u, &p).unwrap()
    };
    let (base, scaled) = (kernel(1.0), kernel(3.0));
    for (a, b) in base.values().iter().zip(scaled.values()) {
        assert!((a / 3.0 - b).abs() <= 1e-10 * a.abs().max(1e-12), "{a} {b}");
    }
}

#[test]
fn concentric_kernels_are_constant() {
    let mesh = annulus(0.5, 0.03);
    let coeff = CoefficientSet::constant(1.1, Vec2::ZERO);
    let g = on_sigma(&mesh, |_| 1.0);
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let p = solve_adjoint_pn(&mesh, &coeff, &u, &on_sigma(&mesh, |_| 0.2)).unwrap();
    let gd = kernel_gd(&mesh, &coeff, &u, &p).unwrap();
    assert!(spread(gd.values()) < 0.02, "{}", spread(gd.values()));

    let ud = solve_state_dirichlet(&mesh, &coeff, &on_sigma(&mesh, |_| 1.0)).unwrap();
    let pd = solve_adjoint_pd(&mesh, &coeff, &ud, &g).unwrap();
    let gn = kernel_gn(&mesh, &coeff, &ud, &pd).unwrap();
    assert!(spread(gn.values()) < 0.02, "{}", spread(gn.values()));
}

#[test]
fn admm_kernel_reductions() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let f = on_sigma(&mesh, |x| 0.5 + 0.1 * x.x);
    let zero = NodalScalarField::zeros(&mesh);
    let v = NodalScalarField::from_fn(&mesh, |x| 0.4 + x.y).unwrap();

    // β = 0, λ = 0: H is the Dirichlet-tracking kernel written with w = −p_N.
    let w = solve_admm_adjoint_w(&mesh, &coeff, &u, &f, &v, &zero, 0.0).unwrap();
    let h = kernel_h_admm(&mesh, &coeff, &u, &w, &v, &zero, 0.0).unwrap();
    let p = solve_adjoint_pn(&mesh, &coeff, &u, &f).unwrap();
    let gd = kernel_gd(&mesh, &coeff, &u, &p).unwrap();
    for (a, b) in h.values().iter().zip(gd.values()) {
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-10), "{a} {b}");
    }

    // v ≡ 0, λ ≡ 0: only the flux product survives; it does not see v.
    let w0 = solve_admm_adjoint_w(&mesh, &coeff, &u, &f, &zero, &zero, 0.0).unwrap();
    let h0 = kernel_h_admm(&mesh, &coeff, &u, &w0, &zero, &zero, 0.0).unwrap();
    for (a, b) in h0.values().iter().zip(gd.values()) {
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-10));
    }

    // Matched data with v = u_N and λ = 0: w vanishes and so does H.
    let matched = sigma_trace(&mesh, &u);
    let w = solve_admm_adjoint_w(&mesh, &coeff, &u, &matched, &u, &zero, 0.7).unwrap();
    let h = kernel_h_admm(&mesh, &coeff, &u, &w, &u, &zero, 0.7).unwrap();
    assert_eq!(h.max_abs(), 0.0);
}

#[test]
fn extension_of_zero_and_linearity() {
    let mesh = annulus(0.5, 0.06);
    let zero = sobolev_extend(&mesh, &BoundaryKernel::zeros(&mesh)).unwrap();
    assert_eq!(zero.h1_norm, 0.0);
    assert!(zero.theta.values().iter().all(|v| *v == Vec2::ZERO));

    let values: Vec<f64> = mesh.boundary_points(BoundaryLabel::Gamma).iter().map(|p| 1.0 + p.x).collect();
    let kernel = BoundaryKernel::new(&mesh, values).unwrap();
    let a = sobolev_extend(&mesh, &kernel).unwrap();
    let b = sobolev_extend(&mesh, &kernel.scaled(-2.5)).unwrap();
    for (x, y) in a.theta.values().iter().zip(b.theta.values()) {
        assert!((*x * -2.5 - *y).norm() < 1e-13);
    }
    assert!((b.h1_norm - 2.5 * a.h1_norm).abs() < 1e-12 * a.h1_norm);
    assert!(mesh.boundary_loop(BoundaryLabel::Sigma).iter().all(|&i| a.theta.values()[i] == Vec2::ZERO));
    let assembled = h1_norm_sq(&mesh, a.theta.values());
    assert!((a.h1_norm * a.h1_norm - assembled).abs() <= 1e-10 * assembled);
}

#[test]
fn positive_constant_kernel_moves_gamma_against_normal() {
    let mesh = annulus(0.5, 0.03);
    let kernel = BoundaryKernel::new(&mesh, vec![1.0; mesh.boundary_loop(BoundaryLabel::Gamma).len()]).unwrap();
    let field = sobolev_extend(&mesh, &kernel).unwrap();
    let normals = mesh.boundary_normals(BoundaryLabel::Gamma);
    let inward = mesh
        .boundary_loop(BoundaryLabel::Gamma)
        .iter()
        .zip(&normals)
        .filter(|(&i, n)| field.theta.values()[i].dot(**n) < 0.0)
        .count();
    assert!(inward as f64 >= 0.95 * normals.len() as f64);
}

#[test]
fn extension_satisfies_its_variational_equation() {
    let mesh = annulus(0.5, 0.06);
    let values: Vec<f64> = mesh.boundary_points(BoundaryLabel::Gamma).iter().map(|p| (3.0 * p.y).sin() + 0.5).collect();
    let kernel = BoundaryKernel::new(&mesh, values).unwrap();
    let field = sobolev_extend(&mesh, &kernel).unwrap();
    let k = assemble_h1_scalar(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sigma = mesh.boundary_loop(BoundaryLabel::Sigma).to_vec();
    let th = field.theta.values();
    let (tx, ty): (Vec<f64>, Vec<f64>) = th.iter().map(|v| (v.x, v.y)).unzip();
    for _ in 0..10 {
        let mut phi: Vec<Vec2> = (0..mesh.num_nodes())
            .map(|_| Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for &i in &sigma {
            phi[i] = Vec2::ZERO;
        }
        let (px, py): (Vec<f64>, Vec<f64>) = phi.iter().map(|v| (v.x, v.y)).unzip();
        let inner = k.bilinear(&tx, &px) + k.bilinear(&ty, &py);
        let phi_field = NodalVectorField::new(&mesh, phi.clone()).unwrap();
        let boundary = directional_derivative(&mesh, &kernel, &phi_field).unwrap();
        let scale = field.h1_norm * h1_norm_sq(&mesh, &phi).sqrt();
        assert!((inner + boundary).abs() <= 1e-8 * scale, "{inner} {boundary}");
    }
    let dj = directional_derivative(&mesh, &kernel, &field.theta).unwrap();
    assert!((dj + field.h1_norm_sq).abs() <= 1e-8 * field.h1_norm_sq);
}

#[test]
fn directional_derivative_properties() {
    let mesh = annulus(0.5, 0.06);
    let values: Vec<f64> = mesh.boundary_points(BoundaryLabel::Gamma).iter().map(|p| p.x - 2.0 * p.y).collect();
    let kernel = BoundaryKernel::new(&mesh, values).unwrap();
    let zero = NodalVectorField::zeros(&mesh);
    assert_eq!(directional_derivative(&mesh, &kernel, &zero).unwrap(), 0.0);

    // θ = −G n at Γ nodes.
    let normals = mesh.boundary_normals(BoundaryLabel::Gamma);
    let mut theta = vec![Vec2::ZERO; mesh.num_nodes()];
    for ((&i, n), g) in mesh.boundary_loop(BoundaryLabel::Gamma).iter().zip(&normals).zip(kernel.values()) {
        theta[i] = *n * -g;
    }
    let theta = NodalVectorField::new(&mesh, theta).unwrap();
    assert!(directional_derivative(&mesh, &kernel, &theta).unwrap() <= 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let base = directional_derivative(&mesh, &kernel, &theta).unwrap();
    for _ in 0..5 {
        let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let scaled = directional_derivative(&mesh, &kernel.scaled(a), &theta.scaled(b)).unwrap();
        assert!((scaled - a * b * base).abs() <= 1e-12 * (a * b * base).abs().max(1.0));
    }
}

#[test]
fn step_size_arithmetic() {
    let mesh = annulus(0.5, 0.1);
    let field = DescentField::with_norm_sq(&mesh, 0.04);
    assert_eq!(step_size(0.5, 0.02, &field, StepRule::Squared).unwrap(), 0.25);
    assert_eq!(step_size(0.5, 0.0, &field, StepRule::Squared).unwrap(), 0.0);
    assert_eq!(step_size(0.5, 0.02, &field, StepRule::Plain).unwrap(), 0.5 * 0.02 / field.h1_norm);
    assert!(matches!(
        step_size(0.5, 0.02, &DescentField::zeros(&mesh), StepRule::Squared),
        Err(shape_recover::Error::ZeroDescentField)
    ));
    assert_eq!("plain".parse::<StepRule>().unwrap(), StepRule::Plain);
    assert!("sqrt".parse::<StepRule>().is_err());
}

fn fd_problem_data(mesh: &AnnularMesh) -> CauchyData {
    data_on(mesh, |x| 0.3 + 0.2 * x.x, |x| x.x.exp())
}

#[test]
fn finite_difference_check_refines() {
    let coeff = swirl_coefficients();
    let objectives = [
        FdObjective::DirichletTracking,
        FdObjective::NeumannTracking,
        FdObjective::Admm { v: Arc::new(|x| 0.5 + 0.3 * x.x), lambda: Arc::new(|x| 0.1 * x.y), beta: 0.5 },
    ];
    for (k, objective) in objectives.into_iter().enumerate() {
        let mut errors = Vec::new();
        for (h, t) in [(0.06, 2e-4), (0.03, 1e-4), (0.015, 5e-5)] {
            let mesh = annulus(0.5, h);
            let data = fd_problem_data(&mesh);
            let problem =
                GradientProblem { mesh: &mesh, coeff: &coeff, data: &data, objective: objective.clone(), eta: 0.0 };
            let field = problem.descent_field().unwrap();
            let field = field.scaled(1.0 / field.max_norm());
            errors.push(verify_gradient_fd(&problem, &field, t).unwrap().relative_error);
        }
        assert!(errors[1] < 0.05, "{errors:?}");
        if k == 1 {
            // J_N reaches the forward-difference truncation floor at the finest level.
            assert!(errors[0] > errors[1].max(errors[2]), "{errors:?}");
        } else {
            assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
        }
    }
}

#[test]
fn finite_difference_check_of_zero_field() {
    let mesh = annulus(0.5, 0.08);
    let coeff = swirl_coefficients();
    let data = fd_problem_data(&mesh);
    let problem = GradientProblem {
        mesh: &mesh,
        coeff: &coeff,
        data: &data,
        objective: FdObjective::DirichletTracking,
        eta: 0.0,
    };
    let check = verify_gradient_fd(&problem, &DescentField::zeros(&mesh), 1e-4).unwrap();
    assert_eq!(check, GradientCheck { directional: 0.0, finite_difference: 0.0, relative_error: 0.0 });
}

#[test]
fn perimeter_gradient_matches_polygon_length() {
    let mesh = offset_annulus(0.1, -0.05, 0.35, 0.04);
    let coeff = swirl_coefficients();
    // Zero data keep the state and the tracking term identically zero.
    let data = data_on(&mesh, |_| 0.0, |_| 0.0);
    let problem = GradientProblem {
        mesh: &mesh,
        coeff: &coeff,
        data: &data,
        objective: FdObjective::DirichletTracking,
        eta: 0.003,
    };
    let field = problem.descent_field().unwrap();
    let field = field.scaled(1.0 / field.max_norm());
    let check = verify_gradient_fd(&problem, &field, 1e-4).unwrap();
    assert!(check.directional < 0.0 && check.relative_error < 0.05, "{check:?}");
}

#[test]
fn perimeter_flow_shrinks_convex_inclusion() {
    let mut mesh = offset_annulus(0.1, 0.0, 0.35, 0.05);
    let mut last = mesh.boundary_curve(BoundaryLabel::Gamma).perimeter();
    for _ in 0..5 {
        let kernel = BoundaryKernel::zeros(&mesh).with_perimeter(&mesh, 0.003).unwrap();
        let field = sobolev_extend(&mesh, &kernel).unwrap();
        let field = field.scaled(1.0 / field.max_norm());
        mesh = mesh.deform(field.theta.values(), 0.01).unwrap();
        let now = mesh.boundary_curve(BoundaryLabel::Gamma).perimeter();
        assert!(now < last, "{now} >= {last}");
        last = now;
    }
}

#[test]
fn exact_inclusion_has_small_kernel() {
    let h = 0.05;
    let coeff = swirl_coefficients();
    let g: shape_recover::fem::ScalarFn = shape_recover::experiment::registry::flux("g_exp_x1").unwrap();
    let exact = shape_recover::ParametricShape::circle(0.2, 0.0, 0.3);
    let outer = shape_recover::ParametricShape::circle(0.0, 0.0, 1.0).sample(500, BoundaryLabel::Sigma).unwrap();
    let truth = offset_annulus(0.2, 0.0, 0.3, h);
    let data = synthesize_data(
        &Synthesis { exact: &exact, inner_points: 700, outer: &outer, coeff: &coeff, g: &g, h_fine: h / 3.0 },
        &truth,
        h,
    )
    .unwrap();
    let kernel_on =
        |mesh: &AnnularMesh| evaluate(mesh, &coeff, &data, &Objective::DirichletTracking, 0.0).unwrap().kernel;
    let at_truth = kernel_on(&truth).max_abs();
    let displaced = kernel_on(&offset_annulus(0.1, 0.0, 0.3, h)).max_abs();
    assert!(at_truth <= 0.1 * displaced, "{at_truth} vs {displaced}");
}
