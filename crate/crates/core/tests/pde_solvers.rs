mod common;

use std::f64::consts::{LN_2, PI};

use common::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shape_recover::fem::{assemble_a, assemble_h1_scalar, CoefficientSet, NodalScalarField};
use shape_recover::pde::*;
use shape_recover::{BoundaryLabel, ParametricShape, Vec2};

fn sigma_trace(mesh: &shape_recover::AnnularMesh, u: &NodalScalarField) -> Vec<f64> {
    u.restrict(mesh.boundary_loop(BoundaryLabel::Sigma))
}

fn radial(p: Vec2) -> f64 {
    (p.norm() / 0.5).ln() / LN_2
}

fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn zero_flux_gives_zero_state() {
    let mesh = annulus(0.5, 0.1);
    let g = vec![0.0; mesh.boundary_loop(BoundaryLabel::Sigma).len()];
    let u = solve_state_neumann(&mesh, &swirl_coefficients(), &g).unwrap();
    assert!(u.values().iter().all(|&v| v == 0.0));
    let d = solve_state_dirichlet(&mesh, &swirl_coefficients(), &g).unwrap();
    assert!(d.values().iter().all(|&v| v == 0.0));
}

#[test]
fn radial_states_converge_at_second_order() {
    let mut neumann_err = Vec::new();
    let mut dirichlet_err = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let mesh = annulus(0.5, h);
        let exact: Vec<f64> = mesh.nodes().iter().map(|&p| radial(p)).collect();
        let g = on_sigma(&mesh, |_| 1.0 / LN_2);
        let u = solve_state_neumann(&mesh, &laplace(), &g).unwrap();
        let e: Vec<f64> = u.values().iter().zip(&exact).map(|(a, b)| a - b).collect();
        neumann_err.push(l2_norm(&mesh, &e));
        let f = on_sigma(&mesh, |_| 1.0);
        let d = solve_state_dirichlet(&mesh, &laplace(), &f).unwrap();
        let e: Vec<f64> = d.values().iter().zip(&exact).map(|(a, b)| a - b).collect();
        dirichlet_err.push(l2_norm(&mesh, &e));
    }
    for orders in [observed_orders(&neumann_err), observed_orders(&dirichlet_err)] {
        assert!(orders.iter().all(|&p| p >= 1.8), "orders {orders:?}");
    }
}

#[test]
fn neumann_state_is_bounded_and_linear() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let max_u = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_g = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max_u.is_finite() && max_u < 10.0 * max_g, "{max_u}");
    let g2: Vec<f64> = g.iter().map(|v| 2.0 * v).collect();
    let u2 = solve_state_neumann(&mesh, &coeff, &g2).unwrap();
    for (a, b) in u.values().iter().zip(u2.values()) {
        assert!((2.0 * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

#[test]
fn galerkin_orthogonality() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let a = assemble_a(&mesh, &coeff).unwrap();
    let load = shape_recover::fem::assemble_boundary_load_nodal(&mesh, BoundaryLabel::Sigma, &g);
    let au = a.matvec(u.values());
    let scale = load.iter().map(|v| v * v).sum::<f64>().sqrt();
    let gamma = mesh.boundary_loop(BoundaryLabel::Gamma);
    let res: f64 =
        (0..mesh.num_nodes()).filter(|i| !gamma.contains(i)).map(|i| (au[i] - load[i]).powi(2)).sum::<f64>().sqrt();
    assert!(res <= 1e-10 * scale, "{res}");
}

#[test]
fn dirichlet_state_on_neumann_trace_matches() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let f = sigma_trace(&mesh, &u);
    let d = solve_state_dirichlet(&mesh, &coeff, &f).unwrap();
    for (a, b) in u.values().iter().zip(d.values()) {
        assert!((a - b).abs() < 1e-10, "{a} {b}");
    }
    for (&i, fv) in mesh.boundary_loop(BoundaryLabel::Sigma).iter().zip(&f) {
        assert_eq!(d.values()[i], *fv);
    }
    assert!(mesh.boundary_loop(BoundaryLabel::Gamma).iter().all(|&i| d.values()[i] == 0.0));
}

#[test]
fn neumann_adjoint_examples() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let matched = sigma_trace(&mesh, &u);
    let p = solve_adjoint_pn(&mesh, &coeff, &u, &matched).unwrap();
    assert!(p.values().iter().all(|&v| v == 0.0));

    let f: Vec<f64> = matched.iter().map(|v| 0.8 * v).collect();
    let p1 = solve_adjoint_pn(&mesh, &coeff, &u, &f).unwrap();
    let f2: Vec<f64> = matched.iter().zip(&f).map(|(m, f)| m - 2.0 * (m - f)).collect();
    let p2 = solve_adjoint_pn(&mesh, &coeff, &u, &f2).unwrap();
    for (a, b) in p1.values().iter().zip(p2.values()) {
        assert!((2.0 * a - b).abs() < 1e-12);
    }

    // Self-adjoint case: same as a Neumann state with g = u − f.
    let lap = laplace();
    let u = solve_state_neumann(&mesh, &lap, &g).unwrap();
    let f = on_sigma(&mesh, |x| 0.3 * x.y);
    let p = solve_adjoint_pn(&mesh, &lap, &u, &f).unwrap();
    let load: Vec<f64> = sigma_trace(&mesh, &u).iter().zip(&f).map(|(u, f)| u - f).collect();
    let q = solve_state_neumann(&mesh, &lap, &load).unwrap();
    for (a, b) in p.values().iter().zip(q.values()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn dirichlet_adjoint_examples() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let f = on_sigma(&mesh, |x| 1.0 + 0.2 * x.x);
    let u = solve_state_dirichlet(&mesh, &coeff, &f).unwrap();
    let flux = dirichlet_state_flux(&mesh, &coeff, &u).unwrap();
    let p = solve_adjoint_pd(&mesh, &coeff, &u, &flux).unwrap();
    assert!(p.values().iter().all(|&v| v == 0.0));

    // b = 0 and unit boundary value: discrete maximum principle.
    let lap = laplace();
    let u = solve_state_dirichlet(&mesh, &lap, &f).unwrap();
    let flux = dirichlet_state_flux(&mesh, &lap, &u).unwrap();
    let g: Vec<f64> = flux.iter().map(|q| q - 1.0).collect();
    let p = solve_adjoint_pd(&mesh, &lap, &u, &g).unwrap();
    assert!(p.values().iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));

    // Affine response: shifting g by c shifts the boundary value by −c.
    let g_shift: Vec<f64> = g.iter().map(|v| v + 0.5).collect();
    let q = solve_adjoint_pd(&mesh, &lap, &u, &g_shift).unwrap();
    for (a, b) in p.values().iter().zip(q.values()) {
        assert!((b - 0.5 * a).abs() < 1e-12, "{a} {b}");
    }
}

#[test]
fn admm_adjoint_examples() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let zero = NodalScalarField::zeros(&mesh);
    let matched = sigma_trace(&mesh, &u);
    let w = solve_admm_adjoint_w(&mesh, &coeff, &u, &matched, &u, &zero, 0.3).unwrap();
    assert!(w.values().iter().all(|&v| v.abs() < 1e-14));

    let f: Vec<f64> = matched.iter().map(|v| 0.9 * v).collect();
    let v = NodalScalarField::from_fn(&mesh, |x| x.y).unwrap();
    let w = solve_admm_adjoint_w(&mesh, &coeff, &u, &f, &v, &zero, 0.0).unwrap();
    let p = solve_adjoint_pn(&mesh, &coeff, &u, &f).unwrap();
    for (a, b) in w.values().iter().zip(p.values()) {
        assert!((a + b).abs() < 1e-12);
    }

    // Superposition of boundary- and volume-driven parts.
    let lambda = NodalScalarField::from_fn(&mesh, |x| 0.1 * x.x).unwrap();
    let full = solve_admm_adjoint_w(&mesh, &coeff, &u, &f, &v, &lambda, 0.2).unwrap();
    let doubled = solve_admm_adjoint_w(&mesh, &coeff, &u, &f, &v, &lambda.scaled(2.0), 0.4).unwrap();
    let boundary_only = w;
    for ((a, b), c) in full.values().iter().zip(doubled.values()).zip(boundary_only.values()) {
        let vol = a - c;
        assert!((b - (c + 2.0 * vol)).abs() < 1e-10);
    }
}

#[test]
fn discrete_adjoint_identity() {
    let mesh = annulus(0.5, 0.06);
    let a = assemble_a(&mesh, &swirl_coefficients()).unwrap();
    let at = a.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let u: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs: f64 = a.matvec(&u).iter().zip(&p).map(|(x, y)| x * y).sum();
        let rhs: f64 = at.matvec(&p).iter().zip(&u).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{lhs} {rhs}");
    }
}

#[test]
fn coercivity_witness() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let margin = coeff.require_coercive(&mesh).unwrap();
    let a = assemble_a(&mesh, &coeff).unwrap();
    let h1 = assemble_h1_scalar(&mesh);
    let mass = shape_recover::fem::assemble_mass(&mesh);
    let gamma = mesh.boundary_loop(BoundaryLabel::Gamma).to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let mut phi: Vec<f64> = (0..mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for &i in &gamma {
            phi[i] = 0.0;
        }
        let seminorm = h1.quadratic_form(&phi) - mass.quadratic_form(&phi);
        assert!(a.quadratic_form(&phi) >= 0.5 * margin * seminorm);
    }
}

#[test]
fn coercivity_violation_refuses_to_solve() {
    let mesh = annulus(0.5, 0.1);
    let coeff = CoefficientSet::constant(0.1, Vec2::new(1.0, 0.0));
    let g = on_sigma(&mesh, |_| 1.0);
    assert!(matches!(solve_state_neumann(&mesh, &coeff, &g), Err(shape_recover::Error::CoercivityViolated { .. })));
}

#[test]
fn superposition_of_all_solvers() {
    let mesh = annulus(0.5, 0.08);
    let coeff = swirl_coefficients();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ns = mesh.boundary_loop(BoundaryLabel::Sigma).len();
    let mut rand_vec = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let (g1, g2) = (rand_vec(ns), rand_vec(ns));
    let (a, b) = (0.7, -1.3);
    let combo: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| a * x + b * y).collect();
    let close = |x: &NodalScalarField, y: &NodalScalarField, z: &NodalScalarField| {
        let scale = z.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((p, q), r) in x.values().iter().zip(y.values()).zip(z.values()) {
            assert!((a * p + b * q - r).abs() <= 1e-9 * scale);
        }
    };
    let un = |g: &[f64]| solve_state_neumann(&mesh, &coeff, g).unwrap();
    close(&un(&g1), &un(&g2), &un(&combo));
    let ud = |f: &[f64]| solve_state_dirichlet(&mesh, &coeff, f).unwrap();
    close(&ud(&g1), &ud(&g2), &ud(&combo));
    // Adjoints are linear in their loads once the state is fixed at zero.
    let zero = NodalScalarField::zeros(&mesh);
    let pn = |f: &[f64]| solve_adjoint_pn(&mesh, &coeff, &zero, f).unwrap();
    close(&pn(&g1), &pn(&g2), &pn(&combo));
    let pd = |g: &[f64]| solve_adjoint_pd(&mesh, &coeff, &zero, g).unwrap();
    close(&pd(&g1), &pd(&g2), &pd(&combo));
    let w = |f: &[f64]| solve_admm_adjoint_w(&mesh, &coeff, &zero, f, &zero, &zero, 0.5).unwrap();
    close(&w(&g1), &w(&g2), &w(&combo));
}

#[test]
fn dirichlet_max_principle_without_advection() {
    let mesh = annulus(0.4, 0.06);
    let f = on_sigma(&mesh, |x| (3.0 * x.x).sin() - 0.2);
    let u = solve_state_dirichlet(&mesh, &laplace(), &f).unwrap();
    let lo = f.iter().copied().fold(0.0, f64::min);
    let hi = f.iter().copied().fold(0.0, f64::max);
    assert!(u.values().iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
}

fn fine_circle_mesh(n: usize) -> shape_recover::AnnularMesh {
    let outer = ParametricShape::circle(0.0, 0.0, 1.0).sample(n, BoundaryLabel::Sigma).unwrap();
    let inner = ParametricShape::circle(0.0, 0.0, 0.5).sample(60, BoundaryLabel::Gamma).unwrap();
    shape_recover::mesh::triangulate_annulus(&outer, &inner, 0.1).unwrap()
}

#[test]
fn dirichlet_tracking_cost_examples() {
    let mesh = fine_circle_mesh(3000);
    let u = NodalScalarField::from_fn(&mesh, |x| x.x).unwrap();
    let f = sigma_trace(&mesh, &u);
    assert_eq!(cost_jd(&mesh, &u, &f).unwrap().value, 0.0);
    let shifted: Vec<f64> = f.iter().map(|v| v - 1.0).collect();
    let c = cost_jd(&mesh, &u, &shifted).unwrap();
    assert!((c.value - PI).abs() < 1e-6, "{}", c.value);
    assert!(c.misfit >= 0.0 && c.value == c.misfit + c.penalty + c.multiplier + c.perimeter);
}

#[test]
fn neumann_tracking_cost_examples() {
    let mesh = fine_circle_mesh(3000);
    let coeff = laplace();
    let u = NodalScalarField::from_fn(&mesh, |x| x.x).unwrap();
    let flux = dirichlet_state_flux(&mesh, &coeff, &u).unwrap();
    assert_eq!(cost_jn(&mesh, &coeff, &u, &flux).unwrap().value, 0.0);
    let g: Vec<f64> = flux.iter().map(|q| q + 1.0).collect();
    let c = cost_jn(&mesh, &coeff, &u, &g).unwrap();
    assert!((c.value - PI).abs() < 1e-6, "{}", c.value);
    assert!(c.misfit >= 0.0);
}

#[test]
fn admm_cost_examples() {
    let mesh = annulus(0.5, 0.06);
    let coeff = swirl_coefficients();
    let g = on_sigma(&mesh, |x| x.x.exp());
    let u = solve_state_neumann(&mesh, &coeff, &g).unwrap();
    let f = on_sigma(&mesh, |x| 0.1 * x.y);
    let jd = cost_jd(&mesh, &u, &f).unwrap();
    let zero = NodalScalarField::zeros(&mesh);
    let y = cost_admm_y(&mesh, &u, &f, &u, &zero, 0.5).unwrap();
    assert_eq!(y.value, jd.value);

    let c = 0.3;
    let v = NodalScalarField::new(&mesh, u.values().iter().map(|x| x - c).collect()).unwrap();
    let beta = 0.5;
    let y = cost_admm_y(&mesh, &u, &f, &v, &zero, beta).unwrap();
    let expected = jd.value + 0.5 * beta * c * c * mesh.total_area();
    assert!((y.value - expected).abs() < 1e-12);

    // Multiplier term changes sign with λ.
    let lambda = NodalScalarField::from_fn(&mesh, |_| -1.0).unwrap();
    let y = cost_admm_y(&mesh, &u, &f, &v, &lambda, beta).unwrap();
    assert!(y.multiplier < 0.0);
    assert!((y.value - (y.misfit + y.penalty + y.multiplier)).abs() < 1e-15);
}

#[test]
fn exact_shape_identifies_truth() {
    let h = 0.05;
    let coeff = swirl_coefficients();
    let g = registry_flux("g_exp_x1");
    let exact = ParametricShape::circle(0.2, 0.0, 0.3);
    let outer_fine = ParametricShape::circle(0.0, 0.0, 1.0).sample(500, BoundaryLabel::Sigma).unwrap();
    let truth_mesh = offset_annulus(0.2, 0.0, 0.3, h);
    let data = synthesize_data(
        &Synthesis { exact: &exact, inner_points: 700, outer: &outer_fine, coeff: &coeff, g: &g, h_fine: h / 3.0 },
        &truth_mesh,
        h,
    )
    .unwrap();
    let cost_on = |mesh: &shape_recover::AnnularMesh| {
        let u = solve_state_neumann(mesh, &coeff, &data.g).unwrap();
        cost_jd(mesh, &u, &data.f).unwrap().value
    };
    let at_truth = cost_on(&truth_mesh);
    let displaced = offset_annulus(0.0, 0.0, 0.3, h);
    assert_eq!(displaced.boundary_points(BoundaryLabel::Sigma), truth_mesh.boundary_points(BoundaryLabel::Sigma));
    let off = cost_on(&displaced);
    assert!(at_truth <= 1e-4 * off, "{at_truth} vs {off}");
}

fn registry_flux(id: &str) -> shape_recover::fem::ScalarFn {
    shape_recover::experiment::registry::flux(id).unwrap()
}

#[test]
fn synthesis_is_refinement_consistent() {
    let h = 0.06;
    let coeff = swirl_coefficients();
    let g = registry_flux("g_exp_x1");
    let exact = ParametricShape::circle(0.0, 0.0, 0.5);
    let outer = ParametricShape::circle(0.0, 0.0, 1.0).sample(500, BoundaryLabel::Sigma).unwrap();
    let mesh = annulus(0.5, h);
    let spec = |h_fine| Synthesis { exact: &exact, inner_points: 700, outer: &outer, coeff: &coeff, g: &g, h_fine };
    let coarse = synthesize_data(&spec(h / 3.0), &mesh, h).unwrap();
    let fine = synthesize_data(&spec(h / 6.0), &mesh, h).unwrap();
    let scale = fine.f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in coarse.f.iter().zip(&fine.f) {
        assert!((a - b).abs() < 0.01 * scale, "{a} {b}");
    }
    assert_eq!(coarse.len(), mesh.boundary_loop(BoundaryLabel::Sigma).len());
    assert!(matches!(coarse.source, DataSource::Synthetic { .. }));

    let zero: shape_recover::fem::ScalarFn = std::sync::Arc::new(|_| 0.0);
    let none = synthesize_data(
        &Synthesis { exact: &exact, inner_points: 200, outer: &outer, coeff: &coeff, g: &zero, h_fine: h / 3.0 },
        &mesh,
        h,
    )
    .unwrap();
    assert!(none.f.iter().all(|&v| v == 0.0));

    let too_coarse = synthesize_data(&spec(h / 2.0), &mesh, h);
    assert!(matches!(too_coarse, Err(shape_recover::Error::InvalidRange { .. })));
}

#[test]
fn noise_scaling() {
    let data = CauchyData {
        arc_param: vec![0.0, 0.25, 0.5, 0.75],
        f: vec![1.0, -2.0, 0.5, 3.0],
        g: vec![0.1, 0.2, 0.3, 0.4],
        noise_level: 0.0,
        noise_mode: NoiseMode::ScaleF,
        source: DataSource::Loaded,
    };
    assert_eq!(apply_noise(&data, 0.0, NoiseMode::ScaleF).unwrap(), data);
    let noisy = apply_noise(&data, 0.3, NoiseMode::ScaleF).unwrap();
    for (a, b) in noisy.f.iter().zip(&data.f) {
        assert_eq!(*a, 1.3 * b);
    }
    assert_eq!(noisy.g, data.g);
    assert_eq!(noisy.noise_level, 0.3);
    let twice = apply_noise(&apply_noise(&data, 0.1, NoiseMode::ScaleF).unwrap(), 0.2, NoiseMode::ScaleF).unwrap();
    for (a, b) in twice.f.iter().zip(&data.f) {
        assert!((a - 1.1 * 1.2 * b).abs() < 1e-15);
    }
    assert!((twice.noise_level - (1.1 * 1.2 - 1.0)).abs() < 1e-15);
    let g_noisy = apply_noise(&data, 0.1, NoiseMode::ScaleG).unwrap();
    assert_eq!(g_noisy.f, data.f);
}

#[test]
fn cauchy_csv_round_trip() {
    let data = CauchyData {
        arc_param: vec![0.0, 1.0 / 3.0, 2.0 / 3.0],
        f: vec![1e-17, -2.5, PI],
        g: vec![0.1, 0.2, 0.3],
        noise_level: 0.1,
        noise_mode: NoiseMode::ScaleF,
        source: DataSource::Synthetic { forward_nodes: 1234, h_fine: 0.01 },
    };
    let back = CauchyData::from_csv(&data.to_csv(), &data.sidecar()).unwrap();
    assert_eq!(back, data);
    assert!(CauchyData::from_csv("a,b,c\n", "").is_err());
    assert!(CauchyData::from_csv(&data.to_csv(), "bogus=1\n").is_err());
}
