//! Pointwise and integral vector-calculus identities behind the boundary
//! form of the shape gradient, checked on analytic fields with forward-mode
//! automatic differentiation and polar Gauss–Legendre quadrature.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar type the analytic fields are generic over.
pub trait Real:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn sqrt(self) -> Self;
}

impl Real for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Forward-mode dual number carrying the gradient in (x, y). Nesting gives
/// higher derivatives.
#[derive(Clone, Copy, Debug)]
pub struct Dual<T> {
    pub re: T,
    pub eps: [T; 2],
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { re: self.re + o.re, eps: [self.eps[0] + o.eps[0], self.eps[1] + o.eps[1]] }
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { re: self.re - o.re, eps: [self.eps[0] - o.eps[0], self.eps[1] - o.eps[1]] }
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual {
            re: self.re * o.re,
            eps: [self.eps[0] * o.re + self.re * o.eps[0], self.eps[1] * o.re + self.re * o.eps[1]],
        }
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Dual { re: q, eps: [(self.eps[0] - q * o.eps[0]) / o.re, (self.eps[1] - q * o.eps[1]) / o.re] }
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { re: -self.re, eps: [-self.eps[0], -self.eps[1]] }
    }
}

impl<T: Real> Real for Dual<T> {
    fn constant(c: f64) -> Self {
        Dual { re: T::constant(c), eps: [T::constant(0.0); 2] }
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        let half = T::constant(0.5) / s;
        Dual { re: s, eps: [self.eps[0] * half, self.eps[1] * half] }
    }
}

fn k<T: Real>(c: f64) -> T {
    T::constant(c)
}

pub trait ScalarField {
    fn eval<T: Real>(&self, x: T, y: T) -> T;
}

pub trait VectorField {
    fn eval<T: Real>(&self, x: T, y: T) -> [T; 2];
}

fn seeds<T: Real>(x: T, y: T) -> (Dual<T>, Dual<T>) {
    let (zero, one) = (k(0.0), k(1.0));
    (Dual { re: x, eps: [one, zero] }, Dual { re: y, eps: [zero, one] })
}

pub fn gradient<F: ScalarField, T: Real>(f: &F, x: T, y: T) -> [T; 2] {
    let (dx, dy) = seeds(x, y);
    f.eval(dx, dy).eps
}

/// `J[i][j] = ∂_j f_i`.
pub fn jacobian<F: VectorField, T: Real>(f: &F, x: T, y: T) -> [[T; 2]; 2] {
    let (dx, dy) = seeds(x, y);
    let v = f.eval(dx, dy);
    [v[0].eps, v[1].eps]
}

/// The gradient of a scalar field, as a vector field.
pub struct Gradient<'a, F>(pub &'a F);

impl<F: ScalarField> VectorField for Gradient<'_, F> {
    fn eval<T: Real>(&self, x: T, y: T) -> [T; 2] {
        gradient(self.0, x, y)
    }
}

/// In-plane curl of the out-of-plane field `c e₃`: `(∂_y c, −∂_x c)`.
fn curl_of_normal_component<F: ScalarField, T: Real>(c: &F, x: T, y: T) -> [T; 2] {
    let g = gradient(c, x, y);
    [g[1], -g[0]]
}

/// Third component of `a × b` for in-plane fields.
struct Cross<'a, A, B>(&'a A, &'a B);

impl<A: VectorField, B: VectorField> ScalarField for Cross<'_, A, B> {
    fn eval<T: Real>(&self, x: T, y: T) -> T {
        let (a, b) = (self.0.eval(x, y), self.1.eval(x, y));
        a[0] * b[1] - a[1] * b[0]
    }
}

/// `σ ∇u`.
struct Flux<'a, S, U>(&'a S, &'a U);

impl<S: ScalarField, U: ScalarField> VectorField for Flux<'_, S, U> {
    fn eval<T: Real>(&self, x: T, y: T) -> [T; 2] {
        let s = self.0.eval(x, y);
        let g = gradient(self.1, x, y);
        [s * g[0], s * g[1]]
    }
}

fn dot<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

fn matvec<T: Real>(m: [[T; 2]; 2], v: [T; 2]) -> [T; 2] {
    [dot(m[0], v), dot(m[1], v)]
}

/// Residual of `curl(φ×ψ) = φ div ψ − ψ div φ + (ψ·∇)φ − (φ·∇)ψ` at a point.
pub fn curl_cross_residual<P: VectorField, Q: VectorField>(phi: &P, psi: &Q, x: f64, y: f64) -> f64 {
    let lhs = curl_of_normal_component(&Cross(phi, psi), x, y);
    let (a, b) = (phi.eval(x, y), psi.eval(x, y));
    let (ja, jb) = (jacobian(phi, x, y), jacobian(psi, x, y));
    let (div_a, div_b) = (ja[0][0] + ja[1][1], jb[0][0] + jb[1][1]);
    let (a_b, b_a) = (matvec(ja, b), matvec(jb, a));
    (0..2).map(|i| (lhs[i] - (a[i] * div_b - b[i] * div_a + a_b[i] - b_a[i])).abs()).fold(0.0, f64::max)
}

/// Residual of `∇(σ∇u)θ·∇v = σ∇²uθ·∇v + (∇σ·θ)(∇u·∇v)` at a point.
pub fn flux_jacobian_residual<S: ScalarField, U: ScalarField, Th: VectorField, V: ScalarField>(
    sigma: &S,
    u: &U,
    theta: &Th,
    v: &V,
    x: f64,
    y: f64,
) -> f64 {
    let th = theta.eval(x, y);
    let gv = gradient(v, x, y);
    let lhs = dot(matvec(jacobian(&Flux(sigma, u), x, y), th), gv);
    let hessian = jacobian(&Gradient(u), x, y);
    let rhs =
        sigma.eval(x, y) * dot(matvec(hessian, th), gv) + dot(gradient(sigma, x, y), th) * dot(gradient(u, x, y), gv);
    (lhs - rhs).abs()
}

/// Integrand `curl(σ∇u × θ)·∇v`.
pub fn curl_flux_integrand<S: ScalarField, U: ScalarField, Th: VectorField, V: ScalarField>(
    sigma: &S,
    u: &U,
    theta: &Th,
    v: &V,
    x: f64,
    y: f64,
) -> f64 {
    let c = Cross(&Flux(sigma, u), theta);
    dot(curl_of_normal_component(&c, x, y), gradient(v, x, y))
}

/// Integrand `(b·∇p)(θ·∇u) − (b·∇u)(θ·∇p) − curl(b×θ)·∇u p`.
pub fn advection_integrand<B: VectorField, Th: VectorField, U: ScalarField, P: ScalarField>(
    b: &B,
    theta: &Th,
    u: &U,
    p: &P,
    x: f64,
    y: f64,
) -> f64 {
    let (bv, th) = (b.eval(x, y), theta.eval(x, y));
    let (gu, gp) = (gradient(u, x, y), gradient(p, x, y));
    let curl = curl_of_normal_component(&Cross(b, theta), x, y);
    dot(bv, gp) * dot(th, gu) - dot(bv, gu) * dot(th, gp) - dot(curl, gu) * p.eval(x, y)
}

/// Gauss–Legendre nodes and weights on [−1, 1], `order ≥ 1`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order as f64;
    (0..order)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut slope = 1.0;
            for _ in 0..100 {
                // P_{order} and P_{order−1} by the three-term recurrence.
                let (mut prev, mut cur) = (1.0, x);
                for m in 2..=order {
                    let m = m as f64;
                    (prev, cur) = (cur, ((2.0 * m - 1.0) * x * cur - (m - 1.0) * prev) / m);
                }
                slope = n * (x * cur - prev) / (x * x - 1.0);
                let step = cur / slope;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * slope * slope))
        })
        .collect()
}

/// Quadrature setup for the annulus `inner_radius ≤ r ≤ outer_radius`.
#[derive(Clone, Debug)]
pub struct QuadratureConfig {
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Gauss–Legendre points in r.
    pub radial_order: usize,
    /// Uniform points in angle (trapezoidal rule).
    pub angular_points: usize,
    /// Sample points for the pointwise identities.
    pub sample_points: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            inner_radius: 0.5,
            outer_radius: 1.0,
            radial_order: 10,
            angular_points: 64,
            sample_points: 100,
        }
    }
}

impl QuadratureConfig {
    /// `∫ f dx` over the annulus.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let (a, b) = (self.inner_radius, self.outer_radius);
        let rule = gauss_legendre(self.radial_order);
        let dphi = 2.0 * PI / self.angular_points as f64;
        let mut total = 0.0;
        for &(s, w) in &rule {
            let r = 0.5 * (a + b) + 0.5 * (b - a) * s;
            let ring: f64 = (0..self.angular_points)
                .map(|j| {
                    let phi = j as f64 * dphi;
                    f(r * phi.cos(), r * phi.sin())
                })
                .sum();
            total += 0.5 * (b - a) * w * r * ring * dphi;
        }
        total
    }

    /// Deterministic low-discrepancy points in the annulus (Halton, bases 2 and 3).
    pub fn sample_points(&self) -> Vec<(f64, f64)> {
        let (a, b) = (self.inner_radius, self.outer_radius);
        (1..=self.sample_points)
            .map(|i| {
                let r = (a * a + halton(i, 2) * (b * b - a * a)).sqrt();
                let phi = 2.0 * PI * halton(i, 3);
                (r * phi.cos(), r * phi.sin())
            })
            .collect()
    }
}

fn halton(mut i: usize, base: usize) -> f64 {
    let (mut f, mut out) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        out += f * (i % base) as f64;
        i /= base;
    }
    out
}

macro_rules! scalar_field {
    ($name:ident, |$x:ident, $y:ident| $body:expr) => {
        pub struct $name;
        impl ScalarField for $name {
            fn eval<T: Real>(&self, $x: T, $y: T) -> T {
                $body
            }
        }
    };
}

macro_rules! vector_field {
    ($name:ident, |$x:ident, $y:ident| $body:expr) => {
        pub struct $name;
        impl VectorField for $name {
            fn eval<T: Real>(&self, $x: T, $y: T) -> [T; 2] {
                $body
            }
        }
    };
}

/// Analytic fields of the default battery. Inner radius 0.5, outer 1.
pub mod fields {
    use super::*;

    fn r2<T: Real>(x: T, y: T) -> T {
        x * x + y * y
    }

    scalar_field!(Conductivity, |x, y| k::<T>(2.0) + x * y);
    scalar_field!(PolyState, |x, y| x * x * x - k::<T>(0.5) * x * y * y + k::<T>(0.3) * y + k(0.2));
    scalar_field!(PolyTest, |x, y| x * x * y - k::<T>(0.4) * y * y * y + x);
    vector_field!(PolyTheta, |x, y| [x * y - k(0.2), x * x - k::<T>(0.5) * y * y + k(0.1)]);
    vector_field!(PolyPhi, |x, y| [x * x * y + k(0.3), x - y * y * y]);
    vector_field!(PolyPsi, |x, y| [k::<T>(0.5) * x * y * y, x * x * x - k::<T>(0.7) * y + k(1.0)]);

    // Vanishes on the outer circle.
    scalar_field!(TestZeroOuter, |x, y| (k::<T>(1.0) - r2(x, y)) * (x + k::<T>(0.5) * y + k(0.3)));
    // Vanishes on the inner circle.
    vector_field!(ThetaZeroInner, |x, y| {
        let s = r2(x, y) - k(0.25);
        [s * (k::<T>(0.7) + y), s * (x - k(0.4))]
    });
    scalar_field!(StateZeroInner, |x, y| (r2(x, y) - k(0.25)) * (k::<T>(1.0) + x - k::<T>(0.3) * x * y));
    scalar_field!(AdjointZeroInner, |x, y| (r2(x, y) - k(0.25)) * (x - k::<T>(0.3) * y + k(0.5)));
    vector_field!(ThetaZeroOuter, |x, y| {
        let s = k::<T>(1.0) - r2(x, y);
        [s * (y + k(0.2)), s * (k::<T>(0.6) - x)]
    });
    // (1 + ½ sin φ, 1 + ½ cos φ) with φ the polar angle.
    vector_field!(Swirl, |x, y| {
        let r = r2(x, y).sqrt();
        [k::<T>(1.0) + k::<T>(0.5) * y / r, k::<T>(1.0) + k::<T>(0.5) * x / r]
    });
}

/// One checked identity.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub identity: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual < self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    /// `identity,residual,tolerance,pass` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity,residual,tolerance,pass\n");
        for c in &self.checks {
            let _ = writeln!(out, "{},{:e},{:e},{}", c.identity, c.residual, c.tolerance, c.passed());
        }
        out
    }
}

pub const POINTWISE_TOLERANCE: f64 = 1e-12;
pub const INTEGRAL_TOLERANCE: f64 = 1e-8;

/// Runs the default battery.
pub fn verify_identities(config: &QuadratureConfig) -> IdentityReport {
    use fields::*;
    let points = config.sample_points();
    let pointwise = |f: &dyn Fn(f64, f64) -> f64| points.iter().map(|&(x, y)| f(x, y)).fold(0.0, f64::max);
    let checks = vec![
        IdentityCheck {
            identity: "curl_cross_product".into(),
            residual: pointwise(&|x, y| curl_cross_residual(&PolyPhi, &PolyPsi, x, y)),
            tolerance: POINTWISE_TOLERANCE,
        },
        IdentityCheck {
            identity: "flux_jacobian_product_rule".into(),
            residual: pointwise(&|x, y| flux_jacobian_residual(&Conductivity, &PolyState, &PolyTheta, &PolyTest, x, y)),
            tolerance: POINTWISE_TOLERANCE,
        },
        IdentityCheck {
            identity: "curl_flux_term_vanishes".into(),
            residual: config
                .integrate(|x, y| curl_flux_integrand(&Conductivity, &PolyState, &ThetaZeroInner, &TestZeroOuter, x, y))
                .abs(),
            tolerance: INTEGRAL_TOLERANCE,
        },
        IdentityCheck {
            identity: "curl_flux_term_vanishes_adjoint_pair".into(),
            residual: config
                .integrate(|x, y| {
                    curl_flux_integrand(&Conductivity, &StateZeroInner, &ThetaZeroOuter, &AdjointZeroInner, x, y)
                })
                .abs(),
            tolerance: INTEGRAL_TOLERANCE,
        },
        IdentityCheck {
            identity: "advection_term_vanishes".into(),
            residual: config
                .integrate(|x, y| advection_integrand(&Swirl, &ThetaZeroOuter, &PolyState, &AdjointZeroInner, x, y))
                .abs(),
            tolerance: INTEGRAL_TOLERANCE,
        },
    ];
    IdentityReport { checks }
}
