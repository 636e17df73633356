//! Library results against independent reference computations: a
//! fixed-step RK4 shooter, brute-force quadrature and Bessel zeros.

mod common;

use mems_lab::closed_forms::bc_singular_solution;
use mems_lab::gelfand::shoot_radius;
use mems_lab::nonlinearity::Constant;
use mems_lab::radial::{weighted_gradient_integral, RadialFunction, SolverOptions};
use mems_lab::stability::{linearized_potential, principal_eigenvalue};
use mems_lab::NonlinearitySpec;

use common::rk4::{power_law, Problem};

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// Composite Simpson rule with `2k` panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, k: usize) -> f64 {
    let h = (b - a) / (2 * k) as f64;
    let mut sum = f(a) + f(b);
    for i in 1..2 * k {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn radius_matches_rk4_beyond_the_acceptance_grid() {
    for (n, p, m) in [(7, 2.0, 0.5), (8, 2.0, 0.9), (10, 1.0, 0.3), (3, 3.0, 0.6), (2, 0.5, 0.8), (4, 2.0, 0.95)] {
        let f = NonlinearitySpec::power(1.0, p).unwrap();
        let (g, dg) = power_law(1.0, p);
        let oracle = Problem { n, g: &g, dg: &dg }.first_zero(m, 1e-5, 100.0).unwrap();
        let radius = shoot_radius(n, &f, m, &opts()).unwrap().radius;
        assert!((radius - oracle).abs() <= 1e-8, "n={n} p={p} m={m}: {radius} vs {oracle}");
    }
}

#[test]
fn amplitude_rescales_radius_as_rk4_does() {
    let (g, dg) = power_law(3.0, 2.0);
    let oracle = Problem { n: 3, g: &g, dg: &dg }.first_zero(0.4, 1e-5, 100.0).unwrap();
    let f = NonlinearitySpec::power(3.0, 2.0).unwrap();
    let radius = shoot_radius(3, &f, 0.4, &opts()).unwrap().radius;
    assert!((radius - oracle).abs() <= 1e-8);
}

#[test]
fn weighted_integral_matches_brute_force_simpson() {
    for (n, p, m) in [(2, 2.0, 0.3), (3, 1.0, 0.7), (5, 3.0, 0.5)] {
        let f = NonlinearitySpec::power(1.0, p).unwrap();
        let sol = shoot_radius(n, &f, m, &opts()).unwrap();
        // u_r^2/t vanishes linearly at the center, so [1e-9, 1] loses nothing measurable
        let brute = simpson(|t| sol.profile.eval(t).unwrap().1.powi(2) / t, 1e-9, 1.0, 200_000);
        let value = weighted_gradient_integral(&sol.profile).value();
        assert!((value - brute).abs() <= 1e-9 * brute, "n={n} p={p} m={m}: {value} vs {brute}");
    }
}

#[test]
fn singular_weighted_integral_matches_substituted_quadrature() {
    // t = s^2 removes the t^(2 beta - 3) endpoint singularity of the integrand
    let bc = bc_singular_solution(4, 0.5).unwrap();
    let brute = simpson(|s| if s == 0.0 { 0.0 } else { 2.0 * bc.ur(s * s).powi(2) / s }, 0.0, 1.0, 200_000);
    let value = weighted_gradient_integral(&bc).value();
    let exact = bc.weighted_integral_exact().unwrap();
    assert!((value - exact).abs() <= 1e-10 * exact);
    assert!((brute - exact).abs() <= 1e-8 * exact, "{brute} vs {exact}");
}

#[test]
fn zero_potential_eigenvalues_are_squared_bessel_zeros() {
    // first zero of J_{n/2-1}
    let cases = [(2, 2.404_825_557_695_773), (3, std::f64::consts::PI), (4, 3.831_705_970_207_512), (5, 4.493_409_457_909_064)];
    for (n, j) in cases {
        let carrier = shoot_radius(n, &Constant(1.0), 0.5, &opts()).unwrap();
        let mu1 = principal_eigenvalue(&carrier.profile, &|_| 0.0, &opts()).unwrap().mu1.unwrap();
        assert!((mu1 - j * j).abs() <= 1e-6, "n={n}: {mu1} vs {}", j * j);
    }
}

#[test]
fn constant_potential_shifts_the_eigenvalue() {
    let carrier = shoot_radius(3, &Constant(1.0), 0.5, &opts()).unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    for c in [-20.0, 3.0, 9.0, 30.0] {
        let mu1 = principal_eigenvalue(&carrier.profile, &|_| c, &opts()).unwrap().mu1.unwrap();
        assert!((mu1 - (pi2 - c)).abs() <= 1e-6, "c={c}: {mu1}");
    }
}

#[test]
fn small_profiles_have_eigenvalue_near_the_dirichlet_value() {
    // lambda f'(u) = O(m) as m -> 0, so mu1 tends to j^2
    let f = NonlinearitySpec::mems();
    let sol = shoot_radius(3, &f, 1e-4, &opts()).unwrap();
    let q = linearized_potential(&f, sol.lambda);
    let mu1 = principal_eigenvalue(&sol.profile, &q, &opts()).unwrap().mu1.unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    assert!(mu1 < pi2 && pi2 - mu1 < 2.0 * sol.lambda * 2.0, "{mu1}");
}
