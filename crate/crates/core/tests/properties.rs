//! Property tests for invariants that hold for every admissible input.

use mems_lab::cli::Span;
use mems_lab::gelfand::{default_grid, shoot_radius};
use mems_lab::io::{format_float, parse_float};
use mems_lab::radial::{RadialFunction, SolverOptions};
use mems_lab::stability::{hardy_certificate, hardy_constant, Verdict};
use mems_lab::theorems::{check_energy_bound, check_flux_monotonicity, check_identity, check_profile_residual, Subject};
use mems_lab::{Nonlinearity, NonlinearitySpec};
use proptest::prelude::*;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn solved_profiles_satisfy_the_structural_checks(n in 2usize..=8, p in 0.3f64..4.0, m in 0.01f64..0.95) {
        let f = NonlinearitySpec::power(1.0, p).unwrap();
        let sol = shoot_radius(n, &f, m, &opts()).unwrap();
        let subject = Subject::new(&sol.profile, &f, sol.lambda);
        prop_assert!(check_identity(&subject).unwrap().pass);
        prop_assert!(check_energy_bound(&subject).unwrap().pass);
        // the residual differentiates the dense output, whose error scales
        // with rtol; at the default 1e-10 it nears 1e-7 for p ~ 4, m ~ 0.9
        let tight = SolverOptions { rtol: 1e-12, atol: 1e-14, ..opts() };
        let fine = shoot_radius(n, &f, m, &tight).unwrap();
        prop_assert!(check_profile_residual(&Subject::new(&fine.profile, &f, fine.lambda)).unwrap().pass);
        for check in check_flux_monotonicity(&subject) {
            prop_assert!(check.pass, "{} margin {}", check.name, check.margin);
        }
        let nodes = sol.profile.node_list();
        prop_assert!(nodes.windows(2).all(|w| w[1].u <= w[0].u && w[1].r > w[0].r));
        prop_assert!(nodes.iter().all(|node| node.ur <= 0.0 && node.u < 1.0));
        prop_assert!(nodes.last().unwrap().u.abs() <= 1e-10);
    }

    #[test]
    fn amplitude_scales_lambda_inversely(a in 0.1f64..10.0, n in 2usize..=6, m in 0.05f64..0.9) {
        let base = shoot_radius(n, &NonlinearitySpec::mems(), m, &opts()).unwrap();
        let scaled = shoot_radius(n, &NonlinearitySpec::power(a, 2.0).unwrap(), m, &opts()).unwrap();
        prop_assert!((scaled.lambda * a / base.lambda - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn rescaled_profile_is_the_free_solution(n in 2usize..=5, m in 0.05f64..0.9, t in 0.0f64..1.0) {
        // u(r) on the unit ball solves -Δu = λ f(u), so its energy at r = t
        // rescales the free solution's value at R t
        let f = NonlinearitySpec::mems();
        let sol = shoot_radius(n, &f, m, &opts()).unwrap();
        let (u, ur) = sol.profile.eval(t.max(1e-3)).unwrap();
        prop_assert!(u >= -1e-12 && u <= m + 1e-12);
        prop_assert!(ur <= 0.0);
        prop_assert!(f.f(u) >= 1.0);
    }

    #[test]
    fn grids_are_increasing_and_bounded(points in 4usize..600, lo in 1e-6f64..0.49, hi in 0.51f64..0.999_999) {
        let grid = default_grid(points, lo, hi).unwrap();
        prop_assert_eq!(grid.len(), points);
        prop_assert!(grid.windows(2).all(|w| w[1] > w[0]));
        prop_assert!((grid[0] - lo).abs() <= 1e-12 && (grid[points - 1] - hi).abs() <= 1e-12);
    }

    #[test]
    fn floats_round_trip_bit_exactly(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        let back = parse_float(&format_float(x)).unwrap();
        prop_assert!(back.to_bits() == x.to_bits() || (x.is_nan() && back.is_nan()));
    }

    #[test]
    fn spans_round_trip(lo in 0usize..50, len in 0usize..50) {
        let span = Span { lo, hi: lo + len };
        let back: Span<usize> = span.to_string().parse().unwrap();
        prop_assert_eq!(back, span);
    }

    #[test]
    fn hardy_verdict_follows_the_constant(n in 2usize..=20, kappa in 0.0f64..100.0) {
        let h = hardy_constant(n);
        let verdict = hardy_certificate(kappa, n).verdict;
        let expected = if (h - kappa).abs() <= 1e-12 {
            Verdict::Marginal
        } else if kappa < h {
            Verdict::Stable
        } else {
            Verdict::Unstable
        };
        prop_assert_eq!(verdict, expected);
    }

    #[test]
    fn specs_round_trip_through_their_labels(a in 0.01f64..100.0, p in 0.01f64..10.0) {
        let spec = NonlinearitySpec::power(a, p).unwrap();
        let back: NonlinearitySpec = spec.label().parse().unwrap();
        prop_assert_eq!(back, spec);
    }
}
