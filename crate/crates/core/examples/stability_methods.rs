//! Classifies solutions on both sides of the MEMS fold with the
//! disconjugacy test and eigenvalue shooting, and prints the bisection trace
//! of one eigenvalue computation.
//!
//! Usage: `cargo run --release --example stability_methods [n]`

use mems_lab::gelfand::shoot_radius;
use mems_lab::radial::SolverOptions;
use mems_lab::stability::{disconjugacy_test, linearized_potential, principal_eigenvalue_traced};
use mems_lab::NonlinearitySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let f = NonlinearitySpec::mems();
    let opts = SolverOptions::default();

    println!("{:>6} {:>14} {:>14} {:>12} {:>12}", "m", "lambda", "mu1", "disconj.", "eigenvalue");
    for m in [0.1, 0.3, 0.4, 0.44, 0.45, 0.5, 0.7, 0.9] {
        let sol = shoot_radius(n, &f, m, &opts)?;
        let q = linearized_potential(&f, sol.lambda);
        let disconjugacy = disconjugacy_test(&sol.profile, &q, &opts)?;
        let (eigen, _) = principal_eigenvalue_traced(&sol.profile, &q, &opts)?;
        println!(
            "{m:>6} {:>14.10} {:>14.6e} {:>12} {:>12}",
            sol.lambda,
            eigen.mu1.unwrap_or(f64::NAN),
            format!("{:?}", disconjugacy.verdict),
            format!("{:?}", eigen.verdict)
        );
    }

    let sol = shoot_radius(n, &f, 0.3, &opts)?;
    let q = linearized_potential(&f, sol.lambda);
    let (_, trace) = principal_eigenvalue_traced(&sol.profile, &q, &opts)?;
    println!("\nbisection at m = 0.3 ({} evaluations):", trace.len());
    for step in trace.iter().take(12) {
        match step.first_zero {
            Some(z) => println!("  mu = {:>14.8}  first zero at r = {z:.8}", step.mu),
            None => println!("  mu = {:>14.8}  no zero in (0, 1]", step.mu),
        }
    }
    Ok(())
}
