//! Finds the minimal-branch solution for a given `λ` below the pull-in value
//! and checks that it is stable.
//!
//! Usage: `cargo run --release --example minimal_branch [n] [lambda]`

use mems_lab::gelfand::{branch_upper_center, minimal_branch_at};
use mems_lab::radial::SolverOptions;
use mems_lab::stability::{linearized_potential, principal_eigenvalue};
use mems_lab::NonlinearitySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let lambda: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.7);
    let f = NonlinearitySpec::mems();
    let opts = SolverOptions::default();

    let m_upper = branch_upper_center(n, &f, 64, &opts)?;
    println!("minimal branch ends near m = {m_upper:.6}");
    let sol = minimal_branch_at(n, &f, lambda, m_upper, &opts)?;
    let q = linearized_potential(&f, sol.lambda);
    let report = principal_eigenvalue(&sol.profile, &q, &opts)?;
    println!(
        "lambda = {:.12}: m = {:.12}, mu1 = {:.6}, {:?}",
        sol.lambda,
        sol.profile.m(),
        report.mu1.unwrap_or(f64::NAN),
        report.verdict
    );
    Ok(())
}
