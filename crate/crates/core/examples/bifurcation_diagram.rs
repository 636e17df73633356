//! Traces `λ(m)` for the MEMS nonlinearity and reports the fold.
//!
//! Usage: `cargo run --release --example bifurcation_diagram [n]`

use std::time::Instant;

use mems_lab::closed_forms::mems_singular_solution;
use mems_lab::gelfand::{refine_fold, standard_grid, sweep, SweepOptions};
use mems_lab::NonlinearitySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let f = NonlinearitySpec::mems();
    let opts = SweepOptions::default();
    let start = Instant::now();
    let diagram = sweep(n, &f, &standard_grid(), &opts)?;
    let elapsed = start.elapsed();

    let lambda_s = mems_singular_solution(n)?.lambda_s.unwrap_or(f64::NAN);
    let stable = diagram.records.iter().filter(|r| r.stable).count();
    println!("n = {n}, {} records ({stable} stable) in {elapsed:.2?}", diagram.records.len());
    println!("lambda* ~ {:.10}, lambda_s = {lambda_s:.10}", diagram.lambda_star_estimate);
    println!("failed m: {:?}", diagram.diagnostics.failed_m);

    match diagram.m_fold {
        Some(m_fold) => {
            let i = diagram.records.iter().position(|r| r.m == m_fold).unwrap_or(0);
            let lo = diagram.records[i.saturating_sub(1)].m;
            let hi = diagram.records[(i + 1).min(diagram.records.len() - 1)].m;
            let fold = refine_fold(n, &f, lo, hi, &opts.solver)?;
            println!(
                "fold at m = {:.10}, lambda = {:.12}, mu1 = {:.3e}",
                fold.m, fold.lambda, fold.mu1
            );
        }
        None => println!("no interior fold"),
    }
    for r in diagram.records.iter().step_by(40) {
        println!("{:>12.6e} {:>14.10} {:>12.6} {:>10.3e} {}", r.m, r.lambda, r.ur1, r.mu1, r.stable);
    }
    Ok(())
}
