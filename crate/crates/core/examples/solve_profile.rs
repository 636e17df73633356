//! Shoots one profile, checks the energy identity on it and writes the nodes
//! as CSV.
//!
//! Usage: `cargo run --release --example solve_profile [n] [m] [out.csv]`

use std::fs::File;

use mems_lab::gelfand::shoot_radius;
use mems_lab::io::write_profile_csv;
use mems_lab::radial::{weighted_gradient_integral, SolverOptions};
use mems_lab::{Nonlinearity, NonlinearitySpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let m: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.7);
    let out = args.next();

    let f = NonlinearitySpec::mems();
    let sol = shoot_radius(n, &f, m, &SolverOptions::default())?;
    let nodes = sol.profile.node_list();
    let ur1 = nodes.last().map_or(f64::NAN, |node| node.ur);
    println!("n = {n}, m = {m}: R = {:.12}, lambda = {:.12}, u_r(1) = {ur1:.12}", sol.radius, sol.lambda);

    // λ F(m) = (n - 1) ∫ u_r²/t dt + u_r(1)²/2
    let integral = weighted_gradient_integral(&sol.profile).value();
    let lhs = sol.lambda * f.primitive(m);
    let rhs = (n as f64 - 1.0) * integral + 0.5 * ur1 * ur1;
    println!("lambda F(m) = {lhs:.14}");
    println!("(n-1) I + u_r(1)^2/2 = {rhs:.14} (relative gap {:.2e})", (lhs - rhs).abs() / lhs);

    if let Some(path) = out {
        write_profile_csv(File::create(&path)?, nodes)?;
        println!("wrote {} nodes to {path}", nodes.len());
    }
    Ok(())
}
