//! Estimates `γ = liminf f f''/f'^2` at the blow-up level for several
//! exponents and compares with the exact `(p + 1)/p`.
//!
//! Usage: `cargo run --release --example crandall_rabinowitz`

use mems_lab::nonlinearity::crandall_rabinowitz_estimate;
use mems_lab::NonlinearitySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>18} {:>18} {:>10}", "p", "estimate", "exact", "gamma > 1");
    for p in [0.1, 0.5, 1.0, 2.0, 3.0, 10.0] {
        let f = NonlinearitySpec::power(1.0, p)?;
        let estimate = crandall_rabinowitz_estimate(&f);
        println!("{p:>6} {estimate:>18.12} {:>18.12} {:>10}", f.gamma_exact(), estimate > 1.0);
    }
    Ok(())
}
