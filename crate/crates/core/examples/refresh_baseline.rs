//! Recomputes the recorded sandwich constants `M_n = max λF(m)/u_r(1)^2`
//! from the standard MEMS and `p = 1` sweeps and prints them as JSON.
//!
//! Usage: `cargo run --release --example refresh_baseline > crates/core/baselines/sandwich_constants.json`

use mems_lab::gelfand::SweepOptions;
use mems_lab::theorems::{measure_sandwich_constants, sandwich_baseline};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fresh = measure_sandwich_constants(&SweepOptions::default())?;
    let shipped = sandwich_baseline();
    for (n, value) in &fresh.constants {
        match shipped.constant(*n) {
            Some(old) => eprintln!("n = {n}: {value:.12} (shipped {old:.12}, ratio {:.6})", value / old),
            None => eprintln!("n = {n}: {value:.12} (not in shipped baseline)"),
        }
    }
    mems_lab::io::write_json(std::io::stdout().lock(), &fresh)?;
    Ok(())
}
