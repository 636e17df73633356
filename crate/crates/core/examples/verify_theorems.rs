//! Runs a verification suite and prints every failing check.
//!
//! Usage: `cargo run --release --example verify_theorems [suite]`
//! where `suite` is one of `profiles`, `closed-forms`, `scan`, `sweeps`, `all`.

use mems_lab::theorems::{run_suite, Suite, SuiteSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let suite: Suite = std::env::args().nth(1).as_deref().unwrap_or("all").parse()?;
    let report = run_suite(suite, &SuiteSettings::default())?;
    let s = report.summary;
    println!(
        "suite {suite}: {} checks, {} passed, {} failed, {} skipped",
        s.checks, s.passed, s.failed, s.skipped
    );
    println!(
        "negative controls: {} run, {} wrongly passing",
        s.negative_controls, s.negative_controls_passing
    );
    for c in report.failures() {
        println!("FAIL {} n={} [{}] lhs={:e} rhs={:e} margin={:e}", c.name, c.n, c.params, c.lhs, c.rhs, c.margin);
    }
    for c in report.negative_controls.iter().filter(|c| c.pass) {
        println!("CONTROL PASSED {} [{}]", c.name, c.params);
    }
    if !report.accepted() {
        std::process::exit(1);
    }
    Ok(())
}
