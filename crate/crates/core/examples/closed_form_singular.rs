//! Singular closed-form solutions: ODE residuals, the energy identity from
//! formulas, and the Hardy stability threshold across dimensions.
//!
//! Usage: `cargo run --release --example closed_form_singular`

use mems_lab::closed_forms::{bc_singular_solution, bc_stable_p_max, cone_solution, mems_singular_solution, residual};
use mems_lab::radial::weighted_gradient_integral;
use mems_lab::NonlinearitySpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let radii: Vec<f64> = (1..=100).map(|k| k as f64 / 100.0).collect();

    println!("{:>3} {:>10} {:>10} {:>10} {:>10} {:>12}", "n", "H_n", "cone", "MEMS", "lambda_s", "MEMS resid.");
    for n in 2..=12 {
        let cone = cone_solution(n)?;
        let mems = mems_singular_solution(n)?;
        let lambda_s = mems.lambda_s.unwrap_or(f64::NAN);
        let res = residual(&mems, &NonlinearitySpec::mems(), lambda_s, &radii)?;
        println!(
            "{n:>3} {:>10.4} {:>10} {:>10} {lambda_s:>10.6} {:>12.2e}",
            cone.hardy_constant(),
            format!("{:?}", cone.hardy_report().verdict),
            format!("{:?}", mems.hardy_report().verdict),
            res.max_abs
        );
    }

    let bc = bc_singular_solution(4, 0.5)?;
    let ur1 = bc.ur(1.0);
    let exact = bc.weighted_integral_exact().unwrap_or(f64::NAN);
    let numeric = weighted_gradient_integral(&bc).value();
    println!("\nBruera-Cabre n = 4, p = 1/2:");
    println!("  F(1) = {:.15}", bc.primitive_at_one().unwrap_or(f64::NAN));
    println!("  3 I + u_r(1)^2/2 = {:.15}", 3.0 * exact + 0.5 * ur1 * ur1);
    println!("  I exact = {exact:.15}, quadrature = {numeric:.15}");

    let cone7 = cone_solution(7)?;
    println!(
        "cone n = 7: F(1) finite: {}, weighted integral divergent: {}",
        cone7.primitive_at_one().is_some(),
        weighted_gradient_integral(&cone7).is_divergent()
    );
    for n in 3..=10 {
        println!("largest stable Bruera-Cabre exponent for n = {n}: {:.6}", bc_stable_p_max(n)?);
    }
    Ok(())
}
