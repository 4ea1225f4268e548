//! Solve the fundamental increasing solution of the generator equation and
//! inspect its structure.
//!
//! ```bash
//! cargo run --release --example fundamental_solution
//! ```

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::fundsol::solve_psi;

fn main() {
    // constant coefficients: psi(x) = sinh(x) when mu = 0, sigma^2 = 2, r = 1
    let constant =
        DiffusionModel::new(1.0, parse_expr("0").unwrap(), parse_expr("2^0.5").unwrap()).unwrap();
    let fs = solve_psi(&constant, 10.0, 1e-3).unwrap();
    println!("constant-coefficient model (closed form sinh):");
    for x in [0.5, 1.0, 2.0, 5.0] {
        let got = fs.psi_ratio(x, 0.0).unwrap();
        println!("  psi({x}) = {got:.8}  sinh({x}) = {:.8}", x.sinh());
    }
    println!(
        "  psi(1)/psi'(1) = {:.8}  tanh(1) = {:.8}",
        fs.psi_ratio(1.0, 1.0).unwrap(),
        1.0f64.tanh()
    );

    // linear drift above the discount rate: psi is concave and psi' decays
    let model = DiffusionModel::new(
        0.08,
        parse_expr("0.25*x").unwrap(),
        parse_expr("2").unwrap(),
    )
    .unwrap();
    let fs = solve_psi(&model, 50.0, 1e-3).unwrap();
    println!("\nlinear-drift model:");
    println!("  psi(5)/psi'(5) = {:.6}", fs.psi_over_dpsi(5.0).unwrap());
    println!(
        "  spot-check deviation from step halving: {:.2e}",
        fs.richardson_max_dev()
    );
    let report = fs.structure_report(0.0);
    println!(
        "  concave on [0, {}), sign change location: {:?}",
        report.concave_on, report.b2
    );
    println!("  tail of ln psi':");
    for (x, lp) in &report.psi_prime_tail {
        println!("    x = {x:5.2}  ln psi' = {lp:8.3}");
    }
}
