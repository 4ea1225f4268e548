//! Parse coefficient expressions and check the model-level assumptions.
//!
//! ```bash
//! cargo run --release --example parse_and_check
//! ```

use definetti::coeffs::{check_model, parse_expr, DiffusionModel};

fn main() {
    // linear drift dominating the discount rate, constant volatility
    let model = DiffusionModel::new(
        0.08,
        parse_expr("0.25*x").unwrap(),
        parse_expr("2").unwrap(),
    )
    .unwrap();

    let mu_text = model.mu.to_text();
    println!("mu(x) = {mu_text}, mu(4) = {}", model.mu.eval(4.0).unwrap());
    println!("sigma(x) = {}", model.sigma.to_text());

    let report = check_model(&model, 50.0, 1e-3).unwrap();
    println!("\nassumption report:");
    println!(
        "  Lipschitz estimate for mu:    {:.6}",
        report.lipschitz_mu_bound_estimate
    );
    println!(
        "  Lipschitz estimate for sigma: {:.6}",
        report.lipschitz_sigma_bound_estimate
    );
    println!("  sigma > 0 on the grid:        {}", report.sigma_positive);
    match (report.assumption2_kappa, report.assumption2_c) {
        (Some(kappa), Some(c)) => {
            println!("  drift growth: mu(x) - (r + {c})x increasing from kappa = {kappa}")
        }
        _ => println!("  drift growth condition not found on the grid"),
    }

    // a model that fails: flat drift cannot outgrow the discount rate
    let flat =
        DiffusionModel::new(0.08, parse_expr("0").unwrap(), parse_expr("1").unwrap()).unwrap();
    let flat_report = check_model(&flat, 50.0, 1e-3).unwrap();
    println!(
        "\nflat drift: growth condition present = {}",
        flat_report.assumption2_kappa.is_some()
    );

    // parse errors carry byte offsets
    let err = parse_expr("0.25*x +").unwrap_err();
    println!("\nparse error demo: {err}");
}
