//! Attack an equilibrium with the built-in deviation menu: no unilateral
//! deviation should beat the analytic value beyond Monte Carlo noise.
//!
//! ```bash
//! cargo run --release --example deviation_suite
//! ```

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::equilibrium::build_equilibrium;
use definetti::fundsol::solve_psi;
use definetti::payoff::{deviation_suite, DeviationTarget};
use definetti::profit::ProfitRate;
use definetti::simulate::SimConfig;
use std::sync::Arc;

fn main() {
    let model = Arc::new(
        DiffusionModel::new(
            0.08,
            parse_expr("0.25*x").unwrap(),
            parse_expr("2").unwrap(),
        )
        .unwrap(),
    );
    let profit = Arc::new(ProfitRate::constant(1.0));
    let fs = Arc::new(solve_psi(&model, 50.0, 1e-3).unwrap());
    let eq = Arc::new(build_equilibrium(Arc::clone(&model), profit, fs, 5.0, false).unwrap());

    let cfg = SimConfig {
        dt: 1e-3,
        t_max: 100.0,
        n_paths: 2_000,
        seed: 42,
        ..SimConfig::default()
    };
    let x0 = 5.0;
    let report = deviation_suite(&DeviationTarget::Threshold(&eq), x0, &cfg, None).unwrap();

    println!(
        "deviations against the b = 5 equilibrium from x0 = {x0} (V = {:.4}):",
        report.analytic_value
    );
    println!(
        "  self-recovery: {:.4} +- {:.4} (allowance {:.4})",
        report.equilibrium_mean, report.equilibrium_stderr, report.calibration_error
    );
    println!(
        "{:>20} {:>10} {:>9} {:>10} {:>6}",
        "deviation", "mean", "stderr", "margin", "ok"
    );
    for row in &report.rows {
        println!(
            "{:>20} {:>10.4} {:>9.4} {:>10.4} {:>6}",
            row.name,
            row.mean,
            row.stderr,
            row.margin,
            if row.verdict { "yes" } else { "NO" }
        );
    }
    println!(
        "\nall deviations dominated: {}",
        if report.all_pass { "yes" } else { "NO" }
    );
}
