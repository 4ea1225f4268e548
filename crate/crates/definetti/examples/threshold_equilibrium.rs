//! Build threshold equilibria for the constant profit rate and check the
//! verification conditions.
//!
//! ```bash
//! cargo run --release --example threshold_equilibrium
//! ```

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::equilibrium::{build_equilibrium, trivial_value};
use definetti::fundsol::solve_psi;
use definetti::profit::ProfitRate;
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

    println!("value V_b(x) for a family of thresholds (increasing in x and b):");
    print!("{:>6}", "x");
    let thresholds = [0.0, 5.0, 10.0];
    for b in thresholds {
        print!("{:>12}", format!("b = {b}"));
    }
    println!();
    let eqs: Vec<_> = thresholds
        .iter()
        .map(|&b| {
            Arc::new(
                build_equilibrium(
                    Arc::clone(&model),
                    Arc::clone(&profit),
                    Arc::clone(&fs),
                    b,
                    false,
                )
                .unwrap(),
            )
        })
        .collect();
    for x in [0.0, 2.0, 5.0, 8.0, 12.0] {
        print!("{x:>6}");
        for eq in &eqs {
            print!("{:>12.4}", eq.value(x));
        }
        println!();
    }

    println!("\nextraction rate for b = 5 (zero below the threshold):");
    let eq = &eqs[1];
    for x in [3.0, 5.0, 6.0, 10.0, 20.0] {
        println!("  lambda({x:>4}) = {:.4}", eq.rate(x));
    }

    println!("\ncondition reports:");
    for (b, eq) in thresholds.iter().zip(&eqs) {
        let rep = eq.check_conditions();
        println!(
            "  b = {b}: slope margin {:+.2e}, rate margin {:+.2e}, residual {:.2e} -> {}",
            rep.cond_value_slope,
            rep.cond_rate_nonneg,
            rep.generator_residual,
            if rep.verdict { "pass" } else { "FAIL" }
        );
    }

    println!(
        "\ntrivial immediate-extraction value at x = 6: {}",
        trivial_value(&profit, 6.0)
    );
}
