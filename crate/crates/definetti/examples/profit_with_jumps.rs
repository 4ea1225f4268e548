//! Equilibria for discontinuous profit rates: skew points appear at the
//! upward jumps of `g` above the threshold.
//!
//! ```bash
//! cargo run --release --example profit_with_jumps
//! ```

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::equilibrium::build_equilibrium;
use definetti::fundsol::solve_psi;
use definetti::profit::ProfitRate;
use std::sync::Arc;

fn main() {
    // step profit rate on the linear-drift model
    let model = Arc::new(
        DiffusionModel::new(
            0.08,
            parse_expr("0.25*x").unwrap(),
            parse_expr("2").unwrap(),
        )
        .unwrap(),
    );
    let fs = Arc::new(solve_psi(&model, 50.0, 1e-3).unwrap());
    let step = Arc::new(ProfitRate::step(10.0, 0.5, 0.5).unwrap());

    println!("step rate (jump at 10), equilibria for several thresholds:");
    for b in [5.0, 10.0, 15.0] {
        let eq = build_equilibrium(
            Arc::clone(&model),
            Arc::clone(&step),
            Arc::clone(&fs),
            b,
            false,
        )
        .unwrap();
        let skew: Vec<String> = eq
            .skew_list()
            .iter()
            .map(|s| format!("({}, {:.4})", s.x, s.c))
            .collect();
        println!(
            "  b = {b:>4}: V({b}) = {:.4}, skew points [{}]",
            eq.value(b),
            skew.join(", ")
        );
    }
    println!("  (the skew point at 10 carries intensity 1/3 and disappears once b >= 10)");

    // richer rate: two jumps and a smooth transition piece
    let model2 = Arc::new(
        DiffusionModel::new(
            0.1,
            parse_expr("0.11*x + 0.001").unwrap(),
            parse_expr("2*(1+x)/(2+x)").unwrap(),
        )
        .unwrap(),
    );
    let g = Arc::new(
        ProfitRate::new(
            vec![
                (0.0, parse_expr("1/17").unwrap()),
                (1.0, parse_expr("1/6").unwrap()),
                (3.0, parse_expr("1/6 + (x^2 - 6*x + 9)/24").unwrap()),
                (5.0, parse_expr("1").unwrap()),
            ],
            vec![],
        )
        .unwrap(),
    );
    let fs2 = Arc::new(solve_psi(&model2, 50.0, 1e-3).unwrap());
    let eq = build_equilibrium(model2, Arc::clone(&g), fs2, 0.0, false).unwrap();

    println!("\npiecewise rate at b = 0 (value function equals G):");
    for s in eq.skew_list() {
        println!("  skew point at {} with intensity {:.6}", s.x, s.c);
    }
    println!("  rate on the constant pieces is affine:");
    for x in [0.5, 2.0] {
        println!("    lambda({x}) = {:.10}", eq.rate(x));
    }
    println!("    (0.01x + 0.001 below the first jump, 0.01x + 1117/17000 after it)");
    println!("  rate vanishes at the jump points:");
    for x in [1.0, 5.0] {
        println!("    lambda({x}) = {}", eq.rate(x));
    }
    let rep = eq.check_conditions();
    println!(
        "  conditions: {}",
        if rep.verdict { "pass" } else { "FAIL" }
    );
}
