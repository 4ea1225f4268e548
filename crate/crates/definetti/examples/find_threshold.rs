//! Search for the smallest threshold from which the verification
//! conditions hold on a grid of candidates.
//!
//! ```bash
//! cargo run --release --example find_threshold
//! ```

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::equilibrium::find_b_lower;
use definetti::fundsol::solve_psi;
use definetti::profit::ProfitRate;
use std::sync::Arc;

fn main() {
    let b_grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.5).collect();

    // strong drift growth: every threshold works, so the search returns 0
    let model = Arc::new(
        DiffusionModel::new(
            0.08,
            parse_expr("0.25*x").unwrap(),
            parse_expr("2").unwrap(),
        )
        .unwrap(),
    );
    let fs = Arc::new(solve_psi(&model, 50.0, 1e-3).unwrap());
    let one = Arc::new(ProfitRate::constant(1.0));
    let b = find_b_lower(&model, &one, &fs, &b_grid).unwrap();
    println!("linear drift 0.25x, r = 0.08: b_lower = {b:?}");

    // weaker drift growth: small thresholds fail, the suffix passes
    let model2 = Arc::new(
        DiffusionModel::new(
            0.08,
            parse_expr("0.1*x^2/(1+0.35*x)").unwrap(),
            parse_expr("2").unwrap(),
        )
        .unwrap(),
    );
    let fs2 = Arc::new(solve_psi(&model2, 50.0, 1e-3).unwrap());
    let b2 = find_b_lower(&model2, &one, &fs2, &b_grid).unwrap();
    println!("saturating drift, r = 0.08:   b_lower = {b2:?}");

    // flat drift never passes
    let flat = Arc::new(
        DiffusionModel::new(1.0, parse_expr("0").unwrap(), parse_expr("2^0.5").unwrap()).unwrap(),
    );
    let fs3 = Arc::new(solve_psi(&flat, 50.0, 1e-3).unwrap());
    let b3 = find_b_lower(&flat, &one, &fs3, &b_grid).unwrap();
    println!("flat drift, r = 1:            b_lower = {b3:?}");
}
