//! Piecewise profit rates: limits, antiderivatives, skew intensities and
//! threshold admissibility.
//!
//! ```bash
//! cargo run --release --example profit_rates
//! ```

use definetti::coeffs::parse_expr;
use definetti::profit::ProfitRate;

fn main() {
    // step rate: half profit below the critical mass, full above
    let step = ProfitRate::step(10.0, 0.5, 0.5).unwrap();
    println!("step rate, jump at 10:");
    println!(
        "  g(10-) = {}, g(10) = {}",
        step.g_left(10.0),
        step.g_eval(10.0)
    );
    println!(
        "  G(14) = {} (5 from the low region + 4 above)",
        step.g_integral(14.0)
    );
    println!(
        "  skew intensity c = {}",
        step.skew_intensity(10.0).unwrap()
    );

    // piecewise rate with two jumps and one smooth piece
    let g = ProfitRate::new(
        vec![
            (0.0, parse_expr("1/17").unwrap()),
            (1.0, parse_expr("1/6").unwrap()),
            (3.0, parse_expr("1/6 + (x^2 - 6*x + 9)/24").unwrap()),
            (5.0, parse_expr("1").unwrap()),
        ],
        vec![],
    )
    .unwrap();
    println!("\npiecewise rate:");
    println!(
        "  g(5-) = {:.6} (= 1/3), g(5) = {}",
        g.g_left(5.0),
        g.g_eval(5.0)
    );
    println!("  G(1) = {:.6} (= 1/17)", g.g_integral(1.0));
    println!(
        "  intensities: c(1) = {:.6} (= 11/23), c(5) = {:.6}",
        g.skew_intensity(1.0).unwrap(),
        g.skew_intensity(5.0).unwrap()
    );
    println!("  constant from y1 = {:?}", g.eventual_constancy_point());

    let report = g.check_b_admissible(0.0, 50.0);
    println!(
        "  admissible at b = 0: {} ({} jump(s) above, |g'/g| <= {:.3})",
        report.verdict,
        report.jump_points_above_b.len(),
        report.gprime_over_g_bound
    );

    // a downward jump violates admissibility
    let down = ProfitRate::new(
        vec![
            (0.0, parse_expr("1").unwrap()),
            (4.0, parse_expr("0.5").unwrap()),
        ],
        vec![],
    )
    .unwrap();
    let bad = down.check_b_admissible(0.0, 50.0);
    println!("\ndownward jump admissible: {}", bad.verdict);
    for j in &bad.jump_points_above_b {
        println!(
            "  jump at {}: delta g = {}, c = {:.4}, in range: {}",
            j.location, j.delta_g, j.intensity, j.in_range
        );
    }
}
