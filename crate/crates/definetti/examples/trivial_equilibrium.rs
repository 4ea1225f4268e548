//! The trivial equilibrium: both players extract everything immediately,
//! the state absorbs at once, and each collects half the antiderivative.
//!
//! ```bash
//! cargo run --release --example trivial_equilibrium
//! ```

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::equilibrium::trivial_value;
use definetti::payoff::{path_payoff, PLAYER_ONE, PLAYER_TWO};
use definetti::profit::ProfitRate;
use definetti::simulate::{simulate_path, SimConfig};
use definetti::strategy::{resolve_jumps, ControlStrategy};

fn main() {
    let both = ControlStrategy::trivial();
    let res = resolve_jumps(5.0, &both, &both).unwrap();
    println!(
        "jump resolution from x = 5: attempts ({}, {}), capped total {}, absorbed at {}",
        res.attempts[0], res.attempts[1], res.capped_total, res.x_after
    );

    let model = DiffusionModel::new(
        0.08,
        parse_expr("0.25*x").unwrap(),
        parse_expr("2").unwrap(),
    )
    .unwrap();
    let cfg = SimConfig {
        n_paths: 1,
        t_max: 1.0,
        ..SimConfig::default()
    };
    let rec = simulate_path(&model, &both, &both, 5.0, &cfg, 0).unwrap();
    println!("absorption time: {:?}", rec.tau);

    let one = ProfitRate::constant(1.0);
    println!(
        "constant profit rate: payoffs ({}, {}) = x/2 each",
        path_payoff(&rec, &one, model.r, PLAYER_ONE),
        path_payoff(&rec, &one, model.r, PLAYER_TWO),
    );
    println!("  trivial_value(6) = {}", trivial_value(&one, 6.0));

    let step = ProfitRate::step(10.0, 0.5, 0.5).unwrap();
    let rec14 = simulate_path(&model, &both, &both, 14.0, &cfg, 0).unwrap();
    println!(
        "step profit rate from x = 14: payoffs ({}, {}) = G(14)/2 each",
        path_payoff(&rec14, &step, model.r, PLAYER_ONE),
        path_payoff(&rec14, &step, model.r, PLAYER_TWO),
    );

    // a lone extractor keeps the whole increment
    let rec_lone = simulate_path(&model, &both, &ControlStrategy::idle(), 5.0, &cfg, 0).unwrap();
    println!(
        "lone extractor: payoffs ({}, {})",
        path_payoff(&rec_lone, &one, model.r, PLAYER_ONE),
        path_payoff(&rec_lone, &one, model.r, PLAYER_TWO),
    );
}
