//! Reflection-with-jumps equilibrium: each player pushes with local-time
//! intensity 1/2 at a barrier (aggregate reflection) and jumps halfway down
//! to it whenever the state starts above.
//!
//! ```bash
//! cargo run --release --example case_study
//! ```

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::equilibrium::build_case_study;
use definetti::fundsol::solve_psi;
use definetti::payoff::mc_estimate;
use definetti::simulate::{simulate_path, SimConfig};
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
    let fs = Arc::new(solve_psi(&model, 50.0, 1e-3).unwrap());
    let cs = build_case_study(Arc::clone(&model), fs, 10.0, 0.25).unwrap();

    println!(
        "barrier ell = {}, low-region rate w = {}, prefactor (1+w)/4 = {}",
        cs.ell(),
        cs.w(),
        cs.prefactor()
    );
    println!("value function (flat above the barrier):");
    for x in [0.0, 4.0, 8.0, 10.0, 14.0, 20.0] {
        println!("  V({x:>4}) = {:.4}", cs.value(x));
    }

    let (s1, s2) = cs.strategy_pair();

    // starting above the barrier: both players jump the state to it at t = 0
    let cfg_one = SimConfig {
        dt: 1e-3,
        t_max: 1.0,
        n_paths: 1,
        ..SimConfig::default()
    };
    let rec = simulate_path(&model, &s1, &s2, 14.0, &cfg_one, 0).unwrap();
    let init = rec.initial_resolution.unwrap();
    println!(
        "\nfrom x0 = 14: initial jump attempts ({}, {}), state after = {}",
        init.attempts[0], init.attempts[1], init.x_after
    );

    // Monte Carlo recovery with the overshoot local-time estimator
    let cfg = SimConfig {
        dt: 1e-3,
        t_max: 100.0,
        n_paths: 3_000,
        seed: 42,
        local_time_epsilon_factor: 2.0,
        overshoot_estimator: true,
    };
    println!("\nMonte Carlo recovery ({} paths):", cfg.n_paths);
    for x0 in [6.0, 10.0, 14.0] {
        let est = mc_estimate(&model, &s1, &s2, cs.profit(), x0, &cfg, cs.value(cs.ell())).unwrap();
        let v = cs.value(x0);
        println!(
            "  x0 = {x0:>4}: mean {:.4} vs V {:.4} ({:+.2}%), stderr {:.4}",
            est.mean,
            v,
            100.0 * (est.mean - v) / v,
            est.stderr
        );
    }
}
