//! Threshold Nash equilibria for two-player resource extraction games on
//! one-dimensional diffusions.
//!
//! Two players extract from a common reserve `X` that follows
//! `dX = mu(X) dt + sigma(X) dW` until absorption at zero. Strategies are
//! 5-tuples of a classical extraction rate, local-time pushes at skew
//! points, and a jump map on a jump set; rewards discount a state-dependent
//! profit rate integrated against each player's control. When the drift
//! outgrows the discount rate, symmetric threshold equilibria exist: no
//! extraction below a level `b`, a state-dependent rate above it, and one
//! skew point per upward jump of the profit rate. This crate constructs
//! those equilibria numerically, checks the verification conditions, and
//! attacks them with Monte Carlo deviation tests.
//!
//! ## Examples
//!
//! The `examples/` directory is the guided tour; each file is runnable on
//! its own:
//!
//! ```bash
//! cargo run --release --example parse_and_check        # coefficient DSL + assumptions
//! cargo run --release --example profit_rates           # piecewise g, G, skew intensities
//! cargo run --release --example fundamental_solution   # psi solver + structure report
//! cargo run --release --example threshold_equilibrium  # V_b, lambda_b, condition checks
//! cargo run --release --example profit_with_jumps      # skew points from jumps of g
//! cargo run --release --example find_threshold         # existence-threshold search
//! cargo run --release --example trivial_equilibrium    # immediate extraction, G(x)/2
//! cargo run --release --example simulate_paths         # controlled-path batches
//! cargo run --release --example monte_carlo_verification # MC vs analytic values
//! cargo run --release --example deviation_suite        # unilateral deviation tests
//! cargo run --release --example case_study             # reflection + jumps equilibrium
//! ```
//!
//! ## Command line
//!
//! A thin binary wraps the same functionality:
//!
//! ```bash
//! definetti example first --out out/first
//! definetti solve --model model.json --b 5 --out curve.csv
//! definetti verify equilibrium --model model.json --b 5 --x0 5
//! definetti verify deviations --model model.json --b 5 --x0 5
//! ```
//!
//! ## Module map
//!
//! - [`coeffs`]: drift/volatility expression DSL and model assumption checks
//! - [`profit`]: piecewise profit rates, antiderivatives, admissibility
//! - [`fundsol`]: fundamental increasing solution of the generator equation
//! - [`equilibrium`]: threshold equilibria, condition reports, case study
//! - [`strategy`]: admissible control 5-tuples and simultaneous-jump resolution
//! - [`simulate`]: Euler scheme with skew points, reflection, jumps, absorption
//! - [`payoff`]: discounted payoff integrals, Monte Carlo estimates, deviations
//! - [`cli`]: the command-line front end

// negated comparisons like `!(x > 0.0)` are kept: they reject NaN, `x <= 0.0` does not
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeffs;
pub mod equilibrium;
pub mod fundsol;
pub mod payoff;
pub mod profit;
pub mod simulate;
pub mod strategy;

pub use coeffs::{check_model, eval_expr, parse_expr, DiffusionModel, Expr};
pub use equilibrium::{
    build_case_study, build_equilibrium, find_b_lower, trivial_value, CaseStudyEquilibrium,
    ThresholdEquilibrium,
};
pub use fundsol::{solve_psi, FundamentalSolution};
pub use payoff::{deviation_suite, mc_estimate, path_payoff, PayoffEstimate};
pub use profit::ProfitRate;
pub use simulate::{batch_simulate, simulate_path, PathRecord, SimConfig};
pub use strategy::{resolve_jumps, ControlStrategy, SkewPoint, StateFn};
