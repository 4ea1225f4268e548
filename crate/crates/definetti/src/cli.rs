//! Command-line front end.
//!
//! Subcommands: `solve` (value/rate curves + condition report), `check`
//! (model assumptions, admissibility, psi structure), `find-b` (existence
//! threshold search), `simulate` (batch paths + summary JSON), `verify`
//! (Monte Carlo equilibrium recovery or the deviation suite), and `example`
//! (bundled fixtures with hard-coded parameters).
//!
//! Exit codes: 0 success, 1 usage/config error, 2 verification failure.

use crate::coeffs::{check_model, DiffusionModel, ModelSpec, DEFAULT_DX, DEFAULT_X_MAX};
use crate::equilibrium::{
    build_case_study, build_equilibrium, find_b_lower, CaseStudyEquilibrium, ConditionReport,
    ThresholdEquilibrium,
};
use crate::fundsol::{solve_psi, FundamentalSolution};
use crate::payoff::{deviation_suite, mc_estimate, DeviationTarget, PayoffComponents};
use crate::profit::{ProfitRate, ProfitSpec};
use crate::simulate::{batch_simulate, simulate_path_traced, SimConfig};
use crate::strategy::{ControlStrategy, StrategySpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "definetti",
    about = "Threshold equilibria for two-player resource extraction games",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the value/rate curves for a threshold and check the conditions
    Solve(SolveArgs),
    /// Check model assumptions and profit-rate admissibility
    Check(CheckArgs),
    /// Search for the smallest threshold from which conditions hold
    FindB(FindBArgs),
    /// Simulate controlled paths and write a batch summary
    Simulate(SimulateArgs),
    /// Monte Carlo verification: equilibrium recovery or the deviation suite
    Verify(VerifyArgs),
    /// Emit a bundled example (configs, curves, reports)
    Example(ExampleArgs),
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Model JSON path ({"r":n,"mu":s,"sigma":s})
    #[arg(long)]
    model: PathBuf,
    /// Profit rate JSON path (defaults to the constant rate 1)
    #[arg(long)]
    profit: Option<PathBuf>,
    /// Grid upper bound
    #[arg(long, default_value_t = DEFAULT_X_MAX)]
    xmax: f64,
    /// Grid step
    #[arg(long, default_value_t = DEFAULT_DX)]
    dx: f64,
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Time step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Horizon truncation
    #[arg(long, default_value_t = 150.0)]
    tmax: f64,
    /// Number of Monte Carlo paths
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    /// RNG seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Use the pushed-back overshoot local-time estimator at reflecting points
    #[arg(long)]
    overshoot: bool,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            t_max: self.tmax,
            n_paths: self.paths,
            seed: self.seed,
            local_time_epsilon_factor: 2.0,
            overshoot_estimator: self.overshoot,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Threshold level
    #[arg(long)]
    b: f64,
    /// Use the left-limit variant g(b-) with skew points at b
    #[arg(long)]
    left_variant: bool,
    /// Output CSV path for the curve (x, V, dV_left, dV_right, lambda)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stdout format for the condition report
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Exit with code 2 when the condition report fails
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Threshold for the admissibility check
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FindBArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Strategy JSON for player 1, or the literal "equilibrium"
    #[arg(long)]
    strategy1: String,
    /// Strategy JSON for player 2, or the literal "equilibrium"
    #[arg(long)]
    strategy2: String,
    /// Threshold (needed when a strategy references the equilibrium)
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    left_variant: bool,
    /// Initial state
    #[arg(long, default_value_t = 5.0)]
    x0: f64,
    /// Summary JSON output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a per-step trace CSV of path 0 to this path
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VerifyKind {
    Equilibrium,
    Deviations,
}

#[derive(Args)]
struct VerifyArgs {
    /// What to verify
    #[arg(value_enum)]
    which: VerifyKind,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Threshold of the equilibrium under test
    #[arg(long, default_value_t = 5.0)]
    b: f64,
    #[arg(long)]
    left_variant: bool,
    /// Initial state
    #[arg(long, default_value_t = 5.0)]
    x0: f64,
    /// Target the reflection case study at this barrier (requires --w)
    #[arg(long)]
    ell: Option<f64>,
    /// Case-study low-region profit rate
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ExampleName {
    /// Linear drift, constant volatility, constant profit rate
    First,
    /// Step profit rate with one upward jump
    GJump,
    /// Piecewise profit rate with two jumps and a smooth piece
    GComplicated,
    /// Reflection-with-jumps case study
    CaseStudy,
}

#[derive(Args)]
struct ExampleArgs {
    #[arg(value_enum)]
    name: ExampleName,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Exit with code 2 when a bundled condition report fails
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Model(#[from] crate::coeffs::ModelError),
    #[error("{0}")]
    Profit(#[from] crate::profit::ProfitError),
    #[error("{0}")]
    Strategy(#[from] crate::strategy::StrategyError),
    #[error("{0}")]
    Solve(#[from] crate::fundsol::SolveError),
    #[error("{0}")]
    Equilibrium(#[from] crate::equilibrium::EquilibriumError),
    #[error("{0}")]
    Sim(#[from] crate::simulate::SimError),
    #[error("{0}")]
    Eval(#[from] crate::coeffs::EvalError),
    #[error("{0}")]
    Usage(String),
}

pub fn run() -> i32 {
    run_from(std::env::args())
}

/// Entry point taking explicit arguments (used by tests).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Check(args) => cmd_check(args),
        Command::FindB(args) => cmd_find_b(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Example(args) => cmd_example(args),
    }
}

fn load_model(path: &Path) -> Result<Arc<DiffusionModel>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let spec: ModelSpec = serde_json::from_str(&text)?;
    Ok(Arc::new(DiffusionModel::from_spec(&spec)?))
}

fn load_profit(path: Option<&Path>) -> Result<Arc<ProfitRate>, CliError> {
    match path {
        None => Ok(Arc::new(ProfitRate::constant(1.0))),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            let spec: ProfitSpec = serde_json::from_str(&text)?;
            Ok(Arc::new(ProfitRate::from_spec(&spec)?))
        }
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

struct Setup {
    model: Arc<DiffusionModel>,
    profit: Arc<ProfitRate>,
    fs: Arc<FundamentalSolution>,
}

fn setup(grid: &GridArgs) -> Result<Setup, CliError> {
    let model = load_model(&grid.model)?;
    let profit = load_profit(grid.profit.as_deref())?;
    let fs = Arc::new(solve_psi(&model, grid.xmax, grid.dx)?);
    Ok(Setup { model, profit, fs })
}

fn equilibrium_curve_csv(eq: &ThresholdEquilibrium) -> String {
    let fs = eq.fundamental_solution();
    let mut out = String::with_capacity(fs.len() * 96);
    out.push_str("x,V,dV_left,dV_right,lambda\n");
    for i in 0..fs.len() {
        let x = fs.grid_x(i);
        let (left, right) = eq.value_slope_sides(x);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f(x),
            fmt_f(eq.value(x)),
            fmt_f(left),
            fmt_f(right),
            fmt_f(eq.rate(x))
        );
    }
    out
}

fn case_study_curve_csv(cs: &CaseStudyEquilibrium) -> String {
    let fs = cs.fundamental_solution();
    let mut out = String::with_capacity(fs.len() * 96);
    out.push_str("x,V,dV_left,dV_right,lambda\n");
    for i in 0..fs.len() {
        let x = fs.grid_x(i);
        let (left, right) = cs.value_slope_sides(x);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f(x),
            fmt_f(cs.value(x)),
            fmt_f(left),
            fmt_f(right),
            fmt_f(0.0)
        );
    }
    out
}

fn psi_csv(fs: &FundamentalSolution) -> String {
    let mut out = String::with_capacity(fs.len() * 96);
    out.push_str("x,psi_scaled,log_scale,dpsi_scaled,d2psi\n");
    for i in 0..fs.len() {
        let (psi, dpsi, ledger, d2) = fs.node(i);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f(fs.grid_x(i)),
            fmt_f(psi),
            fmt_f(ledger),
            fmt_f(dpsi),
            fmt_f(d2)
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    b: f64,
    left_variant: bool,
    boundary_constant: f64,
    skew_list: Vec<crate::strategy::SkewPoint>,
    conditions: ConditionReport,
}

fn cmd_solve(args: SolveArgs) -> Result<i32, CliError> {
    let s = setup(&args.grid)?;
    let eq = Arc::new(build_equilibrium(
        s.model,
        s.profit,
        s.fs,
        args.b,
        args.left_variant,
    )?);
    if let Some(out) = &args.out {
        write_file(out, &equilibrium_curve_csv(&eq))?;
    }
    let report = SolveReport {
        b: eq.b(),
        left_variant: eq.left_variant(),
        boundary_constant: eq.boundary_constant(),
        skew_list: eq.skew_list().to_vec(),
        conditions: eq.check_conditions(),
    };
    match args.format {
        Format::Json => write_json(&report, None)?,
        Format::Csv => {
            println!(
                "b = {}, K = {:.6}, skew points: [{}]",
                report.b,
                report.boundary_constant,
                report
                    .skew_list
                    .iter()
                    .map(|s| format!("({}, {:.6})", s.x, s.c))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            println!(
                "conditions: slope margin {:.3e}, rate margin {:.3e}, residual {:.3e} -> {}",
                report.conditions.cond_value_slope,
                report.conditions.cond_rate_nonneg,
                report.conditions.generator_residual,
                if report.conditions.verdict {
                    "pass"
                } else {
                    "FAIL"
                }
            );
        }
    }
    Ok(if args.strict && !report.conditions.verdict {
        2
    } else {
        0
    })
}

#[derive(Serialize)]
struct CheckReport {
    assumptions: crate::coeffs::AssumptionReport,
    admissibility: Option<crate::profit::AdmissibilityReport>,
    psi_structure: Option<crate::fundsol::StructureReport>,
}

fn cmd_check(args: CheckArgs) -> Result<i32, CliError> {
    let model = load_model(&args.grid.model)?;
    let assumptions = check_model(&model, args.grid.xmax, args.grid.dx)?;
    let admissibility = match args.grid.profit.as_deref() {
        Some(p) => Some(load_profit(Some(p))?.check_b_admissible(args.b, args.grid.xmax)),
        None => None,
    };
    let psi_structure = match assumptions.assumption2_kappa {
        Some(kappa) if assumptions.sigma_positive => {
            let fs = solve_psi(&model, args.grid.xmax, args.grid.dx)?;
            Some(fs.structure_report(kappa))
        }
        _ => None,
    };
    let report = CheckReport {
        assumptions,
        admissibility,
        psi_structure,
    };
    write_json(&report, args.out.as_deref())?;
    Ok(0)
}

#[derive(Serialize)]
struct FindBReport {
    b_grid: Vec<f64>,
    b_lower: Option<f64>,
}

fn cmd_find_b(args: FindBArgs) -> Result<i32, CliError> {
    let s = setup(&args.grid)?;
    let top = (args.grid.xmax * 0.4).min(20.0);
    let b_grid: Vec<f64> = (0..)
        .map(|i| i as f64 * 0.5)
        .take_while(|&b| b <= top)
        .collect();
    let b_lower = find_b_lower(&s.model, &s.profit, &s.fs, &b_grid)?;
    let report = FindBReport { b_grid, b_lower };
    write_json(&report, args.out.as_deref())?;
    match report.b_lower {
        Some(b) => println!("b_lower = {b}"),
        None => println!("b_lower = none (no passing suffix on the grid)"),
    }
    Ok(0)
}

fn resolve_strategy(
    text: &str,
    eq: Option<&Arc<ThresholdEquilibrium>>,
) -> Result<ControlStrategy, CliError> {
    if text == "equilibrium" {
        let eq = eq.ok_or_else(|| {
            CliError::Usage("strategy \"equilibrium\" requires --b to build one".into())
        })?;
        return Ok(eq.strategy());
    }
    let body = std::fs::read_to_string(text)?;
    let spec: StrategySpec = serde_json::from_str(&body)?;
    let rate = eq.map(|e| e.rate_fn());
    Ok(ControlStrategy::from_spec(&spec, rate)?)
}

#[derive(Serialize)]
struct SimulateReport {
    x0: f64,
    n_paths: usize,
    dt: f64,
    t_max: f64,
    seed: u64,
    absorbed_fraction: f64,
    censored_fraction: f64,
    mean_tau_absorbed: Option<f64>,
    max_state: f64,
    payoff_player1: PayoffSummary,
    payoff_player2: PayoffSummary,
}

#[derive(Serialize)]
struct PayoffSummary {
    mean: f64,
    stderr: f64,
    components: PayoffComponents,
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, CliError> {
    let s = setup(&args.grid)?;
    let eq = match args.b {
        Some(b) => Some(Arc::new(build_equilibrium(
            Arc::clone(&s.model),
            Arc::clone(&s.profit),
            Arc::clone(&s.fs),
            b,
            args.left_variant,
        )?)),
        None => None,
    };
    let s1 = resolve_strategy(&args.strategy1, eq.as_ref())?;
    let s2 = resolve_strategy(&args.strategy2, eq.as_ref())?;
    let cfg = args.sim.config();

    let summaries = batch_simulate(&s.model, &s1, &s2, args.x0, &cfg)?;
    let n = summaries.len();
    let absorbed: Vec<f64> = summaries.iter().filter_map(|p| p.tau).collect();
    let mean_tau_absorbed = if absorbed.is_empty() {
        None
    } else {
        Some(absorbed.iter().sum::<f64>() / absorbed.len() as f64)
    };

    // payoffs need full records; fold a second pass per player
    let r = s.model.r;
    let g = Arc::clone(&s.profit);
    let per_path = crate::simulate::batch_map(&s.model, &s1, &s2, args.x0, &cfg, |rec| {
        [
            crate::payoff::path_payoff_components(&rec, &g, r, 0),
            crate::payoff::path_payoff_components(&rec, &g, r, 1),
        ]
    })?;
    let summarize = |player: usize| {
        let mut comp = PayoffComponents::default();
        for row in &per_path {
            comp.rate += row[player].rate;
            comp.local_time += row[player].local_time;
            comp.jump += row[player].jump;
        }
        comp.rate /= n as f64;
        comp.local_time /= n as f64;
        comp.jump /= n as f64;
        let mean = comp.total();
        let var = per_path
            .iter()
            .map(|row| {
                let d = row[player].total() - mean;
                d * d
            })
            .sum::<f64>()
            / (n.max(2) - 1) as f64;
        PayoffSummary {
            mean,
            stderr: (var / n as f64).sqrt(),
            components: comp,
        }
    };

    let report = SimulateReport {
        x0: args.x0,
        n_paths: n,
        dt: cfg.dt,
        t_max: cfg.t_max,
        seed: cfg.seed,
        absorbed_fraction: absorbed.len() as f64 / n as f64,
        censored_fraction: 1.0 - absorbed.len() as f64 / n as f64,
        mean_tau_absorbed,
        max_state: summaries.iter().fold(0.0f64, |m, p| m.max(p.max_x)),
        payoff_player1: summarize(0),
        payoff_player2: summarize(1),
    };
    write_json(&report, args.out.as_deref())?;

    if let Some(trace_path) = &args.trace {
        let (_, rows) = simulate_path_traced(&s.model, &s1, &s2, args.x0, &cfg, 0)?;
        let mut csv = String::with_capacity(rows.len() * 96);
        csv.push_str("t,X,dD1_rate,dD1_local,dD2_rate,dD2_local\n");
        for row in rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_f(row.t),
                fmt_f(row.x),
                fmt_f(row.d_rate[0]),
                fmt_f(row.d_local[0]),
                fmt_f(row.d_rate[1]),
                fmt_f(row.d_local[1])
            );
        }
        write_file(trace_path, &csv)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct EquilibriumVerifyReport {
    target: String,
    x0: f64,
    analytic: f64,
    mean: f64,
    stderr: f64,
    abs_error: f64,
    tolerance: f64,
    truncation_bias_bound: f64,
    censored_fraction: f64,
    pass: bool,
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, CliError> {
    let s = setup(&args.grid)?;
    let cfg = args.sim.config();

    enum Target {
        Eq(Arc<ThresholdEquilibrium>),
        Cs(CaseStudyEquilibrium),
    }
    let target = match (args.ell, args.w) {
        (Some(ell), Some(w)) => Target::Cs(build_case_study(
            Arc::clone(&s.model),
            Arc::clone(&s.fs),
            ell,
            w,
        )?),
        (None, None) => Target::Eq(Arc::new(build_equilibrium(
            Arc::clone(&s.model),
            Arc::clone(&s.profit),
            Arc::clone(&s.fs),
            args.b,
            args.left_variant,
        )?)),
        _ => {
            return Err(CliError::Usage(
                "--ell and --w must be given together".into(),
            ))
        }
    };

    match args.which {
        VerifyKind::Equilibrium => {
            let (name, analytic, opponent, value_sup, profit, rel_floor) = match &target {
                Target::Eq(eq) => (
                    "threshold-equilibrium",
                    eq.value(args.x0),
                    eq.strategy(),
                    eq.value(s.fs.x_max()),
                    Arc::clone(eq.profit()),
                    0.02,
                ),
                Target::Cs(cs) => (
                    "case-study",
                    cs.value(args.x0),
                    cs.strategy(),
                    cs.value(cs.ell()),
                    Arc::clone(cs.profit()),
                    0.03,
                ),
            };
            let est = mc_estimate(
                &s.model, &opponent, &opponent, &profit, args.x0, &cfg, value_sup,
            )?;
            let abs_error = (est.mean - analytic).abs();
            let tolerance =
                (3.0 * est.stderr).max(rel_floor * analytic.abs()) + est.truncation_bias_bound;
            let report = EquilibriumVerifyReport {
                target: name.to_string(),
                x0: args.x0,
                analytic,
                mean: est.mean,
                stderr: est.stderr,
                abs_error,
                tolerance,
                truncation_bias_bound: est.truncation_bias_bound,
                censored_fraction: est.censored_fraction,
                pass: abs_error <= tolerance,
            };
            write_json(&report, args.out.as_deref())?;
            Ok(if report.pass { 0 } else { 2 })
        }
        VerifyKind::Deviations => {
            let report = match &target {
                Target::Eq(eq) => {
                    deviation_suite(&DeviationTarget::Threshold(eq), args.x0, &cfg, None)?
                }
                Target::Cs(cs) => {
                    deviation_suite(&DeviationTarget::CaseStudy(cs), args.x0, &cfg, None)?
                }
            };
            write_json(&report, args.out.as_deref())?;
            Ok(if report.all_pass { 0 } else { 2 })
        }
    }
}

/// Model parameters of a bundled example.
pub fn example_model_spec(name: &str) -> Option<ModelSpec> {
    match name {
        "first" | "g-jump" | "case-study" => Some(ModelSpec {
            r: 0.08,
            mu: "0.25*x".into(),
            sigma: "2".into(),
        }),
        "g-complicated" => Some(ModelSpec {
            r: 0.1,
            mu: "0.11*x + 0.001".into(),
            sigma: "2*(1+x)/(2+x)".into(),
        }),
        _ => None,
    }
}

/// Profit-rate parameters of a bundled example.
pub fn example_profit_spec(name: &str) -> Option<ProfitSpec> {
    use crate::profit::{PieceSpec, PointValueSpec};
    let piece = |from: f64, expr: &str| PieceSpec {
        from,
        expr: expr.into(),
    };
    match name {
        "first" => Some(ProfitSpec {
            pieces: vec![piece(0.0, "1")],
            point_values: None,
        }),
        "g-jump" => Some(ProfitSpec {
            pieces: vec![piece(0.0, "0.5"), piece(10.0, "1")],
            point_values: None,
        }),
        "g-complicated" => Some(ProfitSpec {
            pieces: vec![
                piece(0.0, "1/17"),
                piece(1.0, "1/6"),
                piece(3.0, "1/6 + (x^2 - 6*x + 9)/24"),
                piece(5.0, "1"),
            ],
            point_values: None,
        }),
        "case-study" => Some(ProfitSpec {
            pieces: vec![piece(0.0, "0.25"), piece(10.0, "0")],
            point_values: Some(vec![PointValueSpec {
                at: 10.0,
                value: 1.0,
            }]),
        }),
        _ => None,
    }
}

fn cmd_example(args: ExampleArgs) -> Result<i32, CliError> {
    let name = match args.name {
        ExampleName::First => "first",
        ExampleName::GJump => "g-jump",
        ExampleName::GComplicated => "g-complicated",
        ExampleName::CaseStudy => "case-study",
    };
    let dir = &args.out;
    std::fs::create_dir_all(dir)?;

    let model_spec = example_model_spec(name).expect("known example");
    let profit_spec = example_profit_spec(name).expect("known example");
    write_json(&model_spec, Some(&dir.join("model.json")))?;
    write_json(&profit_spec, Some(&dir.join("profit.json")))?;

    let model = Arc::new(DiffusionModel::from_spec(&model_spec)?);
    let profit = Arc::new(ProfitRate::from_spec(&profit_spec)?);
    let fs = Arc::new(solve_psi(&model, DEFAULT_X_MAX, DEFAULT_DX)?);
    write_file(&dir.join("psi.csv"), &psi_csv(&fs))?;

    let assumptions = check_model(&model, DEFAULT_X_MAX, DEFAULT_DX)?;
    write_json(&assumptions, Some(&dir.join("assumptions.json")))?;

    let mut all_pass = true;
    if name == "case-study" {
        let cs = build_case_study(Arc::clone(&model), Arc::clone(&fs), 10.0, 0.25)?;
        write_file(&dir.join("value_curve.csv"), &case_study_curve_csv(&cs))?;
        #[derive(Serialize)]
        struct CaseStudyReport {
            ell: f64,
            w: f64,
            prefactor: f64,
            value_at_barrier: f64,
            strategy: StrategySpec,
        }
        let report = CaseStudyReport {
            ell: cs.ell(),
            w: cs.w(),
            prefactor: cs.prefactor(),
            value_at_barrier: cs.value(cs.ell()),
            strategy: StrategySpec {
                lambda: "0".into(),
                skew: vec![crate::strategy::SkewPoint { x: 10.0, c: 0.5 }],
                jumps: Some(crate::strategy::JumpSpec {
                    intervals: vec![(Some(10.0), None)],
                    map: "(x-10)/2".into(),
                }),
            },
        };
        write_json(&report, Some(&dir.join("equilibrium.json")))?;
    } else {
        let thresholds: &[f64] = match name {
            "first" => &[0.0, 5.0, 10.0],
            "g-jump" => &[5.0, 10.0, 15.0],
            _ => &[0.0],
        };
        let mut reports = Vec::new();
        for &b in thresholds {
            let eq = Arc::new(build_equilibrium(
                Arc::clone(&model),
                Arc::clone(&profit),
                Arc::clone(&fs),
                b,
                false,
            )?);
            write_file(
                &dir.join(format!("curve_b{}.csv", b as i64)),
                &equilibrium_curve_csv(&eq),
            )?;
            let conditions = eq.check_conditions();
            all_pass &= conditions.verdict;
            reports.push(SolveReport {
                b,
                left_variant: false,
                boundary_constant: eq.boundary_constant(),
                skew_list: eq.skew_list().to_vec(),
                conditions,
            });
        }
        write_json(&reports, Some(&dir.join("equilibrium.json")))?;
    }

    println!("example `{name}` written to {}", dir.display());
    Ok(if args.strict && !all_pass { 2 } else { 0 })
}
