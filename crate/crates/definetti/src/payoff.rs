//! Discounted payoff evaluation and Monte Carlo verification.
//!
//! The payoff integral pairs the profit rate with each control channel:
//! continuous extraction is weighted by the midpoint average
//! `(g(x) + g(x-))/2` (plain `g(x)` off breakpoints), local time at a skew
//! point `l` by `(g(l) + g(l-))/2`, and a jump from `x` collects the
//! antiderivative increment `G(x) - G((x - total_attempt) v 0)` split
//! between the players in proportion to their attempted amounts.
//!
//! The deviation suite refutes (or fails to refute) the equilibrium claim:
//! a menu of unilateral deviations is priced against the fixed opponent
//! strategy and compared one-sidedly to the analytic equilibrium value.

use crate::coeffs::DiffusionModel;
use crate::equilibrium::{CaseStudyEquilibrium, ThresholdEquilibrium};
use crate::profit::ProfitRate;
use crate::simulate::{batch_map, PathRecord, SimConfig, SimError};
use crate::strategy::{ControlStrategy, StateFn};
use serde::Serialize;
use std::sync::Arc;

/// Player index (payoffs are per player).
pub const PLAYER_ONE: usize = 0;
pub const PLAYER_TWO: usize = 1;

/// Additive decomposition of a payoff into its control channels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PayoffComponents {
    pub rate: f64,
    pub local_time: f64,
    pub jump: f64,
}

impl PayoffComponents {
    pub fn total(&self) -> f64 {
        self.rate + self.local_time + self.jump
    }
}

/// Discounted payoff of one simulated path for `player`.
pub fn path_payoff(path: &PathRecord, g: &ProfitRate, r: f64, player: usize) -> f64 {
    path_payoff_components(path, g, r, player).total()
}

pub fn path_payoff_components(
    path: &PathRecord,
    g: &ProfitRate,
    r: f64,
    player: usize,
) -> PayoffComponents {
    let mut out = PayoffComponents::default();
    for step in &path.steps {
        out.rate += g.g_mid(step.x) * step.drate[player];
    }
    for tally in &path.local {
        out.local_time += g.g_mid(tally.l) * tally.disc[player];
    }
    for event in &path.jumps {
        let total = event.attempts[0] + event.attempts[1];
        debug_assert!(total > 0.0, "jump events carry positive attempts");
        let share = event.attempts[player] / total;
        let increment = g.g_integral(event.x_before) - g.g_integral(event.x_after);
        out.jump += (-r * event.t).exp() * share * increment;
    }
    out
}

/// Monte Carlo payoff estimate with standard error and channel means.
#[derive(Debug, Clone, Serialize)]
pub struct PayoffEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    /// Discount-tail bound `e^{-r t_max} * sup V` on the censoring bias.
    pub truncation_bias_bound: f64,
    pub components: PayoffComponents,
    pub censored_fraction: f64,
}

/// Estimate player one's expected reward under `(s1, s2)` from `x0`.
///
/// `value_sup` bounds the continuation value and only enters the reported
/// truncation bound. A non-terminating jump interaction signals an
/// ill-posed pair of strategies and is reported as a `-inf` mean, matching
/// the convention that rewards without a well-defined state process are
/// minus infinity.
pub fn mc_estimate(
    m: &DiffusionModel,
    s1: &ControlStrategy,
    s2: &ControlStrategy,
    g: &ProfitRate,
    x0: f64,
    cfg: &SimConfig,
    value_sup: f64,
) -> Result<PayoffEstimate, SimError> {
    let r = m.r;
    let per_path = batch_map(m, s1, s2, x0, cfg, |record| {
        let c = path_payoff_components(&record, g, r, PLAYER_ONE);
        (c, record.censored)
    });
    let per_path = match per_path {
        Ok(v) => v,
        Err(SimError::NonTermination(_)) | Err(SimError::IllPosedSkew { .. }) => {
            return Ok(PayoffEstimate {
                mean: f64::NEG_INFINITY,
                stderr: 0.0,
                n_paths: cfg.n_paths,
                truncation_bias_bound: 0.0,
                components: PayoffComponents::default(),
                censored_fraction: 0.0,
            })
        }
        Err(e) => return Err(e),
    };

    let n = per_path.len();
    let mut components = PayoffComponents::default();
    let mut censored = 0usize;
    for (c, was_censored) in &per_path {
        components.rate += c.rate;
        components.local_time += c.local_time;
        components.jump += c.jump;
        censored += *was_censored as usize;
    }
    components.rate /= n as f64;
    components.local_time /= n as f64;
    components.jump /= n as f64;
    let mean = components.total();
    let var = per_path
        .iter()
        .map(|(c, _)| {
            let d = c.total() - mean;
            d * d
        })
        .sum::<f64>()
        / (n.max(2) - 1) as f64;

    Ok(PayoffEstimate {
        mean,
        stderr: (var / n as f64).sqrt(),
        n_paths: n,
        truncation_bias_bound: (-m.r * cfg.t_max).exp() * value_sup,
        components,
        censored_fraction: censored as f64 / n as f64,
    })
}

/// An equilibrium whose claim the deviation suite can attack.
pub enum DeviationTarget<'a> {
    Threshold(&'a Arc<ThresholdEquilibrium>),
    CaseStudy(&'a CaseStudyEquilibrium),
}

impl DeviationTarget<'_> {
    fn model(&self) -> &Arc<DiffusionModel> {
        match self {
            DeviationTarget::Threshold(eq) => eq.model(),
            DeviationTarget::CaseStudy(cs) => cs.model(),
        }
    }

    fn profit(&self) -> &Arc<ProfitRate> {
        match self {
            DeviationTarget::Threshold(eq) => eq.profit(),
            DeviationTarget::CaseStudy(cs) => cs.profit(),
        }
    }

    fn analytic_value(&self, x: f64) -> f64 {
        match self {
            DeviationTarget::Threshold(eq) => eq.value(x),
            DeviationTarget::CaseStudy(cs) => cs.value(x),
        }
    }

    fn opponent(&self) -> ControlStrategy {
        match self {
            DeviationTarget::Threshold(eq) => eq.strategy(),
            DeviationTarget::CaseStudy(cs) => cs.strategy(),
        }
    }

    fn threshold(&self) -> f64 {
        match self {
            DeviationTarget::Threshold(eq) => eq.b(),
            DeviationTarget::CaseStudy(cs) => cs.ell(),
        }
    }

    fn value_sup(&self) -> f64 {
        match self {
            DeviationTarget::Threshold(eq) => {
                let fs = eq.fundamental_solution();
                eq.value(fs.x_max())
            }
            DeviationTarget::CaseStudy(cs) => cs.value(cs.ell()),
        }
    }
}

/// Built-in deviation menu for player one.
///
/// (i) immediate full extraction, (ii) threshold shifted down/up
/// (rate control for a threshold target, shifted bang-bang for the case
/// study), (iii) the equilibrium rate plus a constant extra rate,
/// (iv) jump-to-threshold, (v) doing nothing.
pub fn builtin_deviations(target: &DeviationTarget, delta: f64) -> Vec<(String, ControlStrategy)> {
    let b = target.threshold();
    let mut menu: Vec<(String, ControlStrategy)> = Vec::new();
    menu.push(("full-extraction".into(), ControlStrategy::trivial()));
    match target {
        DeviationTarget::Threshold(eq) => {
            let fs = eq.fundamental_solution();
            for (name, shifted) in [
                ("threshold-down", (b - delta).max(0.0)),
                ("threshold-up", b + delta),
            ] {
                if let Ok(dev_eq) = crate::equilibrium::build_equilibrium(
                    Arc::clone(eq.model()),
                    Arc::clone(eq.profit()),
                    Arc::clone(fs),
                    shifted,
                    eq.left_variant(),
                ) {
                    let dev_eq = Arc::new(dev_eq);
                    menu.push((name.into(), dev_eq.strategy()));
                }
            }
            let base = Arc::clone(eq);
            let extra = StateFn::shared(move |x| base.rate(x) + 0.05);
            menu.push((
                "extra-rate".into(),
                ControlStrategy {
                    rate: extra,
                    skew: eq.skew_list().to_vec(),
                    jump_intervals: Vec::new(),
                    jump_map: StateFn::Zero,
                },
            ));
        }
        DeviationTarget::CaseStudy(_) => {
            menu.push((
                "threshold-down".into(),
                ControlStrategy::jump_to((b - delta).max(0.0)),
            ));
            menu.push(("threshold-up".into(), ControlStrategy::jump_to(b + delta)));
            menu.push((
                "extra-rate".into(),
                ControlStrategy::rate_only(StateFn::shared(|_| 0.05)),
            ));
        }
    }
    menu.push(("jump-to-threshold".into(), ControlStrategy::jump_to(b)));
    menu.push(("do-nothing".into(), ControlStrategy::idle()));
    menu
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationRow {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub analytic: f64,
    /// Acceptance slack: `analytic + 3 stderr + allowance - mean`.
    pub margin: f64,
    pub verdict: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub x0: f64,
    pub analytic_value: f64,
    /// Equilibrium-recovery error used as the discretization allowance.
    pub calibration_error: f64,
    pub equilibrium_mean: f64,
    pub equilibrium_stderr: f64,
    pub rows: Vec<DeviationRow>,
    pub all_pass: bool,
}

/// Price every deviation in `menu` (default: the built-in menu) for player
/// one against the fixed equilibrium opponent and test
/// `mean <= analytic + 3 stderr + allowance` one-sidedly. The allowance is
/// calibrated once from the equilibrium self-recovery error plus the
/// truncation bound.
pub fn deviation_suite(
    target: &DeviationTarget,
    x0: f64,
    cfg: &SimConfig,
    menu: Option<Vec<(String, ControlStrategy)>>,
) -> Result<DeviationReport, SimError> {
    let m = target.model();
    let g = target.profit();
    let analytic = target.analytic_value(x0);
    let opponent = target.opponent();
    let value_sup = target.value_sup();

    let recovery = mc_estimate(m, &opponent, &opponent, g, x0, cfg, value_sup)?;
    let allowance = (recovery.mean - analytic).abs() + recovery.truncation_bias_bound;

    let menu = menu.unwrap_or_else(|| builtin_deviations(target, 1.0));
    let mut rows = Vec::with_capacity(menu.len());
    for (name, deviation) in menu {
        let est = mc_estimate(m, &deviation, &opponent, g, x0, cfg, value_sup)?;
        let margin = analytic + 3.0 * est.stderr + allowance - est.mean;
        rows.push(DeviationRow {
            name,
            mean: est.mean,
            stderr: est.stderr,
            analytic,
            margin,
            verdict: margin >= 0.0,
        });
    }
    let all_pass = rows.iter().all(|r| r.verdict);
    Ok(DeviationReport {
        x0,
        analytic_value: analytic,
        calibration_error: allowance,
        equilibrium_mean: recovery.mean,
        equilibrium_stderr: recovery.stderr,
        rows,
        all_pass,
    })
}
