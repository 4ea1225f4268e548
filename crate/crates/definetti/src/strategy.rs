//! Admissible control strategies.
//!
//! A strategy is the 5-tuple (rate function, skew points, skew intensities,
//! jump map, jump set). Rate and jump maps are either DSL expressions
//! (user-authored deviations) or shared closures (machine-built equilibrium
//! accessors). The jump map is evaluated with `J(x) = 0` off the jump set
//! built in, so the admissibility requirement "no jumps outside B" holds by
//! construction; the remaining Definition constraints are sampled by
//! [`ControlStrategy::validate`].

use crate::coeffs::{CompiledExpr, Expr};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

const JUMP_ITERATION_CAP: usize = 1_000_000;

/// State-dependent nonnegative function, evaluated per simulation step.
#[derive(Clone)]
pub enum StateFn {
    Zero,
    Expr { source: String, prog: CompiledExpr },
    Shared(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl StateFn {
    pub fn from_expr(e: &Expr) -> Self {
        StateFn::Expr {
            source: e.to_text(),
            prog: e.compile(),
        }
    }

    pub fn shared(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        StateFn::Shared(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            StateFn::Zero => 0.0,
            StateFn::Expr { prog, .. } => prog.eval(x),
            StateFn::Shared(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, StateFn::Zero)
    }
}

impl fmt::Debug for StateFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFn::Zero => write!(f, "0"),
            StateFn::Expr { source, .. } => write!(f, "{source}"),
            StateFn::Shared(_) => write!(f, "<accessor>"),
        }
    }
}

/// Skew point: local time push of intensity `c` at level `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewPoint {
    pub x: f64,
    pub c: f64,
}

/// Admissible control strategy 5-tuple.
#[derive(Debug, Clone)]
pub struct ControlStrategy {
    pub rate: StateFn,
    pub skew: Vec<SkewPoint>,
    /// Finite union of closed intervals; `f64::INFINITY` marks an unbounded end.
    pub jump_intervals: Vec<(f64, f64)>,
    pub jump_map: StateFn,
}

/// JSON schema:
/// `{"lambda": string|"equilibrium", "skew":[{"x":n,"c":n}],
///   "jumps":{"intervals":[[a,b],...], "map": string}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategySpec {
    pub lambda: String,
    #[serde(default)]
    pub skew: Vec<SkewPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<JumpSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JumpSpec {
    pub intervals: Vec<(Option<f64>, Option<f64>)>,
    pub map: String,
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("in `lambda`: {0}")]
    BadRate(crate::coeffs::ParseError),
    #[error("in `jumps.map`: {0}")]
    BadJumpMap(crate::coeffs::ParseError),
    #[error("jump interval [{0:?}, {1:?}] is not ordered")]
    BadInterval(Option<f64>, Option<f64>),
    #[error("`lambda` is \"equilibrium\" but no equilibrium rate was supplied")]
    MissingEquilibriumRate,
}

/// Jump resolution after simultaneous jumps: repeated application of the
/// aggregated jump map until a fixed point or absorption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpResolution {
    pub x_before: f64,
    pub x_after: f64,
    /// Per-player summed jump attempts across all iterations.
    pub attempts: [f64; 2],
    /// Total payout-relevant amount: attempts capped by the available state.
    pub capped_total: f64,
    pub iterations: usize,
}

impl JumpResolution {
    pub fn total_attempt(&self) -> f64 {
        self.attempts[0] + self.attempts[1]
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("jump resolution did not terminate from x = {x_before} after {cap} iterations")]
pub struct NonTermination {
    pub x_before: f64,
    pub cap: usize,
}

impl ControlStrategy {
    /// No control at all.
    pub fn idle() -> Self {
        ControlStrategy {
            rate: StateFn::Zero,
            skew: Vec::new(),
            jump_intervals: Vec::new(),
            jump_map: StateFn::Zero,
        }
    }

    /// Immediate full extraction: `B = [0, inf)`, `J(x) = x`.
    pub fn trivial() -> Self {
        ControlStrategy {
            rate: StateFn::Zero,
            skew: Vec::new(),
            jump_intervals: vec![(0.0, f64::INFINITY)],
            jump_map: StateFn::shared(|x| x),
        }
    }

    /// Pure rate control.
    pub fn rate_only(rate: StateFn) -> Self {
        ControlStrategy {
            rate,
            skew: Vec::new(),
            jump_intervals: Vec::new(),
            jump_map: StateFn::Zero,
        }
    }

    /// Bang-bang: jump down to `level` whenever the state is above it.
    pub fn jump_to(level: f64) -> Self {
        ControlStrategy {
            rate: StateFn::Zero,
            skew: Vec::new(),
            jump_intervals: vec![(level, f64::INFINITY)],
            jump_map: StateFn::shared(move |x| (x - level).max(0.0)),
        }
    }

    pub fn from_spec(
        spec: &StrategySpec,
        equilibrium_rate: Option<StateFn>,
    ) -> Result<Self, StrategyError> {
        let rate = if spec.lambda == "equilibrium" {
            equilibrium_rate.ok_or(StrategyError::MissingEquilibriumRate)?
        } else {
            let e = crate::coeffs::parse_expr(&spec.lambda).map_err(StrategyError::BadRate)?;
            StateFn::from_expr(&e)
        };
        let (jump_intervals, jump_map) = match &spec.jumps {
            None => (Vec::new(), StateFn::Zero),
            Some(j) => {
                let mut intervals = Vec::with_capacity(j.intervals.len());
                for &(a, b) in &j.intervals {
                    let lo = a.unwrap_or(0.0);
                    let hi = b.unwrap_or(f64::INFINITY);
                    if !(lo <= hi) {
                        return Err(StrategyError::BadInterval(a, b));
                    }
                    intervals.push((lo, hi));
                }
                let e = crate::coeffs::parse_expr(&j.map).map_err(StrategyError::BadJumpMap)?;
                (intervals, StateFn::from_expr(&e))
            }
        };
        Ok(ControlStrategy {
            rate,
            skew: spec.skew.clone(),
            jump_intervals,
            jump_map,
        })
    }

    pub fn has_jumps(&self) -> bool {
        !self.jump_intervals.is_empty()
    }

    pub fn in_jump_set(&self, x: f64) -> bool {
        self.jump_intervals.iter().any(|&(a, b)| x >= a && x <= b)
    }

    pub fn in_jump_interior(&self, x: f64) -> bool {
        self.jump_intervals.iter().any(|&(a, b)| x > a && x < b)
    }

    /// Effective jump size: the stored map on the jump set, zero elsewhere.
    #[inline]
    pub fn jump_at(&self, x: f64) -> f64 {
        if self.has_jumps() && self.in_jump_set(x) {
            self.jump_map.eval(x)
        } else {
            0.0
        }
    }

    /// Sample the Definition constraints on `[0, x_max]`; violations are
    /// collected, not raised.
    pub fn validate(&self, x_max: f64, samples: usize) -> StrategyReport {
        let mut violations = Vec::new();
        for k in 0..=samples {
            let x = x_max * k as f64 / samples as f64;
            let l = self.rate.eval(x);
            if !(l >= 0.0) {
                violations.push(format!("rate {l} < 0 at x = {x}"));
                break;
            }
        }
        for sp in &self.skew {
            if !(sp.x > 0.0) {
                violations.push(format!("skew point at {} must be positive", sp.x));
            }
            if !(sp.c > 0.0 && sp.c <= 1.0) {
                violations.push(format!("skew intensity {} outside (0, 1]", sp.c));
            }
            if self.in_jump_interior(sp.x) {
                violations.push(format!(
                    "skew point {} lies in the interior of the jump set",
                    sp.x
                ));
            }
        }
        for &(a, b) in &self.jump_intervals {
            let hi = b.min(x_max);
            if a > hi {
                continue;
            }
            for k in 0..=samples {
                let x = a + (hi - a) * k as f64 / samples as f64;
                let j = self.jump_at(x);
                if j > x {
                    violations.push(format!("jump {j} exceeds available state at x = {x}"));
                    break;
                }
                if x > a && x < hi && !(j > 0.0) {
                    violations.push(format!("jump map is {j} on the interior at x = {x}"));
                    break;
                }
            }
        }
        StrategyReport {
            ok: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Resolve simultaneous jumps: iterate `y <- (y - J1(y) - J2(y)) v 0` while
/// the state sits in a jump set and the aggregated jump is positive,
/// accumulating per-player attempts. Hitting the iteration cap signals an
/// ill-posed interaction and is surfaced as an error (the payoff layer maps
/// it to the minus-infinity reward convention).
pub fn resolve_jumps(
    x: f64,
    s1: &ControlStrategy,
    s2: &ControlStrategy,
) -> Result<JumpResolution, NonTermination> {
    assert!(x >= 0.0, "state must be nonnegative");
    let mut y = x;
    let mut attempts = [0.0f64; 2];
    let mut iterations = 0usize;
    while y > 0.0 {
        let j1 = s1.jump_at(y);
        let j2 = s2.jump_at(y);
        let total = j1 + j2;
        if total <= 0.0 {
            break;
        }
        iterations += 1;
        if iterations > JUMP_ITERATION_CAP {
            return Err(NonTermination {
                x_before: x,
                cap: JUMP_ITERATION_CAP,
            });
        }
        attempts[0] += j1;
        attempts[1] += j2;
        y = (y - total).max(0.0);
    }
    Ok(JumpResolution {
        x_before: x,
        x_after: y,
        attempts,
        capped_total: (attempts[0] + attempts[1]).min(x),
        iterations,
    })
}
