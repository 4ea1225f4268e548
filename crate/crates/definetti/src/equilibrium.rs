//! Threshold equilibria: candidate value functions, extraction rates, skew
//! lists, verification-condition checks, and the existence-threshold search.
//!
//! A threshold equilibrium at level `b` pairs the value function
//!
//! ```text
//! V_b(x) = g(b) psi(x) / psi'(b)                  for x < b
//! V_b(x) = g(b) psi(b) / psi'(b) + G(x) - G(b)    for x >= b
//! ```
//!
//! with the extraction rate
//!
//! ```text
//! lambda_b(x) = (sigma(x)^2/2 g'(x) + mu(x) g(x) - r G(x) - r K) / g(x)
//! ```
//!
//! on `(b, inf)` off the breakpoints (zero elsewhere), where
//! `K = g(b) psi(b)/psi'(b) - G(b)`, plus one skew point per upward jump of
//! `g` above `b` with intensity `(g(l+) - g(l-)) / (g(l+) + g(l-))`. The
//! constant-rate game is the same machinery with `g = 1`.

use crate::coeffs::{CompiledExpr, DiffusionModel};
use crate::fundsol::{FundamentalSolution, SolveError};
use crate::profit::{AdmissibilityReport, ProfitRate};
use crate::strategy::{ControlStrategy, SkewPoint, StateFn};
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

const THETA_TOL: f64 = 1e-9;
const MARGIN_TOL: f64 = -1e-9;
const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("profit rate is not b-admissible at b = {b}: {failures:?}")]
    NotAdmissible { b: f64, failures: Vec<String> },
    #[error("threshold b = {0} outside the solved grid [0, {1}]")]
    ThresholdOutsideGrid(f64, f64),
    #[error("skew intensity {c} at {l} outside (0, 1/2]")]
    SkewIntensityOutOfRange { l: f64, c: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("case study requires {0}")]
    CaseStudyHypothesis(String),
    #[error("existence hypothesis violated: {0}")]
    ExistenceHypothesis(String),
}

fn admissibility_failures(report: &AdmissibilityReport) -> Vec<String> {
    let mut out = Vec::new();
    if !report.eventually_constant {
        out.push("profit rate is not eventually constant".to_string());
    }
    if !report.codomain_ok {
        out.push("profit rate leaves (0, 1] on the grid".to_string());
    }
    for j in &report.jump_points_above_b {
        if !j.in_range {
            out.push(format!(
                "jump at {} has intensity {} outside (0, 1/2]",
                j.location, j.intensity
            ));
        }
    }
    out
}

/// Symmetric threshold equilibrium: value accessor, rate accessor and skew
/// list, built from a solved fundamental solution.
#[derive(Debug, Clone)]
pub struct ThresholdEquilibrium {
    model: Arc<DiffusionModel>,
    profit: Arc<ProfitRate>,
    fs: Arc<FundamentalSolution>,
    b: f64,
    left_variant: bool,
    /// `g(b)`, or `g(b-)` for the left variant.
    gb: f64,
    /// `g(b) psi(b) / psi'(b)`: the value at the threshold.
    value_at_b: f64,
    /// `G(b)`.
    g_int_b: f64,
    /// `K = value_at_b - G(b)`, the constant inside the rate.
    boundary_constant: f64,
    skew_list: Vec<SkewPoint>,
    mu: CompiledExpr,
    sigma: CompiledExpr,
}

/// Build the candidate equilibrium at threshold `b`. The profit rate must
/// be b-admissible; with `left_variant` the left limit `g(b-)` replaces
/// `g(b)` and breakpoints at `b` itself join the skew list.
pub fn build_equilibrium(
    model: Arc<DiffusionModel>,
    profit: Arc<ProfitRate>,
    fs: Arc<FundamentalSolution>,
    b: f64,
    left_variant: bool,
) -> Result<ThresholdEquilibrium, EquilibriumError> {
    if !(0.0..=fs.x_max()).contains(&b) {
        return Err(EquilibriumError::ThresholdOutsideGrid(b, fs.x_max()));
    }
    let report = profit.check_b_admissible(b, fs.x_max());
    if !report.verdict {
        return Err(EquilibriumError::NotAdmissible {
            b,
            failures: admissibility_failures(&report),
        });
    }

    let mut skew_list = Vec::new();
    for &theta in profit.breakpoints() {
        let included = if left_variant {
            theta >= b - THETA_TOL
        } else {
            theta > b + THETA_TOL
        };
        if !included {
            continue;
        }
        if (profit.g_right(theta) - profit.g_left(theta)).abs() <= 1e-13 {
            continue; // continuous breakpoint, no jump
        }
        let c = profit.skew_intensity(theta).expect("theta is a breakpoint");
        if !(c > 0.0 && c <= 0.5 + 1e-12) {
            return Err(EquilibriumError::SkewIntensityOutOfRange { l: theta, c });
        }
        skew_list.push(SkewPoint { x: theta, c });
    }

    let gb = if left_variant {
        profit.g_left(b)
    } else {
        profit.g_eval(b)
    };
    let value_at_b = gb * fs.psi_over_dpsi(b)?;
    let g_int_b = profit.g_integral(b);

    Ok(ThresholdEquilibrium {
        mu: model.mu.compile(),
        sigma: model.sigma.compile(),
        model,
        profit,
        fs,
        b,
        left_variant,
        gb,
        value_at_b,
        g_int_b,
        boundary_constant: value_at_b - g_int_b,
        skew_list,
    })
}

impl ThresholdEquilibrium {
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn left_variant(&self) -> bool {
        self.left_variant
    }

    pub fn skew_list(&self) -> &[SkewPoint] {
        &self.skew_list
    }

    pub fn boundary_constant(&self) -> f64 {
        self.boundary_constant
    }

    pub fn model(&self) -> &Arc<DiffusionModel> {
        &self.model
    }

    pub fn profit(&self) -> &Arc<ProfitRate> {
        &self.profit
    }

    pub fn fundamental_solution(&self) -> &Arc<FundamentalSolution> {
        &self.fs
    }

    /// Equilibrium value `V_b(x)`. Above `b` only the antiderivative of `g`
    /// enters, so queries beyond the solved grid are fine there.
    pub fn value(&self, x: f64) -> f64 {
        assert!(x >= 0.0, "value queried at negative state");
        if x < self.b {
            self.gb
                * self
                    .fs
                    .psi_ratio(x, self.b)
                    .expect("x < b is inside the grid")
        } else {
            self.value_at_b + self.profit.g_integral(x) - self.g_int_b
        }
    }

    /// One-sided slopes `(V_b'(x-), V_b'(x+))`.
    pub fn value_slope_sides(&self, x: f64) -> (f64, f64) {
        if x < self.b - THETA_TOL {
            let s = self.gb * self.fs.dpsi_ratio(x, self.b).expect("inside grid");
            (s, s)
        } else if (x - self.b).abs() <= THETA_TOL {
            (self.gb, self.profit.g_right(x))
        } else {
            (self.profit.g_left(x), self.profit.g_right(x))
        }
    }

    /// Right-continuous slope `V_b'(x)`: `g(b) psi'(x)/psi'(b)` below the
    /// threshold, `g(x)` above.
    pub fn value_slope(&self, x: f64) -> f64 {
        self.value_slope_sides(x).1
    }

    /// Equilibrium extraction rate `lambda_b(x)`; zero at and below `b` and
    /// at every breakpoint of `g`.
    pub fn rate(&self, x: f64) -> f64 {
        if x <= self.b || self.is_breakpoint(x) {
            return 0.0;
        }
        let g = self.profit.g_eval(x);
        let s = self.sigma.eval(x);
        let numerator = 0.5 * s * s * self.profit.g_deriv(x) + self.mu.eval(x) * g
            - self.model.r * (self.profit.g_integral(x) + self.boundary_constant);
        numerator / g
    }

    fn is_breakpoint(&self, x: f64) -> bool {
        self.profit
            .breakpoints()
            .iter()
            .any(|&t| (x - t).abs() <= THETA_TOL * (1.0 + x.abs()))
    }

    /// Rate accessor packaged for strategy construction.
    pub fn rate_fn(self: &Arc<Self>) -> StateFn {
        let eq = Arc::clone(self);
        StateFn::shared(move |x| eq.rate(x))
    }

    /// The equilibrium control strategy: the threshold rate plus one skew
    /// point per upward jump of `g` above `b`, no jump set.
    pub fn strategy(self: &Arc<Self>) -> ControlStrategy {
        ControlStrategy {
            rate: self.rate_fn(),
            skew: self.skew_list.clone(),
            jump_intervals: Vec::new(),
            jump_map: StateFn::Zero,
        }
    }

    /// Evaluate the verification conditions on the solved grid: the slope
    /// dominance `V_b' >= g`, nonnegativity of the rate, and the generator
    /// identity `A_X V_b - r V_b - lambda g = 0` above the threshold.
    pub fn check_conditions(&self) -> ConditionReport {
        let n = self.fs.len();
        let dx = self.fs.dx();
        let guard = 0.51 * dx;
        let mut worst_slope = f64::INFINITY;
        let mut worst_rate = f64::INFINITY;
        let mut worst_residual = 0.0f64;

        let near_special = |x: f64| {
            (x - self.b).abs() < guard
                || self
                    .profit
                    .breakpoints()
                    .iter()
                    .any(|&t| (x - t).abs() < guard)
        };

        for i in 0..n {
            let x = self.fs.grid_x(i);
            let rate = self.rate(x);
            worst_rate = worst_rate.min(rate);
            if near_special(x) {
                continue;
            }
            let slope = self.value_slope(x);
            worst_slope = worst_slope.min(slope - self.profit.g_eval(x));
            if x > self.b {
                let g = self.profit.g_eval(x);
                let s = self.sigma.eval(x);
                let generator = 0.5 * s * s * self.profit.g_deriv(x) + self.mu.eval(x) * g;
                let residual = generator - self.model.r * self.value(x) - rate * g;
                worst_residual = worst_residual.max(residual.abs());
            }
        }

        ConditionReport {
            cond_value_slope: worst_slope,
            cond_rate_nonneg: worst_rate,
            generator_residual: worst_residual,
            verdict: worst_slope >= MARGIN_TOL
                && worst_rate >= MARGIN_TOL
                && worst_residual <= RESIDUAL_TOL,
        }
    }
}

/// Worst margins of the verification-theorem conditions over the grid.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    /// min over the grid (off breakpoints) of `V_b'(x) - g(x)`.
    pub cond_value_slope: f64,
    /// min over the grid of `lambda_b(x)`.
    pub cond_rate_nonneg: f64,
    /// max over `(b, x_max)` off breakpoints of the generator identity residual.
    pub generator_residual: f64,
    pub verdict: bool,
}

/// Smallest `b` in `b_grid` from which every larger tested threshold passes
/// the verification conditions; `None` when no suffix passes. The existence
/// hypothesis `g(y1) >= g(x)` is checked up front.
pub fn find_b_lower(
    model: &Arc<DiffusionModel>,
    profit: &Arc<ProfitRate>,
    fs: &Arc<FundamentalSolution>,
    b_grid: &[f64],
) -> Result<Option<f64>, EquilibriumError> {
    let y1 = profit.eventual_constancy_point().ok_or_else(|| {
        EquilibriumError::ExistenceHypothesis("profit rate is not eventually constant".into())
    })?;
    let g_y1 = profit.g_eval(y1);
    let probes = 2048;
    for k in 0..=probes {
        let x = fs.x_max() * k as f64 / probes as f64;
        if profit.g_eval(x) > g_y1 + 1e-12 {
            return Err(EquilibriumError::ExistenceHypothesis(format!(
                "g({x}) = {} exceeds g(y1) = {g_y1}",
                profit.g_eval(x)
            )));
        }
    }

    let passes: Vec<bool> = b_grid
        .iter()
        .map(|&b| {
            build_equilibrium(
                Arc::clone(model),
                Arc::clone(profit),
                Arc::clone(fs),
                b,
                false,
            )
            .map(|eq| eq.check_conditions().verdict)
            .unwrap_or(false)
        })
        .collect();

    let mut first_of_suffix = None;
    for (i, &ok) in passes.iter().enumerate().rev() {
        if ok {
            first_of_suffix = Some(b_grid[i]);
        } else {
            break;
        }
    }
    Ok(first_of_suffix)
}

/// Value of the trivial immediate-extraction equilibrium: `G(x)/2`.
pub fn trivial_value(profit: &ProfitRate, x: f64) -> f64 {
    0.5 * profit.g_integral(x)
}

/// Reflection-with-jumps equilibrium for the piecewise-constant rate that
/// pays `w` below the barrier, `1` at it and nothing above: each player
/// pushes with local-time intensity 1/2 at `ell` (aggregate reflection) and
/// jumps `(x - ell)/2` whenever the state exceeds `ell`.
#[derive(Debug, Clone)]
pub struct CaseStudyEquilibrium {
    model: Arc<DiffusionModel>,
    profit: Arc<ProfitRate>,
    fs: Arc<FundamentalSolution>,
    ell: f64,
    w: f64,
    /// `(g(ell) + g(ell-)) / 4`.
    prefactor: f64,
}

pub fn build_case_study(
    model: Arc<DiffusionModel>,
    fs: Arc<FundamentalSolution>,
    ell: f64,
    w: f64,
) -> Result<CaseStudyEquilibrium, EquilibriumError> {
    if !(w > 0.0 && w <= 1.0 / 3.0) {
        return Err(EquilibriumError::CaseStudyHypothesis(format!(
            "w in (0, 1/3], got {w}"
        )));
    }
    if !(ell > 0.0 && ell <= fs.x_max()) {
        return Err(EquilibriumError::CaseStudyHypothesis(format!(
            "barrier ell = {ell} inside the solved grid"
        )));
    }
    let mu = model.mu.compile();
    let mu0 = mu.eval(0.0);
    if !(mu0 >= 0.0) {
        return Err(EquilibriumError::CaseStudyHypothesis(format!(
            "mu(0) >= 0, got {mu0}"
        )));
    }
    // mu(x) - r x must be non-decreasing on [0, ell)
    let probes = 2048;
    let mut prev = f64::NEG_INFINITY;
    for k in 0..probes {
        let x = ell * k as f64 / probes as f64;
        let h = mu.eval(x) - model.r * x;
        if h < prev - 1e-12 {
            return Err(EquilibriumError::CaseStudyHypothesis(format!(
                "mu(x) - r x non-decreasing on [0, {ell}), violated near x = {x}"
            )));
        }
        prev = h;
    }
    let profit =
        Arc::new(ProfitRate::case_study(ell, w).expect("case-study profit rate is well-formed"));
    let prefactor = 0.25 * (profit.g_at(ell) + profit.g_left(ell));
    Ok(CaseStudyEquilibrium {
        model,
        profit,
        fs,
        ell,
        w,
        prefactor,
    })
}

impl CaseStudyEquilibrium {
    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn model(&self) -> &Arc<DiffusionModel> {
        &self.model
    }

    pub fn profit(&self) -> &Arc<ProfitRate> {
        &self.profit
    }

    pub fn fundamental_solution(&self) -> &Arc<FundamentalSolution> {
        &self.fs
    }

    /// `V(x) = (g(ell) + g(ell-))/4 * psi(x ^ ell) / psi'(ell)`, flat above
    /// the barrier.
    pub fn value(&self, x: f64) -> f64 {
        assert!(x >= 0.0, "value queried at negative state");
        let capped = x.min(self.ell);
        self.prefactor * self.fs.psi_ratio(capped, self.ell).expect("inside grid")
    }

    /// One-sided slopes `(V'(x-), V'(x+))`: proportional to `psi'` below
    /// the barrier, zero above it.
    pub fn value_slope_sides(&self, x: f64) -> (f64, f64) {
        if x < self.ell - THETA_TOL {
            let s = self.prefactor * self.fs.dpsi_ratio(x, self.ell).expect("inside grid");
            (s, s)
        } else if (x - self.ell).abs() <= THETA_TOL {
            (self.prefactor, 0.0)
        } else {
            (0.0, 0.0)
        }
    }

    /// The symmetric equilibrium strategy: no rate, skew intensity 1/2 at
    /// the barrier, jump `(x - ell)/2` on `[ell, inf)`.
    pub fn strategy(&self) -> ControlStrategy {
        let ell = self.ell;
        ControlStrategy {
            rate: StateFn::Zero,
            skew: vec![SkewPoint { x: ell, c: 0.5 }],
            jump_intervals: vec![(ell, f64::INFINITY)],
            jump_map: StateFn::shared(move |x| if x > ell { 0.5 * (x - ell) } else { 0.0 }),
        }
    }

    pub fn strategy_pair(&self) -> (ControlStrategy, ControlStrategy) {
        (self.strategy(), self.strategy())
    }
}
