//! State-dependent profit rates.
//!
//! A profit rate `g` is stored piecewise on half-open intervals
//! `[x_i, x_{i+1})` with an explicit breakpoint set, so exact left/right
//! limits and the jump structure are available to the skew-point machinery.
//! The convention is right continuity; an optional per-breakpoint point
//! value override covers rates that are not right-continuous at a
//! breakpoint (used by the reflection case study, where the rate takes a
//! third value exactly at the barrier).
//!
//! `G(x) = integral of g over [0, x]` uses exact antiderivatives for
//! polynomial pieces and composite Gauss-Legendre quadrature otherwise.

use crate::coeffs::{CompiledExpr, Expr};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BREAKPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Piece {
    from: f64,
    expr: Expr,
    compiled: CompiledExpr,
    poly: Option<Vec<f64>>,
    dpoly: Option<Vec<f64>>,
    anti: Option<Vec<f64>>,
    constant: bool,
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    c
}

impl Piece {
    fn new(from: f64, expr: Expr) -> Self {
        let compiled = expr.compile();
        let poly = expr.poly_coeffs().map(trim);
        let dpoly = poly.as_ref().map(|c| {
            if c.len() <= 1 {
                vec![0.0]
            } else {
                c.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, &v)| k as f64 * v)
                    .collect()
            }
        });
        let anti = poly.as_ref().map(|c| {
            let mut a = vec![0.0];
            a.extend(c.iter().enumerate().map(|(k, &v)| v / (k + 1) as f64));
            a
        });
        let constant = !expr.contains_x() || poly.as_ref().is_some_and(|c| c.len() == 1);
        Piece {
            from,
            expr,
            compiled,
            poly,
            dpoly,
            anti,
            constant,
        }
    }

    fn value(&self, x: f64) -> f64 {
        match &self.poly {
            Some(c) => horner(c, x),
            None => self.compiled.eval(x),
        }
    }
}

// Gauss-Legendre 8-point rule on [-1, 1].
const GL8_NODES: [f64; 8] = [
    -0.9602898564975363,
    -0.7966664774136267,
    -0.525_532_409_916_329,
    -0.1834346424956498,
    0.1834346424956498,
    0.525_532_409_916_329,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

fn gl_integrate(f: &CompiledExpr, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let segments = ((b - a) / 0.25).ceil().max(1.0) as usize;
    let h = (b - a) / segments as f64;
    let mut total = 0.0;
    for s in 0..segments {
        let lo = a + s as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (node, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            acc += w * f.eval(mid + half * node);
        }
        total += acc * half;
    }
    total
}

#[derive(Debug, Error)]
pub enum ProfitError {
    #[error("profit rate needs at least one piece")]
    Empty,
    #[error("first piece must start at 0, got {0}")]
    FirstPieceNotZero(f64),
    #[error("piece boundaries must be strictly increasing at index {0}")]
    UnorderedPieces(usize),
    #[error("profit rate is negative ({value}) at x = {x}")]
    NegativeValue { x: f64, value: f64 },
    #[error("profit rate is not finite at x = {0}")]
    NonFinite(f64),
    #[error("point value at {0} does not coincide with a breakpoint")]
    PointValueOffBreakpoint(f64),
    #[error("x = {0} is not a breakpoint")]
    NotABreakpoint(f64),
    #[error("piece expression: {0}")]
    ParseFailure(#[from] crate::coeffs::ParseError),
}

/// Piecewise profit rate with breakpoint set, eventual-constancy point and
/// exact/cumulative antiderivative data. Values above 1 are rescaled to
/// `(0, 1]` at construction; the factor is kept so payoffs can be un-scaled.
#[derive(Debug, Clone)]
pub struct ProfitRate {
    pieces: Vec<Piece>,
    theta: Vec<f64>,
    y1: Option<f64>,
    point_values: Vec<(f64, f64)>,
    scale: f64,
    scale_inv: f64,
    cum: Vec<f64>,
}

/// JSON schema:
/// `{"pieces":[{"from":n,"expr":s},...], "point_values":[{"at":n,"value":n}]?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfitSpec {
    pub pieces: Vec<PieceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_values: Option<Vec<PointValueSpec>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PieceSpec {
    pub from: f64,
    pub expr: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointValueSpec {
    pub at: f64,
    pub value: f64,
}

impl ProfitRate {
    pub fn new(
        pieces: Vec<(f64, Expr)>,
        point_values: Vec<(f64, f64)>,
    ) -> Result<Self, ProfitError> {
        if pieces.is_empty() {
            return Err(ProfitError::Empty);
        }
        if pieces[0].0 != 0.0 {
            return Err(ProfitError::FirstPieceNotZero(pieces[0].0));
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(ProfitError::UnorderedPieces(i + 1));
            }
        }
        let pieces: Vec<Piece> = pieces.into_iter().map(|(f, e)| Piece::new(f, e)).collect();
        let theta: Vec<f64> = pieces.iter().skip(1).map(|p| p.from).collect();
        for &(at, _) in &point_values {
            if !theta
                .iter()
                .any(|&t| (t - at).abs() <= BREAKPOINT_TOL * (1.0 + at.abs()))
            {
                return Err(ProfitError::PointValueOffBreakpoint(at));
            }
        }

        // probe every piece for finiteness, sign and the max value
        let mut max_val = f64::MIN;
        let n = pieces.len();
        for (i, piece) in pieces.iter().enumerate() {
            let hi = if i + 1 < n {
                pieces[i + 1].from
            } else {
                piece.from + 10.0
            };
            let lo = piece.from;
            for k in 0..=32 {
                let x = lo + (hi - lo) * k as f64 / 32.0;
                let v = piece.value(x);
                if !v.is_finite() {
                    return Err(ProfitError::NonFinite(x));
                }
                if v < 0.0 {
                    return Err(ProfitError::NegativeValue { x, value: v });
                }
                max_val = max_val.max(v);
            }
        }
        for &(_, v) in &point_values {
            max_val = max_val.max(v);
        }
        let scale = if max_val > 1.0 + 1e-12 { max_val } else { 1.0 };
        let scale_inv = 1.0 / scale;
        let point_values: Vec<(f64, f64)> = point_values
            .into_iter()
            .map(|(a, v)| (a, v * scale_inv))
            .collect();

        // smallest breakpoint after which g is constant
        let mut y1 = None;
        if pieces.last().unwrap().constant {
            let tail_value = pieces.last().unwrap().value(pieces.last().unwrap().from);
            let mut j = pieces.len() - 1;
            while j > 0
                && pieces[j - 1].constant
                && pieces[j - 1].value(pieces[j - 1].from) == tail_value
            {
                j -= 1;
            }
            y1 = Some(pieces[j].from);
        }

        let mut cum = Vec::with_capacity(pieces.len());
        cum.push(0.0);
        for i in 0..pieces.len() - 1 {
            let a = pieces[i].from;
            let b = pieces[i + 1].from;
            let inc = match &pieces[i].anti {
                Some(anti) => horner(anti, b) - horner(anti, a),
                None => gl_integrate(&pieces[i].compiled, a, b),
            };
            let prev = *cum.last().unwrap();
            cum.push(prev + inc * scale_inv);
        }

        Ok(ProfitRate {
            pieces,
            theta,
            y1,
            point_values,
            scale,
            scale_inv,
            cum,
        })
    }

    pub fn constant(w: f64) -> Self {
        Self::new(vec![(0.0, Expr::Num(w))], vec![]).expect("constant profit rate")
    }

    /// Step rate `a1` below `ell`, `a1 + a2` above.
    pub fn step(ell: f64, a1: f64, a2: f64) -> Result<Self, ProfitError> {
        Self::new(
            vec![(0.0, Expr::Num(a1)), (ell, Expr::Num(a1 + a2))],
            vec![],
        )
    }

    /// Case-study rate: `w` below `ell`, `1` exactly at `ell`, `0` above.
    pub fn case_study(ell: f64, w: f64) -> Result<Self, ProfitError> {
        Self::new(
            vec![(0.0, Expr::Num(w)), (ell, Expr::Num(0.0))],
            vec![(ell, 1.0)],
        )
    }

    pub fn from_spec(spec: &ProfitSpec) -> Result<Self, ProfitError> {
        let mut pieces = Vec::with_capacity(spec.pieces.len());
        for p in &spec.pieces {
            let expr = crate::coeffs::parse_expr(&p.expr)?;
            pieces.push((p.from, expr));
        }
        let pv = spec
            .point_values
            .as_ref()
            .map(|v| v.iter().map(|p| (p.at, p.value)).collect())
            .unwrap_or_default();
        Self::new(pieces, pv)
    }

    pub fn to_spec(&self) -> ProfitSpec {
        ProfitSpec {
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceSpec {
                    from: p.from,
                    expr: p.expr.to_text(),
                })
                .collect(),
            point_values: if self.point_values.is_empty() {
                None
            } else {
                Some(
                    self.point_values
                        .iter()
                        .map(|&(at, value)| PointValueSpec {
                            at,
                            value: value * self.scale,
                        })
                        .collect(),
                )
            },
        }
    }

    /// Rescale factor applied at construction (1 when the raw rate already
    /// maps into `(0, 1]`).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.theta
    }

    pub fn eventual_constancy_point(&self) -> Option<f64> {
        self.y1
    }

    fn piece_index(&self, x: f64) -> usize {
        self.pieces
            .partition_point(|p| p.from <= x)
            .saturating_sub(1)
    }

    fn assert_nonneg(&self, x: f64) {
        assert!(x >= 0.0, "profit rate queried at negative state {x}");
    }

    /// Right limit; equals the RCLL value `g(x)` off overridden points.
    pub fn g_right(&self, x: f64) -> f64 {
        self.assert_nonneg(x);
        self.pieces[self.piece_index(x)].value(x) * self.scale_inv
    }

    /// Left limit `g(x-)`; at 0 the right limit is returned.
    pub fn g_left(&self, x: f64) -> f64 {
        self.assert_nonneg(x);
        let i = self.piece_index(x);
        if i > 0 && (x - self.pieces[i].from).abs() <= BREAKPOINT_TOL * (1.0 + x.abs()) {
            self.pieces[i - 1].value(x) * self.scale_inv
        } else {
            self.pieces[i].value(x) * self.scale_inv
        }
    }

    /// RCLL evaluation `g(x) = g(x+)`.
    pub fn g_eval(&self, x: f64) -> f64 {
        self.g_right(x)
    }

    /// Pointwise value including per-breakpoint overrides.
    pub fn g_at(&self, x: f64) -> f64 {
        for &(at, v) in &self.point_values {
            if (x - at).abs() <= BREAKPOINT_TOL * (1.0 + x.abs()) {
                return v;
            }
        }
        self.g_right(x)
    }

    /// Midpoint average `(g(x) + g(x-)) / 2` from the payoff integral; off
    /// breakpoints this is just `g(x)`.
    pub fn g_mid(&self, x: f64) -> f64 {
        0.5 * (self.g_at(x) + self.g_left(x))
    }

    /// `G(x) = integral of g over [0, x]`.
    pub fn g_integral(&self, x: f64) -> f64 {
        self.assert_nonneg(x);
        let i = self.piece_index(x);
        let p = &self.pieces[i];
        let inc = match &p.anti {
            Some(anti) => horner(anti, x) - horner(anti, p.from),
            None => gl_integrate(&p.compiled, p.from, x),
        };
        self.cum[i] + inc * self.scale_inv
    }

    /// Derivative of the active piece; exact for polynomial pieces, central
    /// finite difference otherwise. Meant for points off the breakpoint set.
    pub fn g_deriv(&self, x: f64) -> f64 {
        self.assert_nonneg(x);
        let i = self.piece_index(x);
        let p = &self.pieces[i];
        if let Some(d) = &p.dpoly {
            return horner(d, x) * self.scale_inv;
        }
        let hi = if i + 1 < self.pieces.len() {
            self.pieces[i + 1].from
        } else {
            f64::INFINITY
        };
        let room = (x - p.from).min(hi - x) * 0.49;
        let h = room.clamp(1e-12, 1e-5);
        (p.value(x + h) - p.value(x - h)) / (2.0 * h) * self.scale_inv
    }

    fn breakpoint_near(&self, l: f64) -> Option<f64> {
        self.theta
            .iter()
            .copied()
            .find(|&t| (t - l).abs() <= BREAKPOINT_TOL * (1.0 + l.abs()))
    }

    /// Skew intensity `c = (g(l+) - g(l-)) / (g(l+) + g(l-))` at a breakpoint.
    pub fn skew_intensity(&self, l: f64) -> Result<f64, ProfitError> {
        let t = self
            .breakpoint_near(l)
            .ok_or(ProfitError::NotABreakpoint(l))?;
        let right = self.g_right(t);
        let left = self.g_left(t);
        if right == left {
            return Ok(0.0);
        }
        Ok((right - left) / (right + left))
    }

    /// Check the regularity conditions a profit rate must satisfy relative
    /// to a threshold `b`: eventual constancy, only finitely many upward
    /// jumps above `b` with intensity in `(0, 1/2]`, values in `(0, 1]`,
    /// and a sampled bound on `|g'/g|` off the breakpoints.
    pub fn check_b_admissible(&self, b: f64, x_max: f64) -> AdmissibilityReport {
        assert!(b >= 0.0, "threshold must be nonnegative");
        let eventually_constant = self.y1.is_some();

        let mut jumps = Vec::new();
        for &t in &self.theta {
            if t <= b + BREAKPOINT_TOL {
                continue;
            }
            let right = self.g_right(t);
            let left = self.g_left(t);
            let delta = right - left;
            if delta.abs() <= 1e-13 {
                continue;
            }
            let intensity = (right - left) / (right + left);
            let in_range = delta > 0.0 && intensity > 0.0 && intensity <= 0.5 + 1e-12;
            jumps.push(JumpCheck {
                location: t,
                delta_g: delta,
                intensity,
                in_range,
            });
        }

        let probes = 2048;
        let mut codomain_ok = true;
        for k in 0..=probes {
            let x = x_max * k as f64 / probes as f64;
            let v = self.g_right(x);
            if !(v > 0.0 && v <= 1.0 + 1e-12) {
                codomain_ok = false;
                break;
            }
        }
        for &(_, v) in &self.point_values {
            if !(v > 0.0 && v <= 1.0 + 1e-12) {
                codomain_ok = false;
            }
        }

        let mut bound = 0.0f64;
        if b < x_max {
            for k in 0..=probes {
                let x = b + (x_max - b) * k as f64 / probes as f64;
                if x <= b || self.theta.iter().any(|&t| (x - t).abs() < 1e-6) {
                    continue;
                }
                let g = self.g_right(x);
                if g > 0.0 {
                    bound = bound.max((self.g_deriv(x) / g).abs());
                }
            }
        }

        let verdict = eventually_constant
            && codomain_ok
            && bound.is_finite()
            && jumps.iter().all(|j| j.in_range);
        AdmissibilityReport {
            b,
            jump_points_above_b: jumps,
            eventually_constant,
            codomain_ok,
            gprime_over_g_bound: bound,
            verdict,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpCheck {
    pub location: f64,
    pub delta_g: f64,
    pub intensity: f64,
    pub in_range: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub b: f64,
    pub jump_points_above_b: Vec<JumpCheck>,
    pub eventually_constant: bool,
    pub codomain_ok: bool,
    pub gprime_over_g_bound: f64,
    pub verdict: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::parse_expr;
    use proptest::prelude::*;

    fn complicated() -> ProfitRate {
        ProfitRate::new(
            vec![
                (0.0, parse_expr("1/17").unwrap()),
                (1.0, parse_expr("1/6").unwrap()),
                (3.0, parse_expr("1/6 + (x^2 - 6*x + 9)/24").unwrap()),
                (5.0, parse_expr("1").unwrap()),
            ],
            vec![],
        )
        .unwrap()
    }

    fn step_half() -> ProfitRate {
        ProfitRate::step(10.0, 0.5, 0.5).unwrap()
    }

    #[test]
    fn left_and_right_limits() {
        let g = step_half();
        assert_eq!(g.g_left(10.0), 0.5);
        assert_eq!(g.g_eval(10.0), 1.0);
        assert_eq!(ProfitRate::constant(1.0).g_eval(7.0), 1.0);
        let g = complicated();
        assert!((g.g_left(5.0) - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(g.g_eval(5.0), 1.0);
        assert_eq!(g.g_left(0.0), g.g_eval(0.0));
    }

    #[test]
    fn integral_values() {
        let one = ProfitRate::constant(1.0);
        assert_eq!(one.g_integral(3.7), 3.7);
        let g = step_half();
        assert_eq!(g.g_integral(14.0), 9.0);
        let g = complicated();
        assert!((g.g_integral(1.0) - 1.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn skew_intensities() {
        let g = step_half();
        assert!((g.skew_intensity(10.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let g = complicated();
        assert!((g.skew_intensity(1.0).unwrap() - 11.0 / 23.0).abs() < 1e-14);
        assert!((g.skew_intensity(5.0).unwrap() - 0.5).abs() < 1e-14);
        // continuous breakpoint -> zero intensity
        let cont = ProfitRate::new(
            vec![
                (0.0, parse_expr("0.5").unwrap()),
                (2.0, parse_expr("0.5").unwrap()),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(cont.skew_intensity(2.0).unwrap(), 0.0);
        assert!(g.skew_intensity(2.5).is_err());
    }

    #[test]
    fn admissibility_verdicts() {
        let g = step_half();
        for b in [0.0, 3.0, 12.0] {
            assert!(g.check_b_admissible(b, 50.0).verdict, "b = {b}");
        }
        // downward jump above b fails
        let down = ProfitRate::new(
            vec![
                (0.0, parse_expr("1").unwrap()),
                (4.0, parse_expr("0.5").unwrap()),
            ],
            vec![],
        )
        .unwrap();
        let rep = down.check_b_admissible(0.0, 50.0);
        assert!(!rep.verdict);
        assert!(rep.jump_points_above_b[0].delta_g < 0.0);
        // jump too large: c = 7/11 > 1/2
        let big = ProfitRate::new(
            vec![
                (0.0, parse_expr("0.2").unwrap()),
                (4.0, parse_expr("0.9").unwrap()),
            ],
            vec![],
        )
        .unwrap();
        let rep = big.check_b_admissible(0.0, 50.0);
        assert!(!rep.verdict);
        assert!((rep.jump_points_above_b[0].intensity - 7.0 / 11.0).abs() < 1e-14);
        // jumps at or below b are not part of the check
        assert!(big.check_b_admissible(4.0, 50.0).verdict);
    }

    #[test]
    fn rescaling_reports_factor() {
        let g = ProfitRate::new(
            vec![
                (0.0, parse_expr("1").unwrap()),
                (2.0, parse_expr("4").unwrap()),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(g.scale(), 4.0);
        assert_eq!(g.g_eval(3.0), 1.0);
        assert_eq!(g.g_eval(0.0), 0.25);
        assert!(g.check_b_admissible(0.0, 20.0).codomain_ok);
    }

    #[test]
    fn case_study_rate_point_value() {
        let g = ProfitRate::case_study(10.0, 0.25).unwrap();
        assert_eq!(g.g_left(10.0), 0.25);
        assert_eq!(g.g_right(10.0), 0.0);
        assert_eq!(g.g_at(10.0), 1.0);
        assert_eq!(g.g_mid(10.0), 0.625); // (1 + 1/4)/2
        assert_eq!(g.g_integral(14.0), 2.5);
        assert_eq!(g.eventual_constancy_point(), Some(10.0));
    }

    #[test]
    fn eventual_constancy_detection() {
        assert_eq!(complicated().eventual_constancy_point(), Some(5.0));
        assert_eq!(
            ProfitRate::constant(0.7).eventual_constancy_point(),
            Some(0.0)
        );
        let non_constant_tail = ProfitRate::new(
            vec![
                (0.0, parse_expr("0.5").unwrap()),
                (1.0, parse_expr("x/(1+x)").unwrap()),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(non_constant_tail.eventual_constancy_point(), None);
        assert!(
            !non_constant_tail
                .check_b_admissible(0.0, 30.0)
                .eventually_constant
        );
    }

    #[test]
    fn constant_rate_integral_is_exact() {
        let w = 0.3125;
        let g = ProfitRate::constant(w);
        for i in 0..200 {
            let x = i as f64 * 0.173;
            assert_eq!(g.g_integral(x), w * x);
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        // non-polynomial piece: g = x/(1+x) on [0, inf), G(x) = x - ln(1+x)
        let g = ProfitRate::new(vec![(0.0, parse_expr("x/(1+x)").unwrap())], vec![]).unwrap();
        for x in [0.5f64, 1.0, 2.5, 7.0, 20.0] {
            let exact = x - (1.0 + x).ln();
            assert!(
                (g.g_integral(x) - exact).abs() <= 1e-9 * (1.0 + x),
                "x = {x}"
            );
        }
    }

    proptest! {
        #[test]
        fn integral_strictly_increasing(a in 0.0..30.0f64, d in 0.001..5.0f64) {
            let g = complicated();
            prop_assert!(g.g_integral(a + d) > g.g_integral(a));
        }

        #[test]
        fn integral_derivative_matches_rate(x in 0.01..30.0f64) {
            let g = complicated();
            // keep clear of the breakpoints
            prop_assume!(g.breakpoints().iter().all(|&t| (x - t).abs() > 1e-3));
            let h = 1e-5;
            let num = (g.g_integral(x + h) - g.g_integral(x - h)) / (2.0 * h);
            let v = g.g_eval(x);
            prop_assert!((num - v).abs() <= 1e-5 * v.max(1e-3));
        }

        #[test]
        fn skew_intensity_in_open_interval(low in 0.05..1.0f64, high in 0.05..1.0f64) {
            let g = ProfitRate::new(
                vec![(0.0, crate::coeffs::Expr::Num(low)), (5.0, crate::coeffs::Expr::Num(high))],
                vec![],
            ).unwrap();
            let c = g.skew_intensity(5.0).unwrap();
            prop_assert!(c > -1.0 && c < 1.0);
        }
    }
}
