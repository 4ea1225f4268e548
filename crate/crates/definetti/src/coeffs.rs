//! Coefficient expressions and model-level assumption checks.
//!
//! Drift and volatility coefficients are given as small arithmetic
//! expressions in the state variable `x` (literals, `+ - * / ^`, unary
//! minus, parentheses). The DSL is deliberately minimal: every model in
//! scope is rational or polynomial, and a small grammar keeps parsing,
//! printing and finite differencing trivial.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Binary operators, in increasing precedence order `+- < */ < ^`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Abstract syntax tree over numeric literals and the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("domain error ({op}) at x = {x}")]
    Domain { op: &'static str, x: f64 },
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn error<T>(&self, pos: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'+' => BinOp::Add,
                b'-' => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'*' => BinOp::Mul,
                b'/' => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    // `^` binds tightest and is left-associative like the other operators.
    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            let rhs = self.signed_atom()?;
            lhs = Expr::Bin(BinOp::Pow, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn signed_atom(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.signed_atom()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => self.error(self.pos, "unexpected end of input, expected operand"),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.error(self.pos, "expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "x" {
                    Ok(Expr::X)
                } else {
                    self.error(
                        start,
                        format!("unknown identifier `{name}` (only `x` is defined)"),
                    )
                }
            }
            Some(c) => self.error(self.pos, format!("unexpected character `{}`", c as char)),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // optional exponent part
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mut p = self.pos + 1;
            if p < self.src.len() && (self.src[p] == b'+' || self.src[p] == b'-') {
                p += 1;
            }
            if p < self.src.len() && self.src[p].is_ascii_digit() {
                self.pos = p;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Num(v)),
            Err(_) => self.error(start, format!("malformed number `{text}`")),
        }
    }
}

/// Parse an expression, honoring standard precedence and left associativity.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text);
    if p.peek().is_none() {
        return Err(ParseError {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return Err(ParseError {
            offset: p.pos,
            message: format!("trailing input starting at `{}`", c as char),
        });
    }
    Ok(e)
}

/// Evaluate `e` at `x`, reporting division by zero and power-domain errors.
pub fn eval_expr(e: &Expr, x: f64) -> Result<f64, EvalError> {
    e.eval(x)
}

impl Expr {
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::X => Ok(x),
            Expr::Neg(e) => Ok(-e.eval(x)?),
            Expr::Bin(op, a, b) => {
                let a = a.eval(x)?;
                let b = b.eval(x)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(EvalError::DivisionByZero { x })
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => {
                        if a == 0.0 && b < 0.0 {
                            return Err(EvalError::Domain {
                                op: "zero to a negative power",
                                x,
                            });
                        }
                        let v = a.powf(b);
                        if v.is_nan() {
                            Err(EvalError::Domain {
                                op: "fractional power of a negative base",
                                x,
                            })
                        } else {
                            Ok(v)
                        }
                    }
                }
            }
        }
    }

    /// Render the expression; `parse_expr(e.to_text())` reproduces `e`.
    pub fn to_text(&self) -> String {
        fn prec(e: &Expr) -> u8 {
            match e {
                Expr::Num(_) | Expr::X => 10,
                Expr::Neg(_) => 3,
                Expr::Bin(op, _, _) => op.precedence(),
            }
        }
        fn write(e: &Expr, out: &mut String) {
            match e {
                Expr::Num(v) => {
                    out.push_str(&format!("{v}"));
                }
                Expr::X => out.push('x'),
                Expr::Neg(inner) => {
                    out.push('-');
                    wrap_if(inner, prec(e), out);
                }
                Expr::Bin(op, a, b) => {
                    wrap_if(a, op.precedence(), out);
                    out.push(' ');
                    out.push(op.symbol());
                    out.push(' ');
                    // left-associative: parenthesize right child of equal precedence
                    wrap_if(b, op.precedence() + 1, out);
                }
            }
        }
        fn wrap_if(e: &Expr, min_prec: u8, out: &mut String) {
            if prec(e) < min_prec {
                out.push('(');
                write(e, out);
                out.push(')');
            } else {
                write(e, out);
            }
        }
        let mut out = String::new();
        write(self, &mut out);
        out
    }

    pub fn contains_x(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::X => true,
            Expr::Neg(e) => e.contains_x(),
            Expr::Bin(_, a, b) => a.contains_x() || b.contains_x(),
        }
    }

    /// Polynomial coefficients `[c0, c1, ...]` if the expression is a
    /// polynomial in `x` (division only by constants, integer powers).
    pub fn poly_coeffs(&self) -> Option<Vec<f64>> {
        fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
            let mut out = vec![0.0; a.len() + b.len() - 1];
            for (i, &ai) in a.iter().enumerate() {
                for (j, &bj) in b.iter().enumerate() {
                    out[i + j] += ai * bj;
                }
            }
            out
        }
        fn zip(a: Vec<f64>, b: Vec<f64>, sign: f64) -> Vec<f64> {
            let n = a.len().max(b.len());
            let mut out = vec![0.0; n];
            for (i, slot) in out.iter_mut().enumerate() {
                *slot = a.get(i).copied().unwrap_or(0.0) + sign * b.get(i).copied().unwrap_or(0.0);
            }
            out
        }
        let coeffs = match self {
            Expr::Num(v) => vec![*v],
            Expr::X => vec![0.0, 1.0],
            Expr::Neg(e) => {
                let mut c = e.poly_coeffs()?;
                for v in &mut c {
                    *v = -*v;
                }
                c
            }
            Expr::Bin(op, a, b) => {
                let ca = a.poly_coeffs()?;
                let cb = b.poly_coeffs()?;
                match op {
                    BinOp::Add => zip(ca, cb, 1.0),
                    BinOp::Sub => zip(ca, cb, -1.0),
                    BinOp::Mul => mul(&ca, &cb),
                    BinOp::Div => {
                        if cb.len() == 1 && cb[0] != 0.0 {
                            ca.iter().map(|c| c / cb[0]).collect()
                        } else {
                            return None;
                        }
                    }
                    BinOp::Pow => {
                        if cb.len() != 1 {
                            return None;
                        }
                        let n = cb[0];
                        if n < 0.0 || n.fract() != 0.0 || n > 64.0 {
                            return None;
                        }
                        let mut acc = vec![1.0];
                        for _ in 0..n as usize {
                            acc = mul(&acc, &ca);
                        }
                        acc
                    }
                }
            }
        };
        Some(coeffs)
    }

    pub fn compile(&self) -> CompiledExpr {
        let mut ops = Vec::new();
        fn emit(e: &Expr, ops: &mut Vec<Instr>) {
            match e {
                Expr::Num(v) => ops.push(Instr::Const(*v)),
                Expr::X => ops.push(Instr::X),
                Expr::Neg(inner) => {
                    emit(inner, ops);
                    ops.push(Instr::Neg);
                }
                Expr::Bin(op, a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(match op {
                        BinOp::Add => Instr::Add,
                        BinOp::Sub => Instr::Sub,
                        BinOp::Mul => Instr::Mul,
                        BinOp::Div => Instr::Div,
                        BinOp::Pow => Instr::Pow,
                    });
                }
            }
        }
        emit(self, &mut ops);
        CompiledExpr { ops }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Instr {
    Const(f64),
    X,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
}

/// Flattened stack program for tight evaluation loops. Follows IEEE
/// semantics (division by zero yields inf/nan); callers on hot paths
/// detect non-finite states rather than paying for per-op checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    ops: Vec<Instr>,
}

impl CompiledExpr {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let mut stack = [0.0f64; 24];
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Instr::Const(v) => {
                    stack[sp] = v;
                    sp += 1;
                }
                Instr::X => {
                    stack[sp] = x;
                    sp += 1;
                }
                Instr::Neg => stack[sp - 1] = -stack[sp - 1],
                Instr::Add => {
                    sp -= 1;
                    stack[sp - 1] += stack[sp];
                }
                Instr::Sub => {
                    sp -= 1;
                    stack[sp - 1] -= stack[sp];
                }
                Instr::Mul => {
                    sp -= 1;
                    stack[sp - 1] *= stack[sp];
                }
                Instr::Div => {
                    sp -= 1;
                    stack[sp - 1] /= stack[sp];
                }
                Instr::Pow => {
                    sp -= 1;
                    stack[sp - 1] = stack[sp - 1].powf(stack[sp]);
                }
            }
        }
        stack[sp - 1]
    }
}

/// One-dimensional diffusion model `dX = mu(X) dt + sigma(X) dW`, absorbed
/// at zero, with a constant discount rate `r > 0`.
#[derive(Debug, Clone)]
pub struct DiffusionModel {
    pub r: f64,
    pub mu: Expr,
    pub sigma: Expr,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("discount rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("in `{field}`: {source}")]
    BadExpr {
        field: &'static str,
        source: ParseError,
    },
}

/// JSON schema: `{"r": number, "mu": string, "sigma": string}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub r: f64,
    pub mu: String,
    pub sigma: String,
}

impl DiffusionModel {
    pub fn new(r: f64, mu: Expr, sigma: Expr) -> Result<Self, ModelError> {
        if !(r > 0.0) {
            return Err(ModelError::NonPositiveRate(r));
        }
        Ok(DiffusionModel { r, mu, sigma })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self, ModelError> {
        let mu = parse_expr(&spec.mu).map_err(|source| ModelError::BadExpr {
            field: "mu",
            source,
        })?;
        let sigma = parse_expr(&spec.sigma).map_err(|source| ModelError::BadExpr {
            field: "sigma",
            source,
        })?;
        Self::new(spec.r, mu, sigma)
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            r: self.r,
            mu: self.mu.to_text(),
            sigma: self.sigma.to_text(),
        }
    }
}

/// Grid-sampled evidence for the model assumptions: Lipschitz estimates for
/// the coefficients, positivity of sigma, and a pair `(kappa, c)` for which
/// `x -> mu(x) - (r + c) x` has strictly positive sampled increments on
/// `[kappa, x_max]`. These are heuristic estimates, not proofs.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub lipschitz_mu_bound_estimate: f64,
    pub lipschitz_sigma_bound_estimate: f64,
    pub sigma_positive: bool,
    pub assumption2_kappa: Option<f64>,
    pub assumption2_c: Option<f64>,
    pub grid_used: (f64, f64),
}

const ASSUMPTION2_C_CANDIDATES: [f64; 4] = [1.0, 0.5, 0.1, 0.01];

/// Sample the model on a uniform grid and estimate the assumption data.
pub fn check_model(m: &DiffusionModel, x_max: f64, dx: f64) -> Result<AssumptionReport, EvalError> {
    assert!(x_max > 0.0 && dx > 0.0, "grid parameters must be positive");
    let n = (x_max / dx).round() as usize;
    let mut mu_vals = Vec::with_capacity(n + 1);
    let mut sigma_vals = Vec::with_capacity(n + 1);
    let mut xs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let x = i as f64 * dx;
        xs.push(x);
        mu_vals.push(m.mu.eval(x)?);
        sigma_vals.push(m.sigma.eval(x)?);
    }

    let lip = |vals: &[f64]| {
        vals.windows(2)
            .map(|w| (w[1] - w[0]).abs() / dx)
            .fold(0.0f64, f64::max)
    };
    let sigma_positive = sigma_vals.iter().all(|&s| s > 0.0);

    // For each candidate c, find the smallest grid index from which every
    // increment of mu(x) - (r + c) x is strictly positive; keep the pair
    // with the smallest kappa, breaking ties in list order.
    let mut best: Option<(usize, f64)> = None;
    for &c in &ASSUMPTION2_C_CANDIDATES {
        let slope = m.r + c;
        let mut first_good = 0usize; // start index of the all-positive suffix
        for i in 0..n {
            let h_i = mu_vals[i] - slope * xs[i];
            let h_next = mu_vals[i + 1] - slope * xs[i + 1];
            if h_next - h_i <= 0.0 {
                first_good = i + 1;
            }
        }
        if first_good < n {
            match best {
                Some((k, _)) if k <= first_good => {}
                _ => best = Some((first_good, c)),
            }
        }
    }

    Ok(AssumptionReport {
        lipschitz_mu_bound_estimate: lip(&mu_vals),
        lipschitz_sigma_bound_estimate: lip(&sigma_vals),
        sigma_positive,
        assumption2_kappa: best.map(|(k, _)| xs[k]),
        assumption2_c: best.map(|(_, c)| c),
        grid_used: (x_max, dx),
    })
}

pub const DEFAULT_X_MAX: f64 = 50.0;
pub const DEFAULT_DX: f64 = 1e-3;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn parses_paper_coefficients() {
        assert_eq!(p("0.25*x").eval(4.0).unwrap(), 1.0);
        assert_eq!(p("2*(1+x)/(2+x)").eval(0.0).unwrap(), 1.0);
        assert_eq!(p("0.25*x").eval(2.0).unwrap(), 0.5);
        assert_eq!(p("0.11*x + 0.001").eval(0.0).unwrap(), 0.001);
    }

    #[test]
    fn syntax_error_carries_offset() {
        let err = parse_expr("x +").unwrap_err();
        assert_eq!(err.offset, 3);
        let err = parse_expr("").unwrap_err();
        assert_eq!(err.offset, 0);
        let err = parse_expr("0.25*y").unwrap_err();
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn division_by_zero_and_domain_errors() {
        assert!(matches!(
            p("1/x").eval(0.0),
            Err(EvalError::DivisionByZero { .. })
        ));
        assert!(matches!(
            p("0^(0-1)").eval(0.0),
            Err(EvalError::Domain { .. })
        ));
        assert!(matches!(
            p("x^0.5").eval(-1.0),
            Err(EvalError::Domain { .. })
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("2+3*4").eval(0.0).unwrap(), 14.0);
        assert_eq!(p("2*3^2").eval(0.0).unwrap(), 18.0);
        assert_eq!(p("8-4-2").eval(0.0).unwrap(), 2.0);
        assert_eq!(p("8/4/2").eval(0.0).unwrap(), 1.0);
        // left-associative power
        assert_eq!(p("2^3^2").eval(0.0).unwrap(), 64.0);
        assert_eq!(p("-x^2").eval(3.0).unwrap(), -9.0);
        assert_eq!(p("2^-1").eval(0.0).unwrap(), 0.5);
    }

    #[test]
    fn compiled_matches_tree_eval() {
        for src in [
            "0.25*x",
            "2*(1+x)/(2+x)",
            "1/6 + (x^2 - 6*x + 9)/24",
            "-x^2 + 3",
        ] {
            let e = p(src);
            let c = e.compile();
            for i in 0..100 {
                let x = i as f64 * 0.37;
                assert_eq!(e.eval(x).unwrap(), c.eval(x), "{src} at {x}");
            }
        }
    }

    #[test]
    fn poly_extraction() {
        assert_eq!(p("1/17").poly_coeffs().unwrap(), vec![1.0 / 17.0]);
        assert_eq!(
            p("1/6 + (x^2 - 6*x + 9)/24").poly_coeffs().unwrap(),
            vec![1.0 / 6.0 + 9.0 / 24.0, -0.25, 1.0 / 24.0]
        );
        assert!(p("2*(1+x)/(2+x)").poly_coeffs().is_none());
    }

    #[test]
    fn check_model_first_example() {
        // mu = 0.25 x with r = 0.08: slope comparison 0.25 > 0.08 + 0.1
        let m = DiffusionModel::new(0.08, p("0.25*x"), p("2")).unwrap();
        let rep = check_model(&m, 20.0, 0.01).unwrap();
        assert!(rep.sigma_positive);
        assert_eq!(rep.assumption2_kappa, Some(0.0));
        assert_eq!(rep.assumption2_c, Some(0.1));
        assert!((rep.lipschitz_mu_bound_estimate - 0.25).abs() < 1e-9);
    }

    #[test]
    fn check_model_flat_drift_has_no_assumption2() {
        let m = DiffusionModel::new(0.08, p("0"), p("1")).unwrap();
        let rep = check_model(&m, 20.0, 0.01).unwrap();
        assert_eq!(rep.assumption2_kappa, None);
        assert_eq!(rep.assumption2_c, None);
    }

    #[test]
    fn check_model_rational_sigma() {
        // |d/dx sigma| = 2/(2+x)^2 <= 1/2
        let m = DiffusionModel::new(0.1, p("0.11*x + 0.001"), p("2*(1+x)/(2+x)")).unwrap();
        let rep = check_model(&m, 20.0, 0.01).unwrap();
        assert!(rep.sigma_positive);
        assert!(rep.lipschitz_sigma_bound_estimate <= 0.5 + 1e-9);
        assert!(rep.lipschitz_sigma_bound_estimate.is_finite());
    }

    #[test]
    fn lipschitz_estimate_monotone_under_refinement() {
        let m = DiffusionModel::new(0.1, p("0.11*x + 0.001"), p("2*(1+x)/(2+x)")).unwrap();
        let coarse = check_model(&m, 10.0, 0.04).unwrap();
        let mid = check_model(&m, 10.0, 0.02).unwrap();
        let fine = check_model(&m, 10.0, 0.01).unwrap();
        assert!(mid.lipschitz_sigma_bound_estimate >= coarse.lipschitz_sigma_bound_estimate);
        assert!(fine.lipschitz_sigma_bound_estimate >= mid.lipschitz_sigma_bound_estimate);
        assert!(mid.lipschitz_mu_bound_estimate >= coarse.lipschitz_mu_bound_estimate - 1e-12);
        assert!(fine.lipschitz_mu_bound_estimate >= mid.lipschitz_mu_bound_estimate - 1e-12);
    }

    #[test]
    fn model_json_round_trip() {
        let spec: ModelSpec =
            serde_json::from_str(r#"{"r":0.08,"mu":"0.25*x","sigma":"2"}"#).unwrap();
        let m = DiffusionModel::from_spec(&spec).unwrap();
        let back = m.to_spec();
        let m2 = DiffusionModel::from_spec(&back).unwrap();
        assert_eq!(m.mu, m2.mu);
        assert_eq!(m.sigma, m2.sigma);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(0.0..100.0f64).prop_map(Expr::Num), Just(Expr::X),];
        leaf.prop_recursive(5, 64, 4, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(
                    BinOp::Add,
                    Box::new(a),
                    Box::new(b)
                )),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(
                    BinOp::Sub,
                    Box::new(a),
                    Box::new(b)
                )),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(
                    BinOp::Mul,
                    Box::new(a),
                    Box::new(b)
                )),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Bin(
                    BinOp::Div,
                    Box::new(a),
                    Box::new(b)
                )),
            ]
        })
    }

    proptest! {
        // print/parse round trip reproduces the tree, hence identical evaluation
        #[test]
        fn print_parse_round_trip(e in arb_expr()) {
            let text = e.to_text();
            let back = parse_expr(&text).unwrap();
            prop_assert_eq!(&back, &e);
        }

        #[test]
        fn round_trip_evaluates_identically(e in arb_expr(), xs in proptest::collection::vec(0.0..50.0f64, 8)) {
            let back = parse_expr(&e.to_text()).unwrap();
            for x in xs {
                match (e.eval(x), back.eval(x)) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                    (Err(_), Err(_)) => {}
                    other => prop_assert!(false, "mismatch: {:?}", other),
                }
            }
        }

        // Example-style linear drift with slope above r: assumption 2 holds at kappa = 0
        #[test]
        fn linear_drift_above_r_satisfies_assumption2(slope in 0.1..0.5f64) {
            let mu = Expr::Bin(BinOp::Mul, Box::new(Expr::Num(slope)), Box::new(Expr::X));
            let m = DiffusionModel::new(0.08, mu, Expr::Num(1.0)).unwrap();
            let rep = check_model(&m, 5.0, 0.05).unwrap();
            prop_assert_eq!(rep.assumption2_kappa, Some(0.0));
        }
    }

    #[test]
    fn thousand_point_round_trip_tolerance() {
        // the spec-level check: 1000 sample points, 1-ulp-scale agreement
        let e = p("1/6 + (x^2 - 6*x + 9)/24 - 0.5*x/(1+x)");
        let back = parse_expr(&e.to_text()).unwrap();
        for i in 0..1000 {
            let x = i as f64 * 0.05;
            let a = e.eval(x).unwrap();
            let b = back.eval(x).unwrap();
            assert!((a - b).abs() <= f64::EPSILON * a.abs().max(1.0));
        }
    }
}
