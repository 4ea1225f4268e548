//! Path simulation of the controlled diffusion.
//!
//! Euler-Maruyama stepping with four control mechanisms layered on top:
//! state-dependent extraction rates (drift reduction), skew points
//! (straddle resampling: a step crossing a skew point with aggregate
//! intensity `c` lands above with probability `(1-c)/2`, which degenerates
//! to reflection at `c = 1`), jump sets (resolved through the simultaneous
//! jump iteration), and absorption at zero.
//!
//! Local time at a skew point is estimated with the symmetric occupation
//! formula `dL = sigma(l)^2 dt 1{|X - l| < eps} / (2 eps)` with
//! `eps = k sigma(l) sqrt(dt)`, or, for a fully reflecting point, from the
//! pushed-back overshoot (`2 max(X' - l, 0)` per flip, matching the
//! symmetric normalization).
//!
//! Every path draws from its own counter-based RNG stream derived from
//! `(seed, path index)`, so batch results are identical for any worker
//! count.

use crate::coeffs::{CompiledExpr, DiffusionModel};
use crate::strategy::{resolve_jumps, ControlStrategy, JumpResolution, NonTermination, StateFn};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Simulation parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Occupation-estimator half width factor: `eps = k sigma(l) sqrt(dt)`.
    pub local_time_epsilon_factor: f64,
    /// Use the pushed-back overshoot estimator at fully reflecting points.
    pub overshoot_estimator: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            t_max: 150.0,
            n_paths: 10_000,
            seed: 42,
            local_time_epsilon_factor: 2.0,
            overshoot_estimator: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) {
        assert!(self.dt > 0.0, "dt must be positive");
        assert!(self.t_max > 0.0, "t_max must be positive");
        assert!(self.n_paths >= 1, "need at least one path");
        assert!(
            self.local_time_epsilon_factor > 0.0,
            "epsilon factor must be positive"
        );
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    NonTermination(#[from] NonTermination),
    #[error("aggregate skew intensity {c_tot} > 1 at {l}: the controlled SDE is ill-posed")]
    IllPosedSkew { l: f64, c_tot: f64 },
    #[error("state became non-finite at t = {t} (from x = {x})")]
    NonFinite { t: f64, x: f64 },
}

/// Discounted rate increments at one step: `x` is the pre-step state and
/// `drate[i] = e^{-rt} lambda_i(x) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateStep {
    pub x: f64,
    pub drate: [f64; 2],
}

/// Discounted local-time tallies accumulated at one skew point:
/// `disc[i] = integral of e^{-rt} c_i dL`, `raw` the undiscounted estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalTally {
    pub l: f64,
    pub disc: [f64; 2],
    pub raw: f64,
}

/// One (possibly multi-round) jump event.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpEvent {
    pub t: f64,
    pub x_before: f64,
    pub x_after: f64,
    pub attempts: [f64; 2],
}

/// Full record of one simulated path: per-player control decomposition and
/// absorption data. Rate steps are stored only where a rate is active.
#[derive(Debug, Clone)]
pub struct PathRecord {
    pub x0: f64,
    pub initial_resolution: Option<JumpResolution>,
    pub steps: Vec<RateStep>,
    pub local: Vec<LocalTally>,
    pub jumps: Vec<JumpEvent>,
    /// Absorption time, or `None` when censored at the horizon.
    pub tau: Option<f64>,
    pub censored: bool,
    pub max_x: f64,
    pub straddle_events: u64,
    pub straddle_above: u64,
}

/// Per-path summary for batch output; bitwise comparable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSummary {
    pub tau: Option<f64>,
    pub censored: bool,
    pub max_x: f64,
    /// Discounted rate extraction per player (unweighted by the profit rate).
    pub rate_tally: [f64; 2],
    pub local: Vec<LocalTally>,
    pub jump_attempts: [f64; 2],
    pub n_jump_events: usize,
    pub straddle_events: u64,
    pub straddle_above: u64,
}

impl PathRecord {
    pub fn summary(&self) -> PathSummary {
        let mut rate_tally = [0.0f64; 2];
        for s in &self.steps {
            rate_tally[0] += s.drate[0];
            rate_tally[1] += s.drate[1];
        }
        let mut jump_attempts = [0.0f64; 2];
        for j in &self.jumps {
            jump_attempts[0] += j.attempts[0];
            jump_attempts[1] += j.attempts[1];
        }
        PathSummary {
            tau: self.tau,
            censored: self.censored,
            max_x: self.max_x,
            rate_tally,
            local: self.local.clone(),
            jump_attempts,
            n_jump_events: self.jumps.len(),
            straddle_events: self.straddle_events,
            straddle_above: self.straddle_above,
        }
    }
}

/// Optional per-step trace row for CSV dumps.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub d_rate: [f64; 2],
    pub d_local: [f64; 2],
}

struct SkewSite {
    l: f64,
    c: [f64; 2],
    c_tot: f64,
    eps: f64,
    /// occupation increment `sigma(l)^2 dt / (2 eps)`
    occ_inc: f64,
    /// use overshoot pushes instead of occupation counting
    overshoot: bool,
    above_prob: f64,
    disc: [f64; 2],
    raw: f64,
}

struct SimContext<'a> {
    mu: CompiledExpr,
    sigma: CompiledExpr,
    s1: &'a ControlStrategy,
    s2: &'a ControlStrategy,
    same_rate: bool,
    any_jumps: bool,
    n_steps: usize,
    dt: f64,
    sqrt_dt: f64,
    df: f64,
}

impl<'a> SimContext<'a> {
    fn new(
        m: &DiffusionModel,
        s1: &'a ControlStrategy,
        s2: &'a ControlStrategy,
        cfg: &SimConfig,
    ) -> Result<(Self, Vec<SkewSite>), SimError> {
        cfg.validate();
        let sigma = m.sigma.compile();
        let mut sites: Vec<SkewSite> = Vec::new();
        for (player, strat) in [(0usize, &s1), (1usize, &s2)] {
            for sp in &strat.skew {
                match sites.iter_mut().find(|s| s.l == sp.x) {
                    Some(site) => {
                        site.c[player] += sp.c;
                        site.c_tot += sp.c;
                    }
                    None => {
                        let mut c = [0.0; 2];
                        c[player] = sp.c;
                        let sig_l = sigma.eval(sp.x);
                        let eps = cfg.local_time_epsilon_factor * sig_l * cfg.dt.sqrt();
                        sites.push(SkewSite {
                            l: sp.x,
                            c,
                            c_tot: sp.c,
                            eps,
                            occ_inc: sig_l * sig_l * cfg.dt / (2.0 * eps),
                            overshoot: false,
                            above_prob: 0.0,
                            disc: [0.0; 2],
                            raw: 0.0,
                        });
                    }
                }
            }
        }
        sites.sort_by(|a, b| a.l.total_cmp(&b.l));
        for site in &mut sites {
            if site.c_tot > 1.0 + 1e-12 {
                return Err(SimError::IllPosedSkew {
                    l: site.l,
                    c_tot: site.c_tot,
                });
            }
            site.c_tot = site.c_tot.min(1.0);
            site.above_prob = 0.5 * (1.0 - site.c_tot);
            site.overshoot = cfg.overshoot_estimator && site.c_tot == 1.0;
        }
        let same_rate = match (&s1.rate, &s2.rate) {
            (StateFn::Zero, StateFn::Zero) => true,
            (StateFn::Shared(a), StateFn::Shared(b)) => std::sync::Arc::ptr_eq(a, b),
            _ => false,
        };
        Ok((
            SimContext {
                mu: m.mu.compile(),
                sigma,
                s1,
                s2,
                same_rate,
                any_jumps: s1.has_jumps() || s2.has_jumps(),
                n_steps: (cfg.t_max / cfg.dt).round() as usize,
                dt: cfg.dt,
                sqrt_dt: cfg.dt.sqrt(),
                df: (-m.r * cfg.dt).exp(),
            },
            sites,
        ))
    }
}

/// Simulate one controlled path on the RNG stream `(cfg.seed, rng_stream)`.
pub fn simulate_path(
    m: &DiffusionModel,
    s1: &ControlStrategy,
    s2: &ControlStrategy,
    x0: f64,
    cfg: &SimConfig,
    rng_stream: u64,
) -> Result<PathRecord, SimError> {
    let (ctx, mut sites) = SimContext::new(m, s1, s2, cfg)?;
    run_path(&ctx, &mut sites, x0, cfg.seed, rng_stream, None)
}

/// As [`simulate_path`], also collecting a per-step trace.
pub fn simulate_path_traced(
    m: &DiffusionModel,
    s1: &ControlStrategy,
    s2: &ControlStrategy,
    x0: f64,
    cfg: &SimConfig,
    rng_stream: u64,
) -> Result<(PathRecord, Vec<TraceRow>), SimError> {
    let (ctx, mut sites) = SimContext::new(m, s1, s2, cfg)?;
    let mut trace = Vec::new();
    let record = run_path(&ctx, &mut sites, x0, cfg.seed, rng_stream, Some(&mut trace))?;
    Ok((record, trace))
}

fn run_path(
    ctx: &SimContext,
    sites: &mut [SkewSite],
    x0: f64,
    seed: u64,
    stream: u64,
    mut trace: Option<&mut Vec<TraceRow>>,
) -> Result<PathRecord, SimError> {
    assert!(x0 >= 0.0, "initial state must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for site in sites.iter_mut() {
        site.disc = [0.0; 2];
        site.raw = 0.0;
    }

    let mut record = PathRecord {
        x0,
        initial_resolution: None,
        steps: Vec::new(),
        local: Vec::new(),
        jumps: Vec::new(),
        tau: None,
        censored: false,
        max_x: 0.0,
        straddle_events: 0,
        straddle_above: 0,
    };

    let mut x = x0;
    if x <= 0.0 {
        record.tau = Some(0.0);
        return Ok(record);
    }

    // jumps fire at t = 0- before any diffusion
    if ctx.any_jumps {
        let res = resolve_jumps(x, ctx.s1, ctx.s2)?;
        if res.total_attempt() > 0.0 {
            record.jumps.push(JumpEvent {
                t: 0.0,
                x_before: res.x_before,
                x_after: res.x_after,
                attempts: res.attempts,
            });
            x = res.x_after;
        }
        record.initial_resolution = Some(res);
        if x <= 0.0 {
            record.tau = Some(0.0);
            return Ok(record);
        }
    }
    record.max_x = x;

    let mut disc = 1.0f64;
    for step in 0..ctx.n_steps {
        // occupation-formula local time at the pre-step state
        let mut d_local = [0.0f64; 2];
        for site in sites.iter_mut() {
            if !site.overshoot && (x - site.l).abs() < site.eps {
                let inc = site.occ_inc;
                site.raw += inc;
                for (p, slot) in d_local.iter_mut().enumerate() {
                    let d = disc * site.c[p] * inc;
                    site.disc[p] += d;
                    *slot += d;
                }
            }
        }

        // rate control enters the drift and the extraction tallies
        let l1 = ctx.s1.rate.eval(x);
        let l2 = if ctx.same_rate {
            l1
        } else {
            ctx.s2.rate.eval(x)
        };
        let mut d_rate = [0.0f64; 2];
        if l1 != 0.0 || l2 != 0.0 {
            d_rate = [disc * l1 * ctx.dt, disc * l2 * ctx.dt];
            record.steps.push(RateStep { x, drate: d_rate });
        }
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TraceRow {
                t: step as f64 * ctx.dt,
                x,
                d_rate,
                d_local,
            });
        }

        let z: f64 = StandardNormal.sample(&mut rng);
        let drift = ctx.mu.eval(x) - l1 - l2;
        let vol = ctx.sigma.eval(x);
        let mut xn = x + drift * ctx.dt + vol * ctx.sqrt_dt * z;
        if !xn.is_finite() {
            return Err(SimError::NonFinite {
                t: step as f64 * ctx.dt,
                x,
            });
        }

        // skew points: resample a straddled crossing; nearest site first
        let (lo, hi) = if x <= xn { (x, xn) } else { (xn, x) };
        let mut crossed: Option<usize> = None;
        for (i, site) in sites.iter().enumerate() {
            if site.l >= lo && site.l <= hi {
                crossed = match crossed {
                    Some(j) if (sites[j].l - x).abs() <= (site.l - x).abs() => Some(j),
                    _ => Some(i),
                };
            }
        }
        if let Some(i) = crossed {
            let site = &mut sites[i];
            let overshoot = (xn - site.l).abs();
            let above = rng.random::<f64>() < site.above_prob;
            record.straddle_events += 1;
            if above {
                record.straddle_above += 1;
            }
            if site.overshoot && xn > site.l {
                // symmetric normalization: a flip push is twice the overshoot
                let inc = 2.0 * (xn - site.l);
                site.raw += inc;
                for p in 0..2 {
                    site.disc[p] += disc * site.c[p] * inc;
                }
            }
            xn = if above {
                site.l + overshoot
            } else {
                site.l - overshoot
            };
        }

        let t_next = (step + 1) as f64 * ctx.dt;
        if xn <= 0.0 {
            record.tau = Some(t_next);
            break;
        }

        // entering a jump set triggers resolution at the grid crossing
        if ctx.any_jumps
            && ((ctx.s1.has_jumps() && ctx.s1.in_jump_set(xn))
                || (ctx.s2.has_jumps() && ctx.s2.in_jump_set(xn)))
        {
            let res = resolve_jumps(xn, ctx.s1, ctx.s2)?;
            if res.total_attempt() > 0.0 {
                record.jumps.push(JumpEvent {
                    t: t_next,
                    x_before: res.x_before,
                    x_after: res.x_after,
                    attempts: res.attempts,
                });
                xn = res.x_after;
                if xn <= 0.0 {
                    record.tau = Some(t_next);
                    break;
                }
            }
        }

        x = xn;
        if x > record.max_x {
            record.max_x = x;
        }
        disc *= ctx.df;
    }

    record.censored = record.tau.is_none();
    record.local = sites
        .iter()
        .filter(|s| s.raw > 0.0 || s.disc[0] != 0.0 || s.disc[1] != 0.0)
        .map(|s| LocalTally {
            l: s.l,
            disc: s.disc,
            raw: s.raw,
        })
        .collect();
    Ok(record)
}

/// Simulate `cfg.n_paths` independent paths in parallel and return their
/// summaries in path order. Path `i` always uses stream `i`, so the result
/// does not depend on the worker count.
pub fn batch_simulate(
    m: &DiffusionModel,
    s1: &ControlStrategy,
    s2: &ControlStrategy,
    x0: f64,
    cfg: &SimConfig,
) -> Result<Vec<PathSummary>, SimError> {
    batch_map(m, s1, s2, x0, cfg, |rec| rec.summary())
}

/// Parallel fold over the paths of a batch: each path record is mapped to a
/// summary value and dropped, keeping memory flat.
pub fn batch_map<T, F>(
    m: &DiffusionModel,
    s1: &ControlStrategy,
    s2: &ControlStrategy,
    x0: f64,
    cfg: &SimConfig,
    f: F,
) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(PathRecord) -> T + Send + Sync,
{
    // context probe up front so configuration errors surface once
    SimContext::new(m, s1, s2, cfg)?;
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let (ctx, mut sites) = SimContext::new(m, s1, s2, cfg)?;
            let record = run_path(&ctx, &mut sites, x0, cfg.seed, i, None)?;
            Ok(f(record))
        })
        .collect()
}
