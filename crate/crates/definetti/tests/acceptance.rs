//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use definetti::coeffs::{parse_expr, DiffusionModel};
use definetti::equilibrium::{build_case_study, build_equilibrium, trivial_value};
use definetti::fundsol::solve_psi;
use definetti::payoff::{deviation_suite, mc_estimate, DeviationTarget};
use definetti::profit::ProfitRate;
use definetti::simulate::{batch_simulate, simulate_path, SimConfig};
use definetti::strategy::{ControlStrategy, SkewPoint, StateFn};
use std::sync::Arc;

fn linear_drift_model() -> Arc<DiffusionModel> {
    Arc::new(
        DiffusionModel::new(
            0.08,
            parse_expr("0.25*x").unwrap(),
            parse_expr("2").unwrap(),
        )
        .unwrap(),
    )
}

fn complicated_model() -> Arc<DiffusionModel> {
    Arc::new(
        DiffusionModel::new(
            0.1,
            parse_expr("0.11*x + 0.001").unwrap(),
            parse_expr("2*(1+x)/(2+x)").unwrap(),
        )
        .unwrap(),
    )
}

fn complicated_profit() -> Arc<ProfitRate> {
    Arc::new(
        ProfitRate::new(
            vec![
                (0.0, parse_expr("1/17").unwrap()),
                (1.0, parse_expr("1/6").unwrap()),
                (3.0, parse_expr("1/6 + (x^2 - 6*x + 9)/24").unwrap()),
                (5.0, parse_expr("1").unwrap()),
            ],
            vec![],
        )
        .unwrap(),
    )
}

#[test]
fn criterion_1_exact_rational_checks() {
    // skew intensity for the half-to-one step
    let step = ProfitRate::step(10.0, 0.5, 0.5).unwrap();
    assert!((step.skew_intensity(10.0).unwrap() - 1.0 / 3.0).abs() <= 1e-14);

    // the two intensities of the piecewise example
    let g = complicated_profit();
    assert!((g.skew_intensity(1.0).unwrap() - 11.0 / 23.0).abs() <= 1e-14);
    assert!((g.skew_intensity(5.0).unwrap() - 0.5).abs() <= 1e-14);

    // trivial equilibrium values are exact
    let one = ProfitRate::constant(1.0);
    for i in 0..100 {
        let x = i as f64 * 0.73;
        assert_eq!(trivial_value(&one, x), 0.5 * x);
    }
    assert_eq!(trivial_value(&step, 14.0), 4.5);
    assert_eq!(trivial_value(&g, 1.0), 0.5 / 17.0);

    println!("acceptance criterion 1 (exact rational checks): PASS");
}

#[test]
fn criterion_2_closed_form_rate() {
    let m = complicated_model();
    let g = complicated_profit();
    let fs = Arc::new(solve_psi(&m, 10.0, 1e-3).unwrap());
    let eq = build_equilibrium(m, g, fs, 0.0, false).unwrap();

    // on (0, 1): lambda(x) = 0.01 x + 0.001
    for k in 1..=100 {
        let x = k as f64 / 101.0;
        let expect = 0.01 * x + 0.001;
        assert!(
            (eq.rate(x) - expect).abs() <= 1e-10,
            "x = {x}: {} vs {expect}",
            eq.rate(x)
        );
    }
    // on (1, 3): lambda(x) = 0.01 x + 1117/17000
    for k in 1..=100 {
        let x = 1.0 + 2.0 * k as f64 / 101.0;
        let expect = 0.01 * x + 1117.0 / 17000.0;
        assert!(
            (eq.rate(x) - expect).abs() <= 1e-10,
            "x = {x}: {} vs {expect}",
            eq.rate(x)
        );
    }
    println!("acceptance criterion 2 (closed-form rate): PASS");
}

#[test]
fn criterion_3_ode_oracle() {
    // mu = 0, sigma = sqrt(2), r = 1: psi(x) = sinh(x)
    let m =
        DiffusionModel::new(1.0, parse_expr("0").unwrap(), parse_expr("2^0.5").unwrap()).unwrap();
    let fs = solve_psi(&m, 10.0, 1e-3).unwrap();
    for i in 1..=1000 {
        let x = i as f64 * 0.01;
        let got = fs.psi_ratio(x, 0.0).unwrap();
        let expect = x.sinh();
        assert!(
            ((got - expect) / expect).abs() <= 1e-6,
            "x = {x}: {got} vs {expect}"
        );
    }
    let ratio = fs.psi_ratio(1.0, 1.0).unwrap();
    assert!((ratio - 1.0f64.tanh()).abs() <= 1e-8);
    println!("acceptance criterion 3 (constant-coefficient ODE oracle): PASS");
}

#[test]
fn criterion_4_structural_properties() {
    let m = linear_drift_model();
    let g = Arc::new(ProfitRate::constant(1.0));
    let fs = Arc::new(solve_psi(&m, 50.0, 1e-3).unwrap());

    // psi' > 0 and psi'' <= 0 across the grid
    for i in 0..fs.len() {
        assert!(fs.dpsi_scaled(i) > 0.0, "psi' at node {i}");
        assert!(fs.d2psi_scaled(i) <= 0.0, "psi'' at node {i}");
    }

    // conditions pass for every tested threshold
    let thresholds = [0.0, 2.0, 5.0, 10.0];
    let eqs: Vec<_> = thresholds
        .iter()
        .map(|&b| {
            build_equilibrium(Arc::clone(&m), Arc::clone(&g), Arc::clone(&fs), b, false).unwrap()
        })
        .collect();
    for (b, eq) in thresholds.iter().zip(&eqs) {
        let rep = eq.check_conditions();
        assert!(rep.verdict, "b = {b}: {rep:?}");
    }

    // V_b(x) strictly increasing in b at the probe states
    for &x in &[2.0, 5.0, 8.0] {
        for pair in eqs.windows(2) {
            assert!(
                pair[1].value(x) > pair[0].value(x),
                "V_b({x}) not increasing from b = {} to {}",
                pair[0].b(),
                pair[1].b()
            );
        }
    }
    println!("acceptance criterion 4 (structural property suite): PASS");
}

#[test]
fn criterion_5_equilibrium_recovery() {
    let m = linear_drift_model();
    let g = Arc::new(ProfitRate::constant(1.0));
    let fs = Arc::new(solve_psi(&m, 50.0, 1e-3).unwrap());
    let eq = Arc::new(build_equilibrium(Arc::clone(&m), Arc::clone(&g), fs, 5.0, false).unwrap());
    let strategy = eq.strategy();
    let cfg = SimConfig {
        dt: 1e-3,
        t_max: 150.0,
        n_paths: 20_000,
        seed: 42,
        ..SimConfig::default()
    };
    for x0 in [2.0, 5.0, 8.0] {
        let est = mc_estimate(&m, &strategy, &strategy, &g, x0, &cfg, eq.value(50.0)).unwrap();
        let v = eq.value(x0);
        let err = (est.mean - v).abs();
        let tol = (3.0 * est.stderr).max(0.02 * v);
        assert!(
            err <= tol,
            "x0 = {x0}: |{} - {v}| = {err:.4} > {tol:.4}",
            est.mean
        );
        println!(
            "  x0 = {x0}: MC {:.4} vs V {v:.4} (err {err:.4}, tol {tol:.4})",
            est.mean
        );
    }
    println!("acceptance criterion 5 (Monte Carlo equilibrium recovery): PASS");
}

#[test]
fn criterion_6_case_study_recovery() {
    let m = linear_drift_model();
    let fs = Arc::new(solve_psi(&m, 50.0, 1e-3).unwrap());
    let cs = build_case_study(Arc::clone(&m), fs, 10.0, 0.25).unwrap();
    let (s1, s2) = cs.strategy_pair();
    let cfg = SimConfig {
        dt: 1e-3,
        t_max: 100.0,
        n_paths: 8_000,
        seed: 42,
        local_time_epsilon_factor: 2.0,
        overshoot_estimator: true,
    };

    // starting above the barrier: a two-player jump to exactly 10
    let rec = simulate_path(&m, &s1, &s2, 14.0, &cfg, 0).unwrap();
    let init = rec.initial_resolution.clone().unwrap();
    assert_eq!(init.x_after, 10.0);
    assert_eq!(init.attempts, [2.0, 2.0]);

    let barrier_slack = 10.0 + 6.0 * 2.0 * cfg.dt.sqrt();
    for x0 in [6.0, 10.0, 14.0] {
        let est = mc_estimate(&m, &s1, &s2, cs.profit(), x0, &cfg, cs.value(10.0)).unwrap();
        let v = cs.value(x0);
        let err = (est.mean - v).abs();
        let tol = (3.0 * est.stderr).max(0.03 * v);
        assert!(
            err <= tol,
            "x0 = {x0}: |{} - {v}| = {err:.4} > {tol:.4}",
            est.mean
        );
        println!(
            "  x0 = {x0}: MC {:.4} vs V {v:.4} (err {err:.4}, tol {tol:.4})",
            est.mean
        );
        if x0 <= 10.0 {
            let summaries = batch_simulate(&m, &s1, &s2, x0, &cfg).unwrap();
            let max_state = summaries.iter().fold(0.0f64, |acc, s| acc.max(s.max_x));
            assert!(
                max_state <= barrier_slack,
                "x0 = {x0}: max state {max_state} above {barrier_slack}"
            );
        }
    }
    println!("acceptance criterion 6 (case-study recovery): PASS");
}

#[test]
fn criterion_7_deviation_suite() {
    // threshold equilibrium target
    let m = linear_drift_model();
    let g = Arc::new(ProfitRate::constant(1.0));
    let fs = Arc::new(solve_psi(&m, 50.0, 1e-3).unwrap());
    let eq = Arc::new(
        build_equilibrium(Arc::clone(&m), Arc::clone(&g), Arc::clone(&fs), 5.0, false).unwrap(),
    );
    let cfg = SimConfig {
        dt: 1e-3,
        t_max: 120.0,
        n_paths: 4_000,
        seed: 42,
        ..SimConfig::default()
    };
    let x0 = 5.0;
    let report = deviation_suite(&DeviationTarget::Threshold(&eq), x0, &cfg, None).unwrap();
    for row in &report.rows {
        println!(
            "  threshold target, {}: mean {:.4}, margin {:+.4} -> {}",
            row.name,
            row.mean,
            row.margin,
            if row.verdict { "ok" } else { "VIOLATION" }
        );
    }
    assert!(report.all_pass, "threshold deviations: {report:?}");

    // the trivial full-extraction deviation scores the initial state exactly
    let full = report
        .rows
        .iter()
        .find(|r| r.name == "full-extraction")
        .unwrap();
    assert!((full.mean - x0).abs() <= 1e-12);
    assert!(full.mean < eq.value(x0));

    // case-study target
    let cs = build_case_study(Arc::clone(&m), fs, 10.0, 0.25).unwrap();
    let cfg_cs = SimConfig {
        dt: 1e-3,
        t_max: 80.0,
        n_paths: 3_000,
        seed: 42,
        local_time_epsilon_factor: 2.0,
        overshoot_estimator: true,
    };
    let report = deviation_suite(&DeviationTarget::CaseStudy(&cs), 6.0, &cfg_cs, None).unwrap();
    for row in &report.rows {
        println!(
            "  case-study target, {}: mean {:.4}, margin {:+.4} -> {}",
            row.name,
            row.mean,
            row.margin,
            if row.verdict { "ok" } else { "VIOLATION" }
        );
    }
    assert!(report.all_pass, "case-study deviations: {report:?}");

    println!("acceptance criterion 7 (deviation suite): PASS");
}

#[test]
fn criterion_8_skew_scheme_statistics() {
    // pure skew point with c = 1/3, drift-free
    let m = DiffusionModel::new(0.05, parse_expr("0").unwrap(), parse_expr("1").unwrap()).unwrap();
    let skewed = ControlStrategy {
        rate: StateFn::Zero,
        skew: vec![SkewPoint {
            x: 5.0,
            c: 1.0 / 3.0,
        }],
        jump_intervals: vec![],
        jump_map: StateFn::Zero,
    };
    let cfg = SimConfig {
        dt: 1e-3,
        t_max: 4.0,
        n_paths: 4_000,
        seed: 42,
        ..SimConfig::default()
    };
    let summaries = batch_simulate(&m, &skewed, &ControlStrategy::idle(), 5.0, &cfg).unwrap();
    let events: u64 = summaries.iter().map(|s| s.straddle_events).sum();
    let above: u64 = summaries.iter().map(|s| s.straddle_above).sum();
    assert!(events >= 100_000, "only {events} straddle events");
    let p = above as f64 / events as f64;
    let expect = (1.0 - 1.0 / 3.0) / 2.0;
    let se = (expect * (1.0 - expect) / events as f64).sqrt();
    assert!(
        (p - expect).abs() <= 3.0 * se,
        "above fraction {p:.5} vs {expect:.5} with se {se:.5} over {events} events"
    );
    println!(
        "  {events} events, above fraction {p:.5} vs {expect:.5} (3 se = {:.5})",
        3.0 * se
    );
    println!("acceptance criterion 8 (skew-scheme statistics): PASS");
}

#[test]
fn criterion_9_determinism() {
    // library level: identical estimates across runs and worker counts
    let m = linear_drift_model();
    let g = Arc::new(ProfitRate::constant(1.0));
    let fs = Arc::new(solve_psi(&m, 30.0, 1e-3).unwrap());
    let eq = Arc::new(build_equilibrium(Arc::clone(&m), Arc::clone(&g), fs, 5.0, false).unwrap());
    let strategy = eq.strategy();
    let cfg = SimConfig {
        dt: 1e-3,
        t_max: 10.0,
        n_paths: 300,
        seed: 42,
        ..SimConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_estimate(&m, &strategy, &strategy, &g, 5.0, &cfg, 1.0).unwrap())
    };
    let a = run(1);
    let b = run(1);
    let c = run(4);
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    assert_eq!(a.mean.to_bits(), c.mean.to_bits());
    assert_eq!(a.stderr.to_bits(), c.stderr.to_bits());

    // command level: byte-identical outputs across re-runs and worker counts
    let bin = env!("CARGO_BIN_EXE_definetti");
    let base = std::env::temp_dir().join(format!("definetti-acc-{}", std::process::id()));
    std::fs::create_dir_all(&base).unwrap();
    let model_path = base.join("model.json");
    std::fs::write(&model_path, r#"{"r":0.08,"mu":"0.25*x","sigma":"2"}"#).unwrap();

    let run_cli = |label: &str, threads: &str| -> Vec<(String, Vec<u8>)> {
        let dir = base.join(label);
        std::fs::create_dir_all(&dir).unwrap();
        let status = std::process::Command::new(bin)
            .env("RAYON_NUM_THREADS", threads)
            .args([
                "simulate",
                "--model",
                model_path.to_str().unwrap(),
                "--strategy1",
                "equilibrium",
                "--strategy2",
                "equilibrium",
                "--b",
                "5",
                "--x0",
                "5",
                "--xmax",
                "30",
                "--paths",
                "64",
                "--tmax",
                "5",
                "--out",
            ])
            .arg(dir.join("summary.json"))
            .arg("--trace")
            .arg(dir.join("trace.csv"))
            .status()
            .unwrap();
        assert!(status.success());
        let status = std::process::Command::new(bin)
            .env("RAYON_NUM_THREADS", threads)
            .args(["example", "g-complicated", "--out"])
            .arg(dir.join("example"))
            .status()
            .unwrap();
        assert!(status.success());
        let mut files = Vec::new();
        let mut stack = vec![dir.clone()];
        while let Some(d) = stack.pop() {
            let mut entries: Vec<_> = std::fs::read_dir(&d).unwrap().map(|e| e.unwrap()).collect();
            entries.sort_by_key(|e| e.path());
            for e in entries {
                let p = e.path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    let rel = p.strip_prefix(&dir).unwrap().to_string_lossy().into_owned();
                    files.push((rel, std::fs::read(&p).unwrap()));
                }
            }
        }
        files.sort_by(|a, b| a.0.cmp(&b.0));
        files
    };

    let first = run_cli("run1", "2");
    let second = run_cli("run2", "2");
    let single_worker = run_cli("run3", "1");
    assert_eq!(first.len(), second.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(second.iter()) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "re-run differs in {name_a}");
    }
    for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(single_worker.iter()) {
        assert_eq!(name_a, name_b);
        assert_eq!(bytes_a, bytes_b, "worker count changes {name_a}");
    }
    let _ = std::fs::remove_dir_all(&base);

    println!("acceptance criterion 9 (determinism): PASS");
}
