//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! with the measured values. Tests hold a shared lock so that the runtime
//! limits are measured without contention.

use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use hdrelay::awgn::{
    awgn_capacity_lower, awgn_capacity_with_distribution, awgn_conventional_rate,
    awgn_gaussian_input_rate, awgn_upper_bound, published_distribution, AwgnPair, PublishedSet,
    SearchSpec,
};
use hdrelay::bsc::{bsc_capacity, bsc_conventional_rate, bsc_rate_curves, BscPair};
use hdrelay::prob::{relay_mutual_information, ConditionalPmf, Pmf, RelayInputModel};
use hdrelay::quadrature::{mixture_entropy, GaussianComponent, QuadratureSpec};
use hdrelay::sim::{run_experiment, CodingConfig, Engine, Experiment, RelayMode, Scheme};
use hdrelay::solver::{solve_capacity, SolverOptions};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

struct Verdict {
    id: u32,
    start: Instant,
    limit: Duration,
    checks: Vec<(String, bool)>,
}

impl Verdict {
    fn new(id: u32, limit_secs: u64) -> Self {
        Self {
            id,
            start: Instant::now(),
            limit: Duration::from_secs(limit_secs),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push((what.into(), ok));
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        self.check(
            elapsed < self.limit,
            format!(
                "runtime {:.2}s < {}s",
                elapsed.as_secs_f64(),
                self.limit.as_secs()
            ),
        );
        let pass = self.checks.iter().all(|(_, ok)| *ok);
        println!(
            "criterion {}: {}",
            self.id,
            if pass { "PASS" } else { "FAIL" }
        );
        for (what, ok) in &self.checks {
            println!("    [{}] {what}", if *ok { "ok" } else { "FAILED" });
        }
        assert!(pass, "criterion {} failed", self.id);
    }
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_hdrelay"))
        .args(args)
        .env_remove("HDRELAY_SEED")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli_json(args: &[&str]) -> Value {
    let (code, stdout) = cli(args);
    assert_eq!(code, 0, "{args:?}");
    serde_json::from_slice(&stdout).expect("JSON output")
}

#[test]
fn criterion_01_bsc_error_free_point() {
    let _g = serial();
    let mut v = Verdict::new(1, 1);
    let out = cli_json(&["capacity", "bsc", "--eps", "0", "0"]);
    let cap = out["capacity"].as_f64().unwrap();
    let p = out["p_u_star"].as_f64().unwrap();
    let residual = (1.0 - p - h2(p)).abs();
    v.check(
        (cap - 0.77291).abs() <= 1e-4,
        format!("capacity {cap:.8} within 1e-4 of 0.77291"),
    );
    v.check(
        residual <= 1e-8,
        format!("|1 - P_U* - H(P_U*)| = {residual:.2e} <= 1e-8"),
    );
    v.finish();
}

#[test]
fn criterion_02_conventional_bsc_baseline() {
    let _g = serial();
    let mut v = Verdict::new(2, 1);
    let out = cli_json(&["capacity", "bsc", "--eps", "0", "0"]);
    let conv = out["conventional_rate"].as_f64().unwrap();
    let ratio = out["capacity"].as_f64().unwrap() / conv;
    v.check(conv == 0.5, format!("R_conv = {conv} is exactly 0.5"));
    v.check(
        (ratio - 1.5458).abs() <= 1e-3,
        format!("capacity / R_conv = {ratio:.6} within 1e-3 of 1.5458"),
    );
    v.finish();
}

#[test]
fn criterion_03_bsc_dominance_sweep() {
    let _g = serial();
    let mut v = Verdict::new(3, 5);
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    for i in 0..=25 {
        let eps = 0.02 * f64::from(i);
        let pair = BscPair::new(eps, eps).unwrap();
        let cap = bsc_capacity(pair).capacity;
        let conv = bsc_conventional_rate(pair);
        let both_zero = cap.abs() < 1e-12 && conv.abs() < 1e-12;
        if both_zero {
            continue;
        }
        worst = worst.min(cap - conv);
        if cap <= conv {
            bad.push(eps);
        }
    }
    v.check(
        bad.is_empty(),
        format!("capacity > R_conv except where both vanish; failures at {bad:?}"),
    );
    v.check(
        worst > 0.0,
        format!("smallest gap where non-zero: {worst:.3e}"),
    );
    let last = bsc_capacity(BscPair::new(0.5, 0.5).unwrap()).capacity;
    v.check(
        last.abs() < 1e-12,
        format!("capacity at P_eps = 0.5 is {last:.1e}"),
    );
    v.finish();
}

#[test]
fn criterion_04_awgn_published_distributions() {
    let _g = serial();
    let mut v = Verdict::new(4, 30);
    let quad = QuadratureSpec::default();
    for set in [PublishedSet::Snr10Db, PublishedSet::Snr15Db] {
        let db = set.snr_db();
        let pair = AwgnPair::from_db(db, db).unwrap();
        match awgn_capacity_with_distribution(&pair, &published_distribution(set), &quad) {
            Ok(sol) => {
                let conv = awgn_conventional_rate(&pair);
                let upper = awgn_upper_bound(&pair);
                v.check(
                    (sol.r1_at_opt - sol.r2_at_opt).abs() < 1e-6,
                    format!(
                        "{db} dB: crossing solved at P_U = {:.6} (r1 - r2 = {:.1e})",
                        sol.p_u_star,
                        sol.r1_at_opt - sol.r2_at_opt
                    ),
                );
                v.check(
                    conv < sol.capacity && sol.capacity <= upper,
                    format!(
                        "{db} dB: R_conv {conv:.6} < C_L {:.6} <= C_Upper {upper:.6}",
                        sol.capacity
                    ),
                );
            }
            Err(e) => v.check(false, format!("{db} dB: crossing failed: {e}")),
        }
    }
    v.finish();
}

#[test]
fn criterion_05_awgn_sandwich_sweep() {
    let _g = serial();
    let mut v = Verdict::new(5, 300);
    let search = SearchSpec::default();
    let mut gaps = Vec::new();
    for db in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let pair = AwgnPair::from_db(db, db).unwrap();
        let conv = awgn_conventional_rate(&pair);
        let gauss = awgn_gaussian_input_rate(&pair, &search.quad).unwrap();
        let lower = awgn_capacity_lower(&pair, &search).unwrap().capacity;
        let upper = awgn_upper_bound(&pair);
        let ordered = gauss - conv >= -1e-6 && lower - gauss >= -1e-6 && upper - lower >= -1e-6;
        v.check(
            ordered,
            format!("{db:>4} dB: R_conv {conv:.5} <= R_Gauss {gauss:.5} <= C_L {lower:.5} <= C_Upper {upper:.5}"),
        );
        gaps.push((db, upper - lower));
    }
    let tail: Vec<f64> = gaps
        .iter()
        .filter(|(db, _)| *db >= 10.0)
        .map(|g| g.1)
        .collect();
    v.check(
        tail.windows(2).all(|w| w[1] < w[0]),
        format!("C_Upper - C_L over 10, 15, 20 dB shrinks: {tail:.5?}"),
    );
    v.finish();
}

#[test]
fn criterion_06_quadrature_oracle() {
    let _g = serial();
    let mut v = Verdict::new(6, 1);
    let quad = QuadratureSpec::default();
    for sigma in [0.1, 1.0, 10.0] {
        let h = mixture_entropy(
            &[GaussianComponent {
                weight: 1.0,
                mean: 0.0,
                sd: sigma,
            }],
            &quad,
        )
        .unwrap();
        let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).log2();
        v.check(
            (h - exact).abs() <= 1e-6,
            format!("sigma {sigma}: quadrature {h:.10} vs {exact:.10}"),
        );
    }
    v.finish();
}

#[test]
fn criterion_07_generic_matches_closed_form() {
    let _g = serial();
    let mut v = Verdict::new(7, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let e2: f64 = rng.gen_range(0.0..=0.5);
        let p_u: f64 = rng.gen_range(0.0..=1.0);
        let model = RelayInputModel::new(p_u, Pmf::point(1)).unwrap();
        let generic = relay_mutual_information(&model, &ConditionalPmf::bsc(e2).unwrap()).unwrap();
        let a = e2 * (1.0 - 2.0 * p_u) + p_u;
        worst = worst.max((generic - (h2(a) - h2(e2))).abs());
    }
    v.check(
        worst <= 1e-10,
        format!("largest |generic - closed form| over 100 pairs: {worst:.2e}"),
    );
    v.finish();
}

fn sim_config(k: usize, rate: f64, p_u: f64, n_blocks: usize) -> CodingConfig {
    CodingConfig {
        k,
        rate,
        p_u,
        n_blocks,
        typicality_eps: Some(0.15),
        relay_mode: RelayMode::SymbolSwitching,
        seed: 2024,
        engine: Engine::Ensemble,
    }
}

#[test]
fn criterion_08_coding_simulator() {
    let _g = serial();
    let mut v = Verdict::new(8, 600);
    let cap = bsc_capacity(BscPair::new(0.05, 0.05).unwrap());
    let scheme = Scheme::bsc(0.05, 0.05).unwrap();
    let trials = 500;
    let mut violations = 0;

    // (b) error decay at 0.8·C.
    let mut below = Vec::new();
    for k in [16, 32, 64] {
        let r = run_experiment(
            &sim_config(k, 0.8 * cap.capacity, cap.p_u_star, 5),
            &scheme,
            trials,
        )
        .unwrap();
        violations += r.hd_violations;
        below.push(r);
    }
    let e2e: Vec<f64> = below.iter().map(|r| r.e2e_err).collect();
    let n = (trials * 5) as f64;
    let sd = |p: f64| (p * (1.0 - p) / n).sqrt();
    let mut inversions = 0;
    let mut significant = false;
    for w in e2e.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            significant |= w[1] - w[0] > 2.0 * (sd(w[0]).powi(2) + sd(w[1]).powi(2)).sqrt();
        }
    }
    v.check(
        inversions <= 1 && !significant,
        format!("(b) e2e error at 0.8C over k = 16, 32, 64: {e2e:.4?}, {inversions} inversion(s)"),
    );

    // (c) above-capacity failure at k = 64.
    let above = run_experiment(
        &sim_config(64, 1.2 * cap.capacity, cap.p_u_star, 5),
        &scheme,
        trials,
    )
    .unwrap();
    violations += above.hd_violations;
    let gap = above.e2e_err - below[2].e2e_err;
    v.check(
        gap >= 0.3,
        format!(
            "(c) e2e error at 1.2C minus 0.8C, k = 64: {:.4} - {:.4} = {gap:.4} >= 0.3",
            above.e2e_err, below[2].e2e_err
        ),
    );

    // (d) both relay modes feed the decoders the same inputs.
    let mut identical = true;
    for engine in [Engine::Explicit, Engine::Ensemble] {
        let mut a = sim_config(16, 0.4, 0.4, 4);
        a.engine = engine;
        let mut b = a.clone();
        b.relay_mode = RelayMode::SimultaneousDiscard;
        let (ea, eb) = (
            Experiment::new(&a, &scheme).unwrap(),
            Experiment::new(&b, &scheme).unwrap(),
        );
        for t in 0..100 {
            let (ra, ta) = ea.run_trial(t, true).unwrap();
            let (rb, tb) = eb.run_trial(t, true).unwrap();
            violations += ra.hd_violations + rb.hd_violations;
            identical &= ra.decoder_input_digest == rb.decoder_input_digest;
            for (x, y) in ta.unwrap().iter().zip(&tb.unwrap()) {
                identical &= x.y1r == y.y1r && x.y2 == y.y2;
                identical &=
                    x.relay_decision == y.relay_decision && x.dest_decision == y.dest_decision;
            }
        }
        let ra = run_experiment(&a, &scheme, 200).unwrap();
        let rb = run_experiment(&b, &scheme, 200).unwrap();
        violations += ra.hd_violations + rb.hd_violations;
        identical &= ra.decoder_input_digest == rb.decoder_input_digest;
    }
    v.check(
        identical,
        "(d) switching and discard modes give bit-identical decoder inputs",
    );

    // (e) effective rate at N = 20.
    let cfg = sim_config(32, 0.5, 0.3, 20);
    let r = run_experiment(&cfg, &scheme, 4).unwrap();
    violations += r.hd_violations;
    let closed = 20.0 * 16.0 / (32.0 * 21.0);
    v.check(
        r.effective_rate == closed && (0.5 - r.effective_rate) <= 0.5 / 21.0 + 1e-15,
        format!(
            "(e) effective rate {} equals N·kR/(k(N+1)) = {closed}",
            r.effective_rate
        ),
    );

    v.check(
        violations == 0,
        format!("(a) half-duplex violations across all runs: {violations}"),
    );
    v.finish();
}

/// Exhaustive max-min on a uniform grid, using its own rate formulas.
fn grid_capacity(e1: f64, e2: f64, step: f64) -> f64 {
    let n = (1.0 / step).round() as usize;
    (0..=n)
        .map(|i| {
            let p = i as f64 * step;
            let r1 = (1.0 - h2(e1)) * (1.0 - p);
            let r2 = h2(e2 * (1.0 - 2.0 * p) + p) - h2(e2);
            r1.min(r2)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn criterion_09_solver_oracle() {
    let _g = serial();
    let mut v = Verdict::new(9, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (e1, e2) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
        let sol = solve_capacity(
            &bsc_rate_curves(BscPair::new(e1, e2).unwrap()),
            &SolverOptions::default(),
        );
        worst = worst.max((sol.capacity - grid_capacity(e1, e2, 1e-5)).abs());
    }
    v.check(
        worst <= 1e-4,
        format!("largest |solver - 1e-5 grid| over 20 instances: {worst:.2e}"),
    );
    v.finish();
}

#[test]
fn criterion_10_determinism() {
    let _g = serial();
    let mut v = Verdict::new(10, 600);
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sim.json");
    std::fs::write(
        &config,
        r#"[
  {"k": 16, "rate": 0.4358, "p_u": 0.2366, "n_blocks": 5, "n_trials": 200, "p_eps1": 0.05, "p_eps2": 0.05,
   "typicality_eps": 0.15, "engine": "ensemble", "seed": 2024},
  {"k": 8, "rate": 0.25, "p_u": 0.5, "n_blocks": 3, "n_trials": 200, "p_eps1": 0.0, "p_eps2": 0.0, "seed": 6}
]"#,
    )
    .unwrap();
    let config = config.to_str().unwrap();
    let runs: [(&str, Vec<&str>); 7] = [
        (
            "capacity bsc JSON",
            vec!["capacity", "bsc", "--eps", "0", "0"],
        ),
        (
            "capacity awgn JSON",
            vec!["capacity", "awgn", "--snr-db", "10", "10"],
        ),
        (
            "bsc sweep CSV",
            vec!["sweep", "bsc", "--grid", "0", "0.5", "0.02"],
        ),
        (
            "bsc sweep JSON",
            vec![
                "sweep", "bsc", "--grid", "0", "0.5", "0.02", "--format", "json",
            ],
        ),
        (
            "awgn sweep CSV",
            vec!["sweep", "awgn", "--grid", "0", "10", "5"],
        ),
        ("simulate CSV", vec!["simulate", config]),
        (
            "simulate JSON",
            vec!["simulate", config, "--format", "json", "--jobs", "1"],
        ),
    ];
    for (name, args) in &runs {
        let (c1, a) = cli(args);
        let (c2, b) = cli(args);
        v.check(
            c1 == 0 && c2 == 0 && !a.is_empty() && a == b,
            format!("{name}: identical bytes over two runs"),
        );
    }

    // Library-level solutions serialized twice.
    let snapshot = || {
        let pair = AwgnPair::from_db(10.0, 10.0).unwrap();
        let published = awgn_capacity_with_distribution(
            &pair,
            &published_distribution(PublishedSet::Snr10Db),
            &QuadratureSpec::default(),
        )
        .unwrap();
        let bsc = solve_capacity(
            &bsc_rate_curves(BscPair::new(0.1, 0.2).unwrap()),
            &SolverOptions::default(),
        );
        serde_json::to_string(&(published, bsc)).unwrap()
    };
    v.check(
        snapshot() == snapshot(),
        "library solutions serialize identically",
    );
    v.finish();
}
