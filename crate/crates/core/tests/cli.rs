use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hdrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdrelay"))
        .args(args)
        .env_remove("HDRELAY_SEED")
        .output()
        .expect("binary runs")
}

fn rows(csv: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(csv.to_vec()).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, body)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn capacity_bsc_error_free() {
    let out = hdrelay(&["capacity", "bsc", "--eps", "0", "0"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["capacity"].as_f64().unwrap() - 0.77291).abs() < 1e-4);
    assert_eq!(v["regime"], "crossing");
}

#[test]
fn capacity_bsc_useless_links() {
    let out = hdrelay(&["capacity", "bsc", "--eps", "0.5", "0.5"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["capacity"].as_f64().unwrap(), 0.0);
}

#[test]
fn capacity_rejects_bad_parameters() {
    let out = hdrelay(&["capacity", "bsc", "--eps", "0.7", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_eps1"));
    assert_eq!(
        hdrelay(&["capacity", "bsc", "--eps", "0.1"]).status.code(),
        Some(2)
    );
}

#[test]
fn capacity_awgn_sandwich() {
    let out = hdrelay(&["capacity", "awgn", "--snr-db", "10", "10"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let get = |k: &str| v[k].as_f64().unwrap();
    assert!(get("conventional_rate") <= get("gaussian_input_rate"));
    assert!(get("gaussian_input_rate") <= get("capacity_lower"));
    assert!(get("capacity_lower") <= get("upper_bound"));
}

#[test]
fn bsc_sweep_has_eleven_dominating_rows() {
    let out = hdrelay(&["sweep", "bsc", "--grid", "0", "0.5", "0.05"]);
    assert!(out.status.success());
    let (header, body) = rows(&out.stdout);
    assert_eq!(header, ["schema", "p_eps", "capacity", "conv"]);
    assert_eq!(body.len(), 11);
    for row in &body {
        assert_eq!(row[0], "sweep.v1");
        let cap: f64 = row[2].parse().unwrap();
        let conv: f64 = row[3].parse().unwrap();
        assert!(cap >= conv);
    }
}

#[test]
fn awgn_sweep_columns_grow_with_snr() {
    let out = hdrelay(&["sweep", "awgn", "--grid", "0", "30", "5"]);
    assert!(out.status.success());
    let (header, body) = rows(&out.stdout);
    assert_eq!(
        header,
        ["schema", "snr_db", "capacity", "conv", "gauss", "upper"]
    );
    assert_eq!(body.len(), 7);
    for c in 2..header.len() {
        let values: Vec<f64> = body.iter().map(|r| r[c].parse().unwrap()).collect();
        assert!(
            values.windows(2).all(|w| w[1] >= w[0]),
            "{}: {values:?}",
            header[c]
        );
    }
}

#[test]
fn sweep_usage_errors() {
    for args in [
        vec!["sweep", "bsc", "--grid", "0", "0.5", "0.05", "--curves", ""],
        vec!["sweep", "bsc", "--grid", "0", "0.5", "0"],
        vec!["sweep", "bsc", "--grid", "0.5", "0", "0.1"],
        vec![
            "sweep", "bsc", "--grid", "0", "0.5", "0.1", "--curves", "gauss",
        ],
        vec![
            "sweep",
            "awgn",
            "--grid",
            "0",
            "10",
            "5",
            "--curves",
            "capacity,nonsense",
        ],
    ] {
        assert_eq!(hdrelay(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_writes_selected_curves_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("offset.json");
    let out = hdrelay(&[
        "sweep",
        "awgn",
        "--grid",
        "0",
        "10",
        "10",
        "--snr-offset-db",
        "10",
        "--curves",
        "conv,upper",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], "sweep.v1");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    // Source hop at 10 dB, relay hop at 0 dB: c1 = ½log₂11, c2 = ½.
    let (c1, c2) = (0.5 * 11f64.log2(), 0.5);
    let conv = rows[0]["conv"].as_f64().unwrap();
    assert!((conv - c1 * c2 / (c1 + c2)).abs() < 1e-12);
    assert!(rows[0].get("capacity").is_none());
}

#[test]
fn failed_output_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no_such_dir").join("out.csv");
    let out = hdrelay(&[
        "sweep",
        "bsc",
        "--grid",
        "0",
        "0.5",
        "0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!path.exists());
}

#[test]
fn simulate_switching_example_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "switching.json",
        r#"{"k": 8, "rate": 0.25, "p_u": 0.5, "n_blocks": 3, "n_trials": 100,
            "p_eps1": 0.0, "p_eps2": 0.0, "seed": 6}"#,
    );
    let out = hdrelay(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let (header, body) = rows(&out.stdout);
    assert_eq!(
        header,
        [
            "schema",
            "k",
            "R",
            "P_U",
            "n_trials",
            "relay_err",
            "dest_err",
            "e2e_err",
            "shortfall_freq",
            "zero_fraction_mean",
            "n_blocks",
            "message_bits",
            "effective_rate",
            "hd_violations",
            "seed",
            "input_digest"
        ]
    );
    assert_eq!(body.len(), 1);
    assert_eq!(body[0][col(&header, "hd_violations")], "0");
}

#[test]
fn simulate_error_decay_rows() {
    // 0.8 of the BSC(0.05, 0.05) capacity at its optimal P_U.
    let cap: Value =
        serde_json::from_slice(&hdrelay(&["capacity", "bsc", "--eps", "0.05", "0.05"]).stdout)
            .unwrap();
    let rate = 0.8 * cap["capacity"].as_f64().unwrap();
    let p_u = cap["p_u_star"].as_f64().unwrap();
    let items: Vec<String> = [16, 32, 64]
        .iter()
        .map(|k| {
            format!(
                r#"{{"k": {k}, "rate": {rate}, "p_u": {p_u}, "n_blocks": 5, "n_trials": 500,
                   "p_eps1": 0.05, "p_eps2": 0.05, "typicality_eps": 0.15, "engine": "ensemble"}}"#
            )
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "decay.json", &format!("[{}]", items.join(",")));
    let out = hdrelay(&["simulate", &cfg, "--seed", "2024"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, body) = rows(&out.stdout);
    assert_eq!(body.len(), 3);
    let e2e: Vec<f64> = body
        .iter()
        .map(|r| r[col(&header, "e2e_err")].parse().unwrap())
        .collect();
    assert!(e2e.windows(2).all(|w| w[1] <= w[0]), "{e2e:?}");
}

#[test]
fn simulate_refuses_oversized_codebooks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "big.json",
        r#"{"k": 64, "rate": 0.5, "p_u": 0.5, "n_blocks": 2, "n_trials": 1, "p_eps1": 0, "p_eps2": 0, "seed": 1}"#,
    );
    let out = hdrelay(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the limit of 2^20"));
}

#[test]
fn simulate_lists_schema_problems_per_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"k": -3, "rate": 0.5, "p_u": "half", "n_trials": 10, "p_eps1": 0, "p_eps2": 0, "speed": 1}"#,
    );
    let out = hdrelay(&["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for field in [
        "config.k:",
        "config.p_u:",
        "config.n_blocks: missing",
        "config.speed: unknown field",
        "config.seed: missing",
    ] {
        assert!(err.contains(field), "{field} missing from {err}");
    }
}

#[test]
fn simulate_seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "noseed.json",
        r#"{"k": 8, "rate": 0.25, "p_u": 0.5, "n_blocks": 2, "n_trials": 20, "p_eps1": 0.1, "p_eps2": 0.1}"#,
    );
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_hdrelay"))
            .args(["simulate", &cfg])
            .env("HDRELAY_SEED", seed)
            .output()
            .unwrap()
    };
    let a = run("77");
    assert!(a.status.success());
    let (header, body) = rows(&a.stdout);
    assert_eq!(body[0][col(&header, "seed")], "77");
    let flag = hdrelay(&["simulate", &cfg, "--seed", "77"]);
    assert_eq!(a.stdout, flag.stdout);
}
