use std::fs;

use anyhow::{bail, Context};
use serde_json::{json, Map, Value};

use super::output::{csv_bytes, emit, format_sig6};
use super::{pool, FormatArg, SimulateArgs, SEED_ENV};
use crate::sim::{
    run_experiment, CodingConfig, Engine, ExperimentReport, RelayMode, Scheme, SimError,
};

pub const SIM_SCHEMA: &str = "sim.v1";

pub const SIM_HEADER: [&str; 16] = [
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
    "input_digest",
];

/// One experiment as read from the configuration file.
#[derive(Debug, Clone, PartialEq)]
pub(super) struct Job {
    pub config: CodingConfig,
    pub n_trials: usize,
    pub p_eps1: f64,
    pub p_eps2: f64,
}

#[derive(Clone, Copy)]
enum Kind {
    PositiveInt,
    Seed,
    Number,
    Probability,
    Choice(&'static [&'static str]),
}

const FIELDS: [(&str, Kind, bool); 10] = [
    ("k", Kind::PositiveInt, true),
    ("rate", Kind::Number, true),
    ("p_u", Kind::Probability, true),
    ("n_blocks", Kind::PositiveInt, true),
    ("n_trials", Kind::PositiveInt, true),
    ("p_eps1", Kind::Probability, true),
    ("p_eps2", Kind::Probability, true),
    ("typicality_eps", Kind::Number, false),
    (
        "relay_mode",
        Kind::Choice(&["symbol_switching", "simultaneous_discard"]),
        false,
    ),
    ("engine", Kind::Choice(&["explicit", "ensemble"]), false),
];

fn check_field(value: &Value, kind: Kind) -> Result<(), String> {
    match kind {
        Kind::PositiveInt => match value.as_u64() {
            Some(v) if v > 0 => Ok(()),
            _ => Err(format!("expected a positive integer, found {value}")),
        },
        Kind::Seed => value
            .as_u64()
            .map(|_| ())
            .ok_or_else(|| format!("expected an unsigned 64-bit integer, found {value}")),
        Kind::Number => value
            .as_f64()
            .map(|_| ())
            .ok_or_else(|| format!("expected a number, found {value}")),
        Kind::Probability => match value.as_f64() {
            Some(v) if (0.0..=1.0).contains(&v) => Ok(()),
            _ => Err(format!("expected a number in [0, 1], found {value}")),
        },
        Kind::Choice(options) => match value.as_str() {
            Some(s) if options.contains(&s) => Ok(()),
            _ => Err(format!(
                "expected one of {}, found {value}",
                options.join(", ")
            )),
        },
    }
}

/// Checks one configuration object, reporting every problem with its field.
fn parse_job(obj: &Value, label: &str, seed: Option<u64>) -> Result<Job, Vec<String>> {
    let Some(map) = obj.as_object() else {
        return Err(vec![format!("{label}: expected a JSON object")]);
    };
    let mut problems = Vec::new();
    for key in map.keys() {
        if key != "seed" && !FIELDS.iter().any(|(name, _, _)| name == key) {
            problems.push(format!("{label}.{key}: unknown field"));
        }
    }
    for (name, kind, required) in FIELDS {
        match map.get(name) {
            None if required => problems.push(format!("{label}.{name}: missing")),
            None => {}
            Some(v) => {
                if let Err(msg) = check_field(v, kind) {
                    problems.push(format!("{label}.{name}: {msg}"));
                }
            }
        }
    }
    let file_seed = match map.get("seed") {
        Some(v) => match check_field(v, Kind::Seed) {
            Ok(()) => v.as_u64(),
            Err(msg) => {
                problems.push(format!("{label}.seed: {msg}"));
                None
            }
        },
        None => None,
    };
    let seed = seed.or(file_seed).or_else(|| {
        std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
    });
    if seed.is_none() {
        problems.push(format!(
            "{label}.seed: missing; pass --seed, set it in the file or set {SEED_ENV}"
        ));
    }
    if !problems.is_empty() {
        return Err(problems);
    }

    let num = |k: &str| map[k].as_f64().expect("checked");
    let int = |k: &str| map[k].as_u64().expect("checked") as usize;
    let config = CodingConfig {
        k: int("k"),
        rate: num("rate"),
        p_u: num("p_u"),
        n_blocks: int("n_blocks"),
        typicality_eps: map.get("typicality_eps").and_then(Value::as_f64),
        relay_mode: match map.get("relay_mode").and_then(Value::as_str) {
            Some("simultaneous_discard") => RelayMode::SimultaneousDiscard,
            _ => RelayMode::SymbolSwitching,
        },
        seed: seed.expect("checked"),
        engine: match map.get("engine").and_then(Value::as_str) {
            Some("ensemble") => Engine::Ensemble,
            _ => Engine::Explicit,
        },
    };
    if let Err(SimError::InvalidConfig(list)) = config.validate() {
        return Err(list.into_iter().map(|p| format!("{label}.{p}")).collect());
    }
    Ok(Job {
        config,
        n_trials: int("n_trials"),
        p_eps1: num("p_eps1"),
        p_eps2: num("p_eps2"),
    })
}

/// Accepts a single object or an array of objects.
pub(super) fn parse_jobs(doc: &Value, seed: Option<u64>) -> anyhow::Result<Vec<Job>> {
    let items: Vec<(String, &Value)> = match doc {
        Value::Array(items) if items.is_empty() => bail!("configuration array is empty"),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("config[{i}]"), v))
            .collect(),
        other => vec![("config".to_string(), other)],
    };
    let mut jobs = Vec::new();
    let mut problems = Vec::new();
    for (label, item) in items {
        match parse_job(item, &label, seed) {
            Ok(job) => jobs.push(job),
            Err(list) => problems.extend(list),
        }
    }
    if !problems.is_empty() {
        bail!("invalid configuration:\n  {}", problems.join("\n  "));
    }
    Ok(jobs)
}

fn csv_row(job: &Job, r: &ExperimentReport) -> Vec<String> {
    vec![
        SIM_SCHEMA.to_string(),
        r.k.to_string(),
        format_sig6(r.rate),
        format_sig6(r.p_u),
        r.n_trials.to_string(),
        format_sig6(r.relay_err),
        format_sig6(r.dest_err),
        format_sig6(r.e2e_err),
        format_sig6(r.shortfall_freq),
        format_sig6(r.zero_fraction_mean),
        r.n_blocks.to_string(),
        r.message_bits.to_string(),
        format_sig6(r.effective_rate),
        r.hd_violations.to_string(),
        job.config.seed.to_string(),
        format!("{:016x}", r.decoder_input_digest),
    ]
}

pub(super) fn run(args: &SimulateArgs) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let doc: Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", args.config.display()))?;
    let jobs = parse_jobs(&doc, args.seed)?;
    let workers = pool(args.jobs)?;
    let mut reports = Vec::with_capacity(jobs.len());
    for (i, job) in jobs.iter().enumerate() {
        let scheme = Scheme::bsc(job.p_eps1, job.p_eps2)?;
        let report = workers
            .install(|| run_experiment(&job.config, &scheme, job.n_trials))
            .with_context(|| format!("experiment {i}"))?;
        reports.push(report);
    }

    let bytes = match args.format {
        FormatArg::Csv => {
            let rows: Vec<Vec<String>> = jobs
                .iter()
                .zip(&reports)
                .map(|(j, r)| csv_row(j, r))
                .collect();
            csv_bytes(&SIM_HEADER, &rows)?
        }
        FormatArg::Json => {
            let rows: Vec<Value> = jobs
                .iter()
                .zip(&reports)
                .map(|(j, r)| {
                    let mut obj = match serde_json::to_value(r).expect("report serializes") {
                        Value::Object(m) => m,
                        _ => Map::new(),
                    };
                    obj.insert("seed".into(), json!(j.config.seed));
                    obj.insert("p_eps1".into(), json!(j.p_eps1));
                    obj.insert("p_eps2".into(), json!(j.p_eps2));
                    Value::Object(obj)
                })
                .collect();
            let mut s =
                serde_json::to_string_pretty(&json!({ "schema": SIM_SCHEMA, "rows": rows }))?;
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(args.out.as_deref(), &bytes)?;

    let violations: u64 = reports.iter().map(|r| r.hd_violations).sum();
    if violations > 0 {
        eprintln!("half-duplex constraint violated {violations} times");
        return Ok(1);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Value {
        json!({
            "k": 8, "rate": 0.25, "p_u": 0.5, "n_blocks": 3, "n_trials": 10,
            "p_eps1": 0.0, "p_eps2": 0.0, "seed": 7
        })
    }

    #[test]
    fn parses_minimal_config() {
        let jobs = parse_jobs(&base(), None).unwrap();
        assert_eq!(jobs.len(), 1);
        assert_eq!(jobs[0].config.seed, 7);
        assert_eq!(jobs[0].config.relay_mode, RelayMode::SymbolSwitching);
        assert_eq!(parse_jobs(&base(), Some(9)).unwrap()[0].config.seed, 9);
    }

    #[test]
    fn reports_each_bad_field() {
        let doc = json!([base(), {
            "k": 0, "rate": "fast", "p_u": 2.0, "n_trials": 5,
            "p_eps1": 0.1, "p_eps2": 0.1, "seed": 1, "colour": "red",
            "relay_mode": "shouting"
        }]);
        let msg = parse_jobs(&doc, None).unwrap_err().to_string();
        for needle in [
            "config[1].k:",
            "config[1].rate:",
            "config[1].p_u:",
            "config[1].n_blocks: missing",
            "config[1].colour: unknown field",
            "config[1].relay_mode:",
        ] {
            assert!(msg.contains(needle), "{needle} not in {msg}");
        }
        assert!(!msg.contains("config[0]"));
    }
}
