use anyhow::{bail, Context};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::output::{csv_bytes, emit, format_sig6};
use super::{pool, ChannelArg, FormatArg, SweepArgs};
use crate::awgn::{
    awgn_capacity_lower, awgn_conventional_rate, awgn_gaussian_input_rate, awgn_upper_bound,
    AwgnPair, SearchSpec,
};
use crate::bsc::{bsc_capacity, bsc_conventional_rate, BscPair};

/// Schema tag written in the first column of every sweep row.
pub const SWEEP_SCHEMA: &str = "sweep.v1";
const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Curve {
    Capacity,
    Conv,
    Gauss,
    Upper,
}

impl Curve {
    fn name(self) -> &'static str {
        match self {
            Curve::Capacity => "capacity",
            Curve::Conv => "conv",
            Curve::Gauss => "gauss",
            Curve::Upper => "upper",
        }
    }

    fn parse(s: &str) -> anyhow::Result<Self> {
        Ok(match s.trim() {
            "capacity" => Curve::Capacity,
            "conv" => Curve::Conv,
            "gauss" => Curve::Gauss,
            "upper" => Curve::Upper,
            other => bail!("unknown curve `{other}`; expected capacity, conv, gauss or upper"),
        })
    }
}

/// Grid points `lo, lo + step, …` up to and including `hi`.
pub(super) fn grid(lo: f64, hi: f64, step: f64) -> anyhow::Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        bail!("grid bounds and step must be finite");
    }
    if step <= 0.0 {
        bail!("grid step must be positive, got {step}");
    }
    if hi < lo {
        bail!("grid is empty: HI ({hi}) is below LO ({lo})");
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    if n > MAX_GRID_POINTS {
        bail!("grid has {n} points, more than the limit of {MAX_GRID_POINTS}");
    }
    // Snap to 12 decimals so that 0.1 + 0.2 style drift does not leak out.
    Ok((0..n)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn curves(args: &SweepArgs) -> anyhow::Result<Vec<Curve>> {
    let defaults = match args.channel {
        ChannelArg::Bsc => vec![Curve::Capacity, Curve::Conv],
        ChannelArg::Awgn => vec![Curve::Capacity, Curve::Conv, Curve::Gauss, Curve::Upper],
    };
    let Some(names) = &args.curves else {
        return Ok(defaults);
    };
    let names: Vec<&String> = names.iter().filter(|s| !s.trim().is_empty()).collect();
    if names.is_empty() {
        bail!("--curves is empty; pick at least one of capacity, conv, gauss, upper");
    }
    let mut out = Vec::new();
    for name in names {
        let c = Curve::parse(name)?;
        if !defaults.contains(&c) {
            bail!("curve `{}` is only defined for awgn sweeps", c.name());
        }
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn bsc_point(eps: f64, curves: &[Curve]) -> anyhow::Result<Vec<f64>> {
    let pair = BscPair::new(eps, eps).with_context(|| format!("grid point {eps}"))?;
    Ok(curves
        .iter()
        .map(|c| match c {
            Curve::Capacity => bsc_capacity(pair).capacity,
            _ => bsc_conventional_rate(pair),
        })
        .collect())
}

fn awgn_point(
    snr2_db: f64,
    offset_db: f64,
    curves: &[Curve],
    search: &SearchSpec,
) -> anyhow::Result<Vec<f64>> {
    let pair = AwgnPair::from_db(snr2_db + offset_db, snr2_db)
        .with_context(|| format!("grid point {snr2_db} dB"))?;
    curves
        .iter()
        .map(|c| {
            Ok(match c {
                Curve::Capacity => awgn_capacity_lower(&pair, search)?.capacity,
                Curve::Conv => awgn_conventional_rate(&pair),
                Curve::Gauss => awgn_gaussian_input_rate(&pair, &search.quad)?,
                Curve::Upper => awgn_upper_bound(&pair),
            })
        })
        .collect()
}

pub(super) fn run(args: &SweepArgs) -> anyhow::Result<()> {
    let points = grid(args.grid[0], args.grid[1], args.grid[2])?;
    let curves = curves(args)?;
    if args.channel == ChannelArg::Bsc && args.snr_offset_db != 0.0 {
        bail!("--snr-offset-db applies to awgn sweeps only");
    }
    let search = args.search.spec();
    let rows: Vec<Vec<f64>> = pool(args.jobs)?.install(|| {
        points
            .par_iter()
            .map(|&x| match args.channel {
                ChannelArg::Bsc => bsc_point(x, &curves),
                ChannelArg::Awgn => awgn_point(x, args.snr_offset_db, &curves, &search),
            })
            .collect::<anyhow::Result<_>>()
    })?;

    let parameter = match args.channel {
        ChannelArg::Bsc => "p_eps",
        ChannelArg::Awgn => "snr_db",
    };
    let bytes = match args.format {
        FormatArg::Csv => {
            let mut header = vec!["schema", parameter];
            header.extend(curves.iter().map(|c| c.name()));
            let table: Vec<Vec<String>> = points
                .iter()
                .zip(&rows)
                .map(|(x, vals)| {
                    let mut row = vec![SWEEP_SCHEMA.to_string(), format_sig6(*x)];
                    row.extend(vals.iter().map(|v| format_sig6(*v)));
                    row
                })
                .collect();
            csv_bytes(&header, &table)?
        }
        FormatArg::Json => {
            let rows: Vec<Value> = points
                .iter()
                .zip(&rows)
                .map(|(x, vals)| {
                    let mut obj = Map::new();
                    obj.insert(parameter.into(), json!(x));
                    for (c, v) in curves.iter().zip(vals) {
                        obj.insert(c.name().into(), json!(v));
                    }
                    Value::Object(obj)
                })
                .collect();
            let doc = json!({
                "schema": SWEEP_SCHEMA,
                "channel": match args.channel { ChannelArg::Bsc => "bsc", ChannelArg::Awgn => "awgn" },
                "snr_offset_db": if args.channel == ChannelArg::Awgn { Some(args.snr_offset_db) } else { None },
                "rows": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(args.out.as_deref(), &bytes)
}
