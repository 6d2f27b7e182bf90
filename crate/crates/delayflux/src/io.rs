//! CSV and JSON files.
//!
//! Floats are written as `{:.16e}` (17 significant digits) so that every
//! value reads back bit-for-bit. Missing values are empty fields.

use std::fs::File;
use std::path::Path;

use delayflux_core::diagnostics::SweepRecord;
use delayflux_core::fd::Trajectory;
use delayflux_core::greens::IterationRecord;
use delayflux_core::Profile;
use serde::Serialize;

use crate::error::{CliError, Result};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(e) => CliError::io(path, e),
        other => CliError::Format {
            path: path.to_owned(),
            msg: format!("{other:?}"),
        },
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Boundary series as `t,q0`.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let rows = traj.times.iter().zip(&traj.q0).map(|(t, q)| [fmt_f64(*t), fmt_f64(*q)]);
    write_rows(path, &["t", "q0"], rows)
}

/// Field snapshots in long format `t,x,q`.
pub fn write_snapshots(path: &Path, traj: &Trajectory) -> Result<()> {
    let rows = traj.snapshots.iter().flat_map(|s| {
        traj.x
            .iter()
            .zip(&s.field)
            .map(move |(x, q)| [fmt_f64(s.t), fmt_f64(*x), fmt_f64(*q)])
    });
    write_rows(path, &["t", "x", "q"], rows)
}

/// A lattice field in long format `t,x,q`; `value(n, i)` is the value at `ts[n]`, `xs[i]`.
pub fn write_field(path: &Path, ts: &[f64], xs: &[f64], value: impl Fn(usize, usize) -> f64) -> Result<()> {
    let value = &value;
    let rows = ts.iter().enumerate().flat_map(|(n, t)| {
        xs.iter()
            .enumerate()
            .map(move |(i, x)| [fmt_f64(*t), fmt_f64(*x), fmt_f64(value(n, i))])
    });
    write_rows(path, &["t", "x", "q"], rows)
}

pub fn write_iteration(path: &Path, history: &[IterationRecord]) -> Result<()> {
    let rows = history
        .iter()
        .map(|r| [r.k.to_string(), fmt_f64(r.sup_gap), fmt_f64(r.min_ordering_slack)]);
    write_rows(path, &["k", "sup_gap", "min_ordering_slack"], rows)
}

pub const SWEEP_HEADER: [&str; 10] = [
    "alpha",
    "m",
    "tau",
    "Q",
    "tau0",
    "analytic_verdict",
    "sim_verdict",
    "amp_ratio",
    "period_est",
    "mismatch",
];

pub fn sweep_row(r: &SweepRecord) -> [String; 10] {
    [
        fmt_f64(r.alpha),
        fmt_f64(r.m),
        fmt_f64(r.tau),
        fmt_f64(r.Q),
        fmt_opt(r.tau0),
        r.analytic_verdict.as_str().to_owned(),
        r.sim_verdict.map(|v| v.as_str().to_owned()).unwrap_or_default(),
        fmt_opt(r.amp_ratio),
        fmt_opt(r.period_est),
        r.mismatch.to_string(),
    ]
}

pub fn write_sweep(path: &Path, records: &[SweepRecord]) -> Result<()> {
    write_rows(path, &SWEEP_HEADER, records.iter().map(sweep_row))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Reads a two-column CSV with the given header into `(knots, values)`.
pub fn read_columns(path: &Path, key: &str, val: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let bad = |msg: String| CliError::Format {
        path: path.to_owned(),
        msg,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() != 2 || &header[0] != key || &header[1] != val {
        return Err(bad(format!(
            "expected header `{key},{val}`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let (mut ks, mut vs) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: `{}`: {e}", line + 2, &rec[i])))
        };
        ks.push(num(0)?);
        vs.push(num(1)?);
    }
    Ok((ks, vs))
}

/// Initial field from an `x,f` file; `x` must start at 0.
pub fn read_profile(path: &Path, key: &str, val: &str) -> Result<Profile> {
    let (xs, fs) = read_columns(path, key, val)?;
    if xs.first() != Some(&0.0) {
        return Err(CliError::Format {
            path: path.to_owned(),
            msg: "first x must be 0".into(),
        });
    }
    Profile::sampled(xs, fs).map_err(|e| CliError::Format {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

/// History from a `t,h` file covering `[-tau, 0]`; the last `t` must be 0.
pub fn read_history(path: &Path) -> Result<Profile> {
    let (ts, hs) = read_columns(path, "t", "h")?;
    if ts.last() != Some(&0.0) {
        return Err(CliError::Format {
            path: path.to_owned(),
            msg: "last t must be 0".into(),
        });
    }
    Profile::sampled(ts, hs).map_err(|e| CliError::Format {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}
