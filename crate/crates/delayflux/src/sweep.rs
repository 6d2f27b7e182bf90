//! Parallel stability sweep.

use delayflux_core::diagnostics::{evaluate_point, SweepRecord, SweepSim};
use delayflux_core::ModelParams;
use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Grid points in sweep order: `alpha` outermost, then `m`, then `tau`.
pub fn points(alpha: &[f64], m: &[f64], tau: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(alpha.len() * m.len() * tau.len());
    for &a in alpha {
        for &mm in m {
            for &t in tau {
                out.push((a, mm, t));
            }
        }
    }
    out
}

/// Evaluates every point on `jobs` worker threads (all cores when `None`).
///
/// Records come back in [`points`] order whatever the scheduling. Invalid
/// parameters abort before any work starts; simulation failures are kept in
/// the record's `error` field.
pub fn run(
    alpha: &[f64],
    m: &[f64],
    tau: &[f64],
    confirm: bool,
    sim: &SweepSim,
    jobs: Option<usize>,
) -> Result<Vec<SweepRecord>> {
    let pts = points(alpha, m, tau);
    if pts.is_empty() {
        return Err(CliError::Usage("sweep grid is empty: set alpha, m and tau".into()));
    }
    for &(a, mm, t) in &pts {
        ModelParams::new(a, mm, t)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let out: delayflux_core::Result<Vec<SweepRecord>> = pool.install(|| {
        pts.par_iter()
            .map(|&(a, mm, t)| evaluate_point(a, mm, t, confirm, sim))
            .collect()
    });
    Ok(out?)
}
