//! Oscillation analysis of boundary series and stability maps.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fd::{simulate_with, Grid, SimOptions, Trajectory};
use crate::model::{InitialData, ModelParams, Profile, SteadyState};
use crate::spectral::{classify_gain, crossing_frequency, Regime};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Decaying,
    Sustained,
    Converged,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Decaying => "Decaying",
            Verdict::Sustained => "Sustained",
            Verdict::Converged => "Converged",
            Verdict::Indeterminate => "Indeterminate",
        }
    }

    pub fn is_stable(self) -> Option<bool> {
        match self {
            Verdict::Decaying | Verdict::Converged => Some(true),
            Verdict::Sustained => Some(false),
            Verdict::Indeterminate => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnalyzeOptions {
    /// Fraction of the run discarded before looking for peaks.
    pub transient_frac: f64,
    /// Half-width of the sustained band around an amplitude ratio of 1.
    pub eps_s: f64,
    /// Largest post-transient `|q - c|` still counted as converged.
    pub converge_tol: f64,
    /// Peaks considered for the amplitude ratio and sustained test.
    pub window_peaks: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            transient_frac: 0.5,
            eps_s: 0.05,
            converge_tol: 1e-2,
            window_peaks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OscillationReport {
    /// Local maxima `(t, q - c)` after the transient.
    pub peaks: Vec<(f64, f64)>,
    /// Geometric mean of successive peak ratios over the last peaks.
    pub amp_ratio: Option<f64>,
    /// Mean peak spacing.
    pub period_est: Option<f64>,
    pub verdict: Verdict,
}

/// Classifies `q(0, t)` relative to the steady value `c`.
///
/// Peaks are three-point local maxima of `q - c`, refined by a parabola
/// through the neighbours. Maxima within `1e-6 max(1, c)` of the steady value
/// are discretization noise and are skipped.
pub fn analyze(traj: &Trajectory, c: f64, opts: &AnalyzeOptions) -> OscillationReport {
    let (ts, qs) = (&traj.times, &traj.q0);
    let n = ts.len();
    let mut report = OscillationReport {
        peaks: Vec::new(),
        amp_ratio: None,
        period_est: None,
        verdict: Verdict::Indeterminate,
    };
    if n < 3 {
        return report;
    }
    let t_cut = ts[0] + opts.transient_frac * (ts[n - 1] - ts[0]);
    let start = ts.partition_point(|t| *t < t_cut).max(1);
    let floor = 1e-6 * c.max(1.0);

    for i in start..n - 1 {
        let (a, b, d) = (qs[i - 1] - c, qs[i] - c, qs[i + 1] - c);
        if b > a && b >= d && b > floor {
            report.peaks.push(refine_peak(ts[i - 1], ts[i], ts[i + 1], a, b, d));
        }
    }

    let window = &report.peaks[report.peaks.len().saturating_sub(opts.window_peaks.max(2))..];
    if window.len() >= 2 {
        let (first, last) = (window[0].1, window[window.len() - 1].1);
        report.amp_ratio = Some((last / first).powf(1.0 / (window.len() - 1) as f64));
    }
    if report.peaks.len() >= 2 {
        let k = report.peaks.len();
        report.period_est = Some((report.peaks[k - 1].0 - report.peaks[0].0) / (k - 1) as f64);
    }

    let post_dev = qs[start - 1..].iter().map(|q| (q - c).abs()).fold(0.0, f64::max);
    let in_band = |r: f64| (r - 1.0).abs() <= opts.eps_s;
    report.verdict = match report.amp_ratio {
        Some(r) if window.len() >= opts.window_peaks && in_band(r) => Verdict::Sustained,
        _ if post_dev <= opts.converge_tol => Verdict::Converged,
        Some(r) if report.peaks.len() >= 3 && r < 1.0 - opts.eps_s => Verdict::Decaying,
        _ => Verdict::Indeterminate,
    };
    report
}

fn refine_peak(t0: f64, t1: f64, t2: f64, a: f64, b: f64, d: f64) -> (f64, f64) {
    let h = 0.5 * (t2 - t0);
    let denom = a - 2.0 * b + d;
    if denom >= 0.0 || (t1 - t0 - h).abs() > 1e-9 * h.max(1.0) {
        return (t1, b);
    }
    let off = 0.5 * (a - d) / denom;
    (t1 + off * h, b - 0.25 * (a - d) * off)
}

/// Relative error of the measured period against `2 pi / sqrt(Q^4 - 1)`.
pub fn period_check(report: &OscillationReport, q: f64) -> Result<f64> {
    if report.verdict != Verdict::Sustained {
        return Err(Error::Precondition(alloc::format!(
            "period check needs a sustained oscillation (verdict {})",
            report.verdict.as_str()
        )));
    }
    let period = report
        .period_est
        .ok_or_else(|| Error::Precondition("no period estimate".into()))?;
    let expected = 2.0 * core::f64::consts::PI / crossing_frequency(q)?;
    Ok((period - expected).abs() / expected)
}

/// Settings for the confirming simulation at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepSim {
    pub l: f64,
    pub nx: usize,
    /// Upper bound on the time step; also capped at `tau / 100`.
    pub dt_max: f64,
    /// Horizon in delay windows.
    pub windows: f64,
    /// Horizon floor for short or zero delays.
    pub min_horizon: f64,
    /// Initial field is `amplitude * c * e^{-x}`.
    pub amplitude: f64,
}

impl Default for SweepSim {
    fn default() -> Self {
        Self {
            l: 15.0,
            nx: 300,
            dt_max: 2e-3,
            windows: 60.0,
            min_horizon: 60.0,
            amplitude: 2.0,
        }
    }
}

/// One point of a stability map.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct SweepRecord {
    pub alpha: f64,
    pub m: f64,
    pub tau: f64,
    pub c: f64,
    pub Q: f64,
    pub tau0: Option<f64>,
    pub analytic_verdict: Regime,
    pub sim_verdict: Option<Verdict>,
    pub amp_ratio: Option<f64>,
    pub period_est: Option<f64>,
    /// Both verdicts are definite and disagree.
    pub mismatch: bool,
    /// Simulation failure, recorded instead of aborting the sweep.
    pub error: Option<String>,
}

/// Analytic verdict and, with `confirm`, a simulated one.
pub fn evaluate_point(alpha: f64, m: f64, tau: f64, confirm: bool, sim: &SweepSim) -> Result<SweepRecord> {
    let params = ModelParams::new(alpha, m, tau)?;
    let ss = SteadyState::new(alpha, m)?;
    let verdict = classify_gain(ss.Q, tau);
    let mut rec = SweepRecord {
        alpha,
        m,
        tau,
        c: ss.c,
        Q: ss.Q,
        tau0: verdict.tau0,
        analytic_verdict: verdict.regime,
        sim_verdict: None,
        amp_ratio: None,
        period_est: None,
        mismatch: false,
        error: None,
    };
    if !confirm {
        return Ok(rec);
    }
    let horizon = (sim.windows * tau).max(sim.min_horizon);
    let dt = if tau > 0.0 {
        sim.dt_max.min(tau / 100.0)
    } else {
        sim.dt_max
    };
    let stride = ((horizon / dt) / 20_000.0).floor().max(1.0) as usize;
    let run = Grid::new(sim.l, sim.nx, dt, horizon).and_then(|grid| {
        let f = Profile::Exponential {
            amplitude: sim.amplitude * ss.c,
            rate: 1.0,
        };
        let data = InitialData::with_constant_history(f)?;
        simulate_with(
            &params,
            &data,
            &grid,
            &SimOptions {
                record_stride: stride,
                ..Default::default()
            },
        )
    });
    match run {
        Ok(traj) => {
            let report = analyze(&traj, ss.c, &AnalyzeOptions::default());
            rec.sim_verdict = Some(report.verdict);
            rec.amp_ratio = report.amp_ratio;
            rec.period_est = report.period_est;
            rec.mismatch = matches!(
                (verdict.regime.is_stable(), report.verdict.is_stable()),
                (Some(a), Some(b)) if a != b
            );
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    Ok(rec)
}

/// Row-major sweep over `alpha`, then `m`, then `tau`.
pub fn stability_sweep(
    alpha_grid: &[f64],
    m_grid: &[f64],
    tau_grid: &[f64],
    confirm: bool,
    sim: &SweepSim,
) -> Vec<Result<SweepRecord>> {
    let mut out = Vec::with_capacity(alpha_grid.len() * m_grid.len() * tau_grid.len());
    for &a in alpha_grid {
        for &m in m_grid {
            for &t in tau_grid {
                out.push(evaluate_point(a, m, t, confirm, sim));
            }
        }
    }
    out
}
