//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use delayflux_core::diagnostics::analyze;
use delayflux_core::fd::simulate_with;
use delayflux_core::greens::monotone_iterate;
use delayflux_core::model::flux;
use delayflux_core::spectral::{classify_gain, HopfAnalysis};
use delayflux_core::SteadyState;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::{io, sweep, validate};

#[derive(Debug, Parser)]
#[command(
    name = "delayflux",
    version,
    about = "Delayed-flux reaction-diffusion: steady states, Hopf thresholds and simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Steady boundary value c and feedback gain Q.
    Steady,
    /// Hopf threshold, crossing frequency and crossing speed.
    Hopf,
    /// Finite-difference run with oscillation report.
    Simulate,
    /// Monotone upper/lower iteration (tau = 0).
    Iterate,
    /// Stability map over a parameter grid.
    Sweep,
    /// Kernel identities and solver cross-checks.
    Validate,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "DELAYFLUX_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads for `sweep` (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Confirm each sweep point by simulation.
    #[arg(long, global = true)]
    pub confirm: bool,
}

const DEFAULT_OUT: &str = "delayflux-out";

struct Ctx {
    cfg: RunConfig,
    flags: GlobalOpts,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    confirm: bool,
}

impl Ctx {
    fn new(opts: &GlobalOpts) -> Result<Self> {
        let mut cfg = match &opts.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let m = &mut cfg.model;
        m.alpha = opts.alpha.or(m.alpha);
        m.m = opts.m.or(m.m);
        m.tau = opts.tau.or(m.tau);
        let out = opts.out.clone().or_else(|| cfg.output.dir.clone());
        Ok(Ctx {
            jobs: opts.jobs.or(cfg.sweep.jobs),
            confirm: opts.confirm || cfg.sweep.confirm.unwrap_or(false),
            out,
            cfg,
            flags: opts.clone(),
        })
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(dir)
    }
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    unix_time: u64,
}

fn write_meta(dir: &Path, command: Command) -> Result<()> {
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = Meta {
        command: command_name(command),
        version: env!("CARGO_PKG_VERSION"),
        unix_time,
    };
    io::write_json(&dir.join("meta.json"), &meta)
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Steady => "steady",
        Command::Hopf => "hopf",
        Command::Simulate => "simulate",
        Command::Iterate => "iterate",
        Command::Sweep => "sweep",
        Command::Validate => "validate",
    }
}

fn print_json<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(stdout, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

#[derive(Debug, Serialize)]
pub struct SteadyReport {
    pub alpha: f64,
    pub m: f64,
    pub c: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub flux_at_c: f64,
}

#[derive(Debug, Serialize)]
pub struct HopfReport {
    pub alpha: f64,
    pub m: f64,
    pub c: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Absent when `Q > 1` and no delay was given.
    pub regime: Option<&'static str>,
    pub hopf: Option<HopfAnalysis>,
}

#[derive(Debug, Serialize)]
struct SimulateReport {
    alpha: f64,
    m: f64,
    tau: f64,
    c: f64,
    #[serde(rename = "Q")]
    q: f64,
    tau0: Option<f64>,
    regime: &'static str,
    grid: delayflux_core::fd::Grid,
    verdict: Option<&'static str>,
    amp_ratio: Option<f64>,
    period_est: Option<f64>,
    peaks: usize,
    final_q0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct IterateReport {
    alpha: f64,
    m: f64,
    lattice: delayflux_core::greens::Lattice,
    kernel: delayflux_core::greens::KernelConfig,
    converged: bool,
    k: usize,
    sup_gap: Option<f64>,
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn steady_report(alpha: f64, m: f64) -> Result<SteadyReport> {
    let ss = SteadyState::new(alpha, m)?;
    Ok(SteadyReport {
        alpha,
        m,
        c: ss.c,
        q: ss.Q,
        flux_at_c: flux(ss.c, alpha, m),
    })
}

pub fn hopf_report(alpha: f64, m: f64, tau: Option<f64>) -> Result<HopfReport> {
    let ss = SteadyState::new(alpha, m)?;
    let hopf = if ss.Q > 1.0 {
        Some(HopfAnalysis::new(ss.Q)?)
    } else {
        None
    };
    let regime = match tau {
        Some(t) => {
            delayflux_core::ModelParams::new(alpha, m, t)?;
            Some(classify_gain(ss.Q, t).regime.as_str())
        }
        None if hopf.is_none() => Some(classify_gain(ss.Q, 0.0).regime.as_str()),
        None => None,
    };
    Ok(HopfReport {
        alpha,
        m,
        c: ss.c,
        q: ss.Q,
        tau,
        regime,
        hopf,
    })
}

fn required(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| CliError::Usage(format!("--{name} is required")))
}

/// Runs one command; text reports go to `stdout`, files to the output directory.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let ctx = Ctx::new(&cli.opts)?;
    let model = &ctx.cfg.model;
    match cli.command {
        Command::Steady => {
            let rep = steady_report(required(model.alpha, "alpha")?, required(model.m, "m")?)?;
            if ctx.out.is_some() {
                io::write_json(&ctx.out_dir()?.join("steady.json"), &rep)?;
            }
            print_json(stdout, &rep)
        }
        Command::Hopf => {
            let rep = hopf_report(required(model.alpha, "alpha")?, required(model.m, "m")?, model.tau)?;
            if ctx.out.is_some() {
                io::write_json(&ctx.out_dir()?.join("hopf.json"), &rep)?;
            }
            print_json(stdout, &rep)
        }
        Command::Simulate => cmd_simulate(&ctx, stdout),
        Command::Iterate => cmd_iterate(&ctx, stdout),
        Command::Sweep => cmd_sweep(&ctx, stdout),
        Command::Validate => cmd_validate(&ctx, stdout),
    }
}

fn cmd_simulate(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let params = ctx.cfg.model_params()?;
    let data = ctx.cfg.initial_data(&params)?;
    let grid = ctx.cfg.fd_grid(params.tau)?;
    let ss = SteadyState::new(params.alpha, params.m)?;
    let verdict = classify_gain(ss.Q, params.tau);
    let dir = ctx.out_dir()?;
    write_meta(&dir, Command::Simulate)?;
    let mut rep = SimulateReport {
        alpha: params.alpha,
        m: params.m,
        tau: params.tau,
        c: ss.c,
        q: ss.Q,
        tau0: verdict.tau0,
        regime: verdict.regime.as_str(),
        grid,
        verdict: None,
        amp_ratio: None,
        period_est: None,
        peaks: 0,
        final_q0: None,
        error: None,
    };
    let traj = match simulate_with(&params, &data, &grid, &ctx.cfg.sim_options(&grid)) {
        Ok(t) => t,
        Err(e) => {
            rep.error = Some(e.to_string());
            io::write_json(&dir.join("report.json"), &rep)?;
            return Err(e.into());
        }
    };
    io::write_trajectory(&dir.join("trajectory.csv"), &traj)?;
    if !traj.snapshots.is_empty() {
        io::write_snapshots(&dir.join("snapshots.csv"), &traj)?;
    }
    let osc = analyze(&traj, ss.c, &ctx.cfg.analyze_options());
    rep.verdict = Some(osc.verdict.as_str());
    rep.amp_ratio = osc.amp_ratio;
    rep.period_est = osc.period_est;
    rep.peaks = osc.peaks.len();
    rep.final_q0 = traj.last_value();
    io::write_json(&dir.join("report.json"), &rep)?;
    print_json(stdout, &rep)
}

fn cmd_iterate(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let params = ctx.cfg.model_params()?;
    if params.tau != 0.0 {
        return Err(CliError::Usage(
            "iterate solves the undelayed problem; set tau = 0 (use simulate for tau > 0)".into(),
        ));
    }
    let data = ctx.cfg.initial_data(&params)?;
    let lattice = ctx.cfg.lattice();
    let opts = ctx.cfg.iterate_options();
    let dir = ctx.out_dir()?;
    write_meta(&dir, Command::Iterate)?;
    let mut rep = IterateReport {
        alpha: params.alpha,
        m: params.m,
        lattice,
        kernel: opts.kernel,
        converged: false,
        k: 0,
        sup_gap: None,
        gamma: None,
        error: None,
    };
    let st = match monotone_iterate(&params, &data, &lattice, &opts) {
        Ok(st) => st,
        Err(e) => {
            rep.error = Some(e.to_string());
            io::write_json(&dir.join("iterate.json"), &rep)?;
            return Err(e.into());
        }
    };
    io::write_iteration(&dir.join("iteration.csv"), &st.history)?;
    io::write_field(&dir.join("lower.csv"), &st.ts, &st.xs, |n, i| st.lower_at(n, i))?;
    io::write_field(&dir.join("upper.csv"), &st.ts, &st.xs, |n, i| st.upper_at(n, i))?;
    rep.converged = st.converged;
    rep.k = st.k;
    rep.sup_gap = Some(st.sup_gap);
    rep.gamma = Some(st.gamma);
    io::write_json(&dir.join("iterate.json"), &rep)?;
    print_json(stdout, &rep)?;
    if !st.converged {
        return Err(CliError::Numerical(format!(
            "no convergence after {} iterations (gap {:e} > tol {:e})",
            st.k, st.sup_gap, opts.tol
        )));
    }
    Ok(())
}

fn cmd_sweep(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let s = &ctx.cfg.sweep;
    let m = &ctx.cfg.model;
    let f = &ctx.flags;
    // a flag selects a single value; otherwise the [sweep] grid, then the [model] value
    let axis = |flag: Option<f64>, grid: &[f64], merged: Option<f64>| match flag {
        Some(v) => vec![v],
        None if !grid.is_empty() => grid.to_vec(),
        None => merged.into_iter().collect(),
    };
    let alpha = axis(f.alpha, &s.alpha, m.alpha);
    let mm = axis(f.m, &s.m, m.m);
    let tau = axis(f.tau, &s.tau, m.tau);
    let records = sweep::run(&alpha, &mm, &tau, ctx.confirm, &ctx.cfg.sweep_sim(), ctx.jobs)?;
    let dir = ctx.out_dir()?;
    write_meta(&dir, Command::Sweep)?;
    io::write_sweep(&dir.join("sweep.csv"), &records)?;
    let mismatches = records.iter().filter(|r| r.mismatch).count();
    let failures: Vec<_> = records.iter().filter(|r| r.error.is_some()).collect();
    let w = |e| CliError::io("<stdout>", e);
    writeln!(
        stdout,
        "{} points, {} mismatches, {} failures",
        records.len(),
        mismatches,
        failures.len()
    )
    .map_err(w)?;
    for r in &failures {
        writeln!(
            stdout,
            "failed at alpha={} m={} tau={}: {}",
            r.alpha,
            r.m,
            r.tau,
            r.error.as_deref().unwrap_or("")
        )
        .map_err(w)?;
    }
    if !failures.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} sweep points failed to simulate",
            failures.len()
        )));
    }
    Ok(())
}

fn cmd_validate(ctx: &Ctx, stdout: &mut dyn Write) -> Result<()> {
    let checks = validate::run_suite();
    let w = |e| CliError::io("<stdout>", e);
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        write!(stdout, "{tag} {:<26} {:.3e} (tol {:.0e})", c.name, c.value, c.tolerance).map_err(w)?;
        match &c.note {
            Some(n) => writeln!(stdout, "  {n}"),
            None => writeln!(stdout),
        }
        .map_err(w)?;
    }
    let dir = ctx.out_dir()?;
    write_meta(&dir, Command::Validate)?;
    io::write_json(&dir.join("validate.json"), &checks)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} validation checks failed")));
    }
    Ok(())
}
