//! Method-of-lines finite differences with a delayed boundary flux.
//!
//! Backward Euler in time, central differences in space, a mirror ghost node
//! at `x = 0` carrying the flux and homogeneous Dirichlet data at `x = L`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{require, Error, Result};
use crate::model::{flux, InitialData, ModelParams, Profile};
use crate::tridiag::Tridiag;

/// Spatial and temporal discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    /// Truncation length.
    pub l: f64,
    /// Number of cells; unknowns sit at `x = 0, dx, ..., L - dx`.
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl Grid {
    pub fn new(l: f64, nx: usize, dt: f64, t_end: f64) -> Result<Self> {
        let g = Self { l, nx, dt, t_end };
        g.validate()?;
        Ok(g)
    }

    /// `L = 15`, `nx = 600`, `dt = min(1e-3, tau/100)`.
    pub fn default_for(tau: f64, t_end: f64) -> Self {
        let dt = if tau > 0.0 { (tau / 100.0).min(1e-3) } else { 1e-3 };
        Self {
            l: 15.0,
            nx: 600,
            dt,
            t_end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require(self.l > 0.0 && self.l.is_finite(), "L", self.l, "L > 0")?;
        require(self.nx >= 16, "nx", self.nx as f64, "nx >= 16")?;
        require(self.dt > 0.0 && self.dt.is_finite(), "dt", self.dt, "dt > 0")?;
        require(
            self.t_end >= 0.0 && self.t_end.is_finite(),
            "t_end",
            self.t_end,
            "t_end >= 0",
        )
    }

    pub fn dx(&self) -> f64 {
        self.l / self.nx as f64
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Node positions of the unknowns.
    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|i| i as f64 * dx).collect()
    }
}

/// Boundary values `q(0, s)` for `s <= t`, seeded by `h` on `s <= 0`.
///
/// Keeps only the samples needed to reach back one delay window.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    h: Profile,
    dt: f64,
    values: VecDeque<f64>,
    /// Step index of `values[0]`.
    first: usize,
    capacity: usize,
}

impl HistoryBuffer {
    /// `q0_at_zero` is the boundary value at `t = 0`.
    pub fn new(h: Profile, tau: f64, dt: f64, q0_at_zero: f64) -> Self {
        let capacity = (tau / dt).ceil() as usize + 2;
        let mut values = VecDeque::with_capacity(capacity + 1);
        values.push_back(q0_at_zero);
        Self {
            h,
            dt,
            values,
            first: 0,
            capacity,
        }
    }

    /// Time of the newest sample.
    pub fn latest_time(&self) -> f64 {
        (self.first + self.values.len() - 1) as f64 * self.dt
    }

    /// Time of the oldest retained sample.
    pub fn earliest_time(&self) -> f64 {
        self.first as f64 * self.dt
    }

    pub fn push(&mut self, q0: f64) {
        self.values.push_back(q0);
        if self.values.len() > self.capacity {
            self.values.pop_front();
            self.first += 1;
        }
    }

    /// Linear interpolation of `q(0, s)`; `s` beyond the newest sample is clamped to it.
    pub fn value_at(&self, s: f64) -> f64 {
        if s <= 0.0 && self.first == 0 {
            return if s == 0.0 { self.values[0] } else { self.h.eval(s) };
        }
        let pos = (s / self.dt - self.first as f64).max(0.0);
        let i = pos.floor() as usize;
        let last = self.values.len() - 1;
        if i >= last {
            return self.values[last];
        }
        let w = pos - i as f64;
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }
}

/// Flux law applied at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FluxLaw {
    /// `-alpha / (1 + q(0, t - tau)^m)`.
    Delayed,
    /// A fixed flux value.
    Constant(f64),
}

/// Field `q(x, t_j)` on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Snapshot {
    pub t: f64,
    pub field: Vec<f64>,
}

/// Boundary series `q(0, t)` plus optional field snapshots.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub q0: Vec<f64>,
    /// Node positions for snapshot fields.
    pub x: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_value(&self) -> Option<f64> {
        self.q0.last().copied()
    }

    /// Linear interpolation of `q(0, t)`, clamped to the recorded range.
    pub fn value_at(&self, t: f64) -> f64 {
        crate::model::interp(&self.times, &self.q0, t)
    }

    /// Sup-norm distance to another trajectory at this trajectory's sample times in `[t0, t1]`.
    pub fn sup_distance(&self, other: &Trajectory, t0: f64, t1: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.q0)
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .map(|(t, v)| (v - other.value_at(*t)).abs())
            .fold(0.0, f64::max)
    }
}

/// Options beyond the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub flux: FluxLaw,
    /// Keep every `record_stride`-th boundary sample.
    pub record_stride: usize,
    /// Time between field snapshots; `None` disables them.
    pub snapshot_interval: Option<f64>,
    /// Extra fixed-point passes per step when `tau = 0`.
    pub picard_corrections: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            flux: FluxLaw::Delayed,
            record_stride: 1,
            snapshot_interval: None,
            picard_corrections: 2,
        }
    }
}

/// Solver state at one time level.
#[derive(Debug, Clone)]
pub struct FdState {
    pub t: f64,
    pub q: Vec<f64>,
    op: Tridiag,
    rhs: Vec<f64>,
    dt: f64,
    dx: f64,
}

impl FdState {
    pub fn new(f: &Profile, grid: &Grid) -> Self {
        let q = grid.nodes().into_iter().map(|x| f.eval(x)).collect();
        Self::from_field(q, grid)
    }

    pub fn from_field(q: Vec<f64>, grid: &Grid) -> Self {
        let n = grid.nx;
        assert_eq!(q.len(), n);
        let (dt, dx) = (grid.dt, grid.dx());
        let r = dt / (dx * dx);
        let mut lower = alloc::vec![-r; n];
        let diag = alloc::vec![1.0 + 2.0 * r + dt; n];
        let mut upper = alloc::vec![-r; n];
        lower[0] = 0.0;
        upper[0] = -2.0 * r;
        upper[n - 1] = 0.0;
        Self {
            t: 0.0,
            q,
            op: Tridiag::new(&lower, &diag, &upper),
            rhs: alloc::vec![0.0; n],
            dt,
            dx,
        }
    }

    pub fn q0(&self) -> f64 {
        self.q[0]
    }

    /// Advances one step with the boundary flux `g` held over the step.
    pub fn advance_with_flux(&mut self, g: f64) {
        self.solve_from(g);
        core::mem::swap(&mut self.q, &mut self.rhs);
        self.t += self.dt;
    }

    fn solve_from(&mut self, g: f64) {
        self.rhs.copy_from_slice(&self.q);
        // ghost node q_{-1} = q_1 - 2 dx g folds into the first row
        self.rhs[0] -= 2.0 * self.dt / self.dx * g;
        self.op.solve_in_place(&mut self.rhs);
    }

    /// Backward Euler step with `g = g(q0^{n+1})`, resolved by lagged fixed-point passes.
    fn advance_implicit(&mut self, g_of: impl Fn(f64) -> f64, corrections: usize) {
        let mut g = g_of(self.q[0]);
        self.solve_from(g);
        for _ in 0..corrections {
            g = g_of(self.rhs[0]);
            self.solve_from(g);
        }
        core::mem::swap(&mut self.q, &mut self.rhs);
        self.t += self.dt;
    }
}

/// One time step: reads the delayed boundary value, solves, and records `q0` in `history`.
pub fn step(state: &mut FdState, params: &ModelParams, history: &mut HistoryBuffer, opts: &SimOptions) -> Result<()> {
    let t_next = state.t + state.dt;
    match opts.flux {
        FluxLaw::Constant(g) => state.advance_with_flux(g),
        FluxLaw::Delayed if params.tau > 0.0 => {
            let g = flux(history.value_at(t_next - params.tau), params.alpha, params.m);
            state.advance_with_flux(g);
        }
        FluxLaw::Delayed => state.advance_implicit(|q0| flux(q0, params.alpha, params.m), opts.picard_corrections),
    }
    if !state.q[0].is_finite() {
        return Err(Error::NonFinite { t: state.t });
    }
    history.push(state.q[0]);
    Ok(())
}

/// Integrates the model over `[0, grid.t_end]` with default options.
pub fn simulate(params: &ModelParams, data: &InitialData, grid: &Grid) -> Result<Trajectory> {
    simulate_with(params, data, grid, &SimOptions::default())
}

pub fn simulate_with(params: &ModelParams, data: &InitialData, grid: &Grid, opts: &SimOptions) -> Result<Trajectory> {
    params.validate()?;
    grid.validate()?;
    if params.tau > 0.0 {
        data.check_history(params.tau)?;
    }
    let stride = opts.record_stride.max(1);
    let mut state = FdState::new(&data.f, grid);
    let mut history = HistoryBuffer::new(data.h.clone(), params.tau, grid.dt, state.q0());
    let steps = grid.steps();

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps / stride + 2),
        q0: Vec::with_capacity(steps / stride + 2),
        x: Vec::new(),
        snapshots: Vec::new(),
    };
    traj.times.push(0.0);
    traj.q0.push(state.q0());

    let snap_every = opts
        .snapshot_interval
        .map(|iv| ((iv / grid.dt).round() as usize).max(1));
    if snap_every.is_some() {
        traj.x = grid.nodes();
        traj.snapshots.push(Snapshot {
            t: 0.0,
            field: state.q.clone(),
        });
    }

    for n in 1..=steps {
        step(&mut state, params, &mut history, opts)?;
        let t = n as f64 * grid.dt;
        state.t = t;
        if n % stride == 0 || n == steps {
            traj.times.push(t);
            traj.q0.push(state.q0());
        }
        if let Some(every) = snap_every {
            if n % every == 0 {
                if state.q.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { t });
                }
                traj.snapshots.push(Snapshot {
                    t,
                    field: state.q.clone(),
                });
            }
        }
    }
    if state.q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t: state.t });
    }
    Ok(traj)
}

/// Richardson estimate from three nested refinements.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderEstimate {
    /// `sup |q_h - q_{h/2}|` on the boundary series.
    pub diff_coarse: f64,
    /// `sup |q_{h/2} - q_{h/4}|`.
    pub diff_fine: f64,
    pub order: f64,
}

impl OrderEstimate {
    fn from_runs(runs: &[Trajectory; 3]) -> Self {
        let d = |a: &Trajectory, b: &Trajectory| {
            a.times
                .iter()
                .zip(&a.q0)
                .map(|(t, v)| (v - b.value_at(*t)).abs())
                .fold(0.0, f64::max)
        };
        let diff_coarse = d(&runs[0], &runs[1]);
        let diff_fine = d(&runs[1], &runs[2]);
        Self {
            diff_coarse,
            diff_fine,
            order: (diff_coarse / diff_fine).log2(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceTable {
    pub space: OrderEstimate,
    pub time: OrderEstimate,
}

/// Observed orders in space (`nx, 2nx, 4nx` at fixed `dt`) and time
/// (`dt, dt/2, dt/4` at fixed `nx`), compared on the coarsest run's samples.
pub fn convergence_study(
    params: &ModelParams,
    data: &InitialData,
    base: &Grid,
    opts: &SimOptions,
) -> Result<ConvergenceTable> {
    let space_stride = 1;
    let space = {
        let runs = [1usize, 2, 4].map(|k| {
            let g = Grid {
                nx: base.nx * k,
                ..*base
            };
            simulate_with(
                params,
                data,
                &g,
                &SimOptions {
                    record_stride: space_stride,
                    ..*opts
                },
            )
        });
        let [a, b, c] = runs;
        OrderEstimate::from_runs(&[a?, b?, c?])
    };
    let time = {
        let runs = [1usize, 2, 4].map(|k| {
            let g = Grid {
                dt: base.dt / k as f64,
                ..*base
            };
            // record on the coarsest time lattice so comparisons need no interpolation
            simulate_with(
                params,
                data,
                &g,
                &SimOptions {
                    record_stride: k,
                    ..*opts
                },
            )
        });
        let [a, b, c] = runs;
        OrderEstimate::from_runs(&[a?, b?, c?])
    };
    Ok(ConvergenceTable { space, time })
}
