//! Integral representation with the reflected heat kernel.
//!
//! A solution with boundary flux `g(t) = q_x(0, t)` satisfies
//!
//! ```text
//! q(x, t) = ∫ G(x, t; ξ, 0) f(ξ) dξ - ∫ G(x, t; 0, s) g(s) ds
//! ```
//!
//! with `G = D / sqrt(4π(t-s)) [exp(-(x-ξ)²/4(t-s)) + exp(-(x+ξ)²/4(t-s))]`
//! and decay factor `D = exp(-(t-s))`. The boundary convolution is computed
//! after substituting `u = sqrt(t - s)`, which removes the `1/sqrt(t-s)`
//! singularity.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fd::{FluxLaw, Trajectory};
use crate::model::{flux, InitialData, LowerSolution, ModelParams, Profile};
use crate::quadrature::GaussLegendre;

const NODES: usize = 32;
/// Half-width of the homogeneous integration window in units of `sqrt(t)`.
const WINDOW: f64 = 13.0;
/// Largest panel width in the `u = sqrt(t - s)` variable.
const U_PANEL: f64 = 0.05;

/// Decay factor carried by the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Decay {
    /// `exp(-(t - s))`, consistent with Duhamel's principle.
    #[default]
    Elapsed,
    /// `exp(-t)` regardless of the source time.
    Absolute,
    /// No decay; the bare reflected heat kernel.
    Off,
}

/// Sign with which the boundary convolution enters the representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundarySign {
    /// `q = H - ∫ G g ds`: a negative flux `q_x(0) < 0` is an influx.
    #[default]
    Subtract,
    Add,
}

impl BoundarySign {
    fn factor(self) -> f64 {
        match self {
            BoundarySign::Subtract => -1.0,
            BoundarySign::Add => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelConfig {
    pub decay: Decay,
    pub sign: BoundarySign,
}

impl KernelConfig {
    fn decay(&self, t: f64, elapsed: f64) -> f64 {
        match self.decay {
            Decay::Elapsed => (-elapsed).exp(),
            Decay::Absolute => (-t).exp(),
            Decay::Off => 1.0,
        }
    }
}

/// `G(x, t; xi, s)` for `t > s`.
pub fn kernel_eval(x: f64, t: f64, xi: f64, s: f64, cfg: &KernelConfig) -> f64 {
    let d = t - s;
    assert!(d > 0.0, "kernel needs t > s");
    let img = (-(x - xi) * (x - xi) / (4.0 * d)).exp() + (-(x + xi) * (x + xi) / (4.0 * d)).exp();
    cfg.decay(t, d) / (4.0 * PI * d).sqrt() * img
}

/// `∫_0^∞ G(x, t; ξ, 0) f(ξ) dξ`.
///
/// The image term is folded in by integrating `f(|ξ|)` over the whole line.
/// Panels of width `sqrt(t)` cover `x ± 13 sqrt(t)`, beyond which the
/// Gaussian weight is below `1e-18`; a breakpoint sits at `ξ = 0` where the
/// even extension has a kink.
pub fn homogeneous_term(f: &Profile, x: f64, t: f64, cfg: &KernelConfig) -> f64 {
    homogeneous_with(&GaussLegendre::new(NODES), f, x, t, cfg)
}

fn homogeneous_with(gl: &GaussLegendre, f: &Profile, x: f64, t: f64, cfg: &KernelConfig) -> f64 {
    if t <= 0.0 {
        return f.eval(x);
    }
    let w = t.sqrt();
    let (a, b) = (x - WINDOW * w, x + WINDOW * w);
    let integrand = |xi: f64| (-(x - xi) * (x - xi) / (4.0 * t)).exp() * f.eval(xi.abs());
    let mut total = 0.0;
    let mut span = |lo: f64, hi: f64| {
        if hi > lo {
            let panels = ((hi - lo) / w).ceil().max(1.0) as usize;
            total += gl.integrate_panels(lo, hi, panels, integrand);
        }
    };
    if a < 0.0 && b > 0.0 {
        span(a, 0.0);
        span(0.0, b);
    } else {
        span(a, b);
    }
    cfg.decay(t, t) / (4.0 * PI * t).sqrt() * total
}

/// `∫_0^t G(x, t; 0, s) g(s) ds`.
pub fn boundary_integral(g: impl Fn(f64) -> f64, x: f64, t: f64, cfg: &KernelConfig) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let gl = GaussLegendre::new(NODES);
    let top = t.sqrt();
    let panels = (top / U_PANEL).ceil().max(1.0) as usize;
    gl.integrate_panels(0.0, top, panels, |u| boundary_density(x, t, u, cfg) * g(t - u * u))
}

/// Signed boundary contribution to `q(x, t)`.
pub fn boundary_term(g: impl Fn(f64) -> f64, x: f64, t: f64, cfg: &KernelConfig) -> f64 {
    cfg.sign.factor() * boundary_integral(g, x, t, cfg)
}

// integrand in u after ds = -2u du; vanishes smoothly at u = 0 for x > 0
fn boundary_density(x: f64, t: f64, u: f64, cfg: &KernelConfig) -> f64 {
    if u == 0.0 {
        return if x == 0.0 {
            2.0 / PI.sqrt() * cfg.decay(t, 0.0)
        } else {
            0.0
        };
    }
    2.0 / PI.sqrt() * cfg.decay(t, u * u) * (-x * x / (4.0 * u * u)).exp()
}

/// Quadrature weights for a piecewise-linear flux on a uniform time lattice.
///
/// Row `n` holds `w` with `∫_0^{t_n} G(x, t_n; 0, s) g(s) ds ≈ Σ_j w_j g(s_j)`.
fn boundary_weights(gl: &GaussLegendre, x: f64, dt: f64, nt: usize, cfg: &KernelConfig) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(nt);
    for n in 0..nt {
        let tn = n as f64 * dt;
        let mut w = alloc::vec![0.0; n + 1];
        for j in 0..n {
            // s in [s_j, s_{j+1}] <=> u in [u_hi_s, u_lo_s]
            let (sj, sj1) = (j as f64 * dt, (j + 1) as f64 * dt);
            let (ua, ub) = ((tn - sj1).max(0.0).sqrt(), (tn - sj).max(0.0).sqrt());
            let sub = ((ub - ua) / U_PANEL).ceil().max(1.0) as usize;
            let h = (ub - ua) / sub as f64;
            for p in 0..sub {
                let (a, b) = (ua + p as f64 * h, ua + (p + 1) as f64 * h);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (z, wz) in gl.nodes.iter().zip(&gl.weights) {
                    let u = mid + half * z;
                    let s = tn - u * u;
                    let dens = boundary_density(x, tn, u, cfg) * wz * half;
                    let theta = ((s - sj) / dt).clamp(0.0, 1.0);
                    w[j] += dens * (1.0 - theta);
                    w[j + 1] += dens * theta;
                }
            }
        }
        rows.push(w);
    }
    rows
}

/// Tensor lattice `x ∈ {0, dx, ..., L}`, `t ∈ {0, dt, ..., T}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lattice {
    pub l: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for Lattice {
    fn default() -> Self {
        Self {
            l: 10.0,
            dx: 0.1,
            dt: 0.05,
            t_end: 1.0,
        }
    }
}

impl Lattice {
    pub fn validate(&self) -> Result<()> {
        crate::error::require(self.l >= 0.0, "L", self.l, "L >= 0")?;
        crate::error::require(self.dx > 0.0, "dx", self.dx, "dx > 0")?;
        crate::error::require(self.dt > 0.0, "dt", self.dt, "dt > 0")?;
        crate::error::require(self.t_end >= 0.0, "t_end", self.t_end, "t_end >= 0")
    }

    pub fn xs(&self) -> Vec<f64> {
        let n = (self.l / self.dx).round() as usize;
        (0..=n).map(|i| i as f64 * self.dx).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        let n = (self.t_end / self.dt).round() as usize;
        (0..=n).map(|i| i as f64 * self.dt).collect()
    }
}

/// Time-independent seed pair for the monotone iteration.
#[derive(Debug, Clone)]
pub enum Seeds {
    /// `lower = 0`, `upper = M + alpha e^{-x}`; an ordered pair for any admissible `f`.
    Bracket,
    /// `lower = c exp(-zeta x - beta x^2)` with default shape, `upper = M`.
    LowerSolutionAndSup,
    Custom {
        lower: Profile,
        upper: Profile,
    },
}

/// Which iterate feeds each boundary update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Coupling {
    /// The lower update uses the upper iterate's flux and vice versa.
    #[default]
    Crossed,
    /// Each sequence uses its own previous flux.
    Own,
}

#[derive(Debug, Clone)]
pub struct IterateOptions {
    pub tol: f64,
    pub k_max: usize,
    pub seeds: Seeds,
    pub coupling: Coupling,
    /// Allowed violation of the ordering chain before aborting.
    pub ordering_slack: f64,
    pub kernel: KernelConfig,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            k_max: 30,
            seeds: Seeds::Bracket,
            coupling: Coupling::Crossed,
            ordering_slack: 1e-8,
            kernel: KernelConfig::default(),
        }
    }
}

/// One row of the iteration report.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub k: usize,
    pub sup_gap: f64,
    /// Smallest margin in `lower_k <= lower_{k+1} <= upper_{k+1} <= upper_k`.
    pub min_ordering_slack: f64,
}

/// Upper and lower iterates on the lattice, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub k: usize,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub sup_gap: f64,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    /// Lipschitz constant of the flux over the seed range.
    pub gamma: f64,
    pub kernel: KernelConfig,
}

impl IterationState {
    pub fn lower_at(&self, n: usize, i: usize) -> f64 {
        self.lower[n * self.xs.len() + i]
    }

    pub fn upper_at(&self, n: usize, i: usize) -> f64 {
        self.upper[n * self.xs.len() + i]
    }

    pub fn lower_boundary(&self) -> Trajectory {
        self.boundary_series(&self.lower)
    }

    pub fn upper_boundary(&self) -> Trajectory {
        self.boundary_series(&self.upper)
    }

    fn boundary_series(&self, field: &[f64]) -> Trajectory {
        let nx = self.xs.len();
        Trajectory {
            times: self.ts.clone(),
            q0: (0..self.ts.len()).map(|n| field[n * nx]).collect(),
            ..Default::default()
        }
    }
}

/// Largest `|g'(q)|` for `q` in `[0, q_max]`.
pub fn flux_lipschitz(alpha: f64, m: f64, q_max: f64) -> f64 {
    if m < 1.0 {
        return f64::INFINITY;
    }
    let n = 4000;
    (0..=n)
        .map(|i| {
            let q = q_max * i as f64 / n as f64;
            let qm = q.powf(m);
            alpha * m * q.powf(m - 1.0) / ((1.0 + qm) * (1.0 + qm))
        })
        .fold(0.0, f64::max)
}

fn seed_profiles(seeds: &Seeds, params: &ModelParams, data: &InitialData) -> Result<(Profile, Profile)> {
    let big_m = data.sup_f();
    Ok(match seeds {
        Seeds::Bracket => (Profile::Constant(0.0), {
            let alpha = params.alpha;
            Profile::custom(move |x| big_m + alpha * (-x).exp(), big_m + alpha)
        }),
        Seeds::LowerSolutionAndSup => {
            let lo = LowerSolution::with_defaults(params.alpha, params.m)?;
            (Profile::custom(move |x| lo.eval(x), lo.c), Profile::Constant(big_m))
        }
        Seeds::Custom { lower, upper } => (lower.clone(), upper.clone()),
    })
}

/// Monotone upper/lower iteration for the undelayed problem.
///
/// Each sweep evaluates the integral representation on the lattice with the
/// boundary flux taken from the previous iterates. With [`Coupling::Crossed`]
/// the lower sequence is driven by the upper iterate's flux, which keeps the
/// chain ordered because `g` is increasing in `q`.
pub fn monotone_iterate(
    params: &ModelParams,
    data: &InitialData,
    lattice: &Lattice,
    opts: &IterateOptions,
) -> Result<IterationState> {
    params.validate()?;
    lattice.validate()?;
    if params.tau != 0.0 {
        return Err(Error::Precondition(format!(
            "monotone iteration needs tau = 0 (got {}); use ladder_solve",
            params.tau
        )));
    }
    let gl = GaussLegendre::new(NODES);
    let (xs, ts) = (lattice.xs(), lattice.ts());
    let (nx, nt) = (xs.len(), ts.len());
    let (lo_seed, up_seed) = seed_profiles(&opts.seeds, params, data)?;

    for &x in &xs {
        let (lo, f, up) = (lo_seed.eval(x), data.f.eval(x), up_seed.eval(x));
        if !(lo <= f + opts.ordering_slack && f <= up + opts.ordering_slack) {
            return Err(Error::SeedOrdering {
                x,
                lower: lo,
                f,
                upper: up,
            });
        }
    }

    let mut homog = alloc::vec![0.0; nt * nx];
    for (n, &t) in ts.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            homog[n * nx + i] = homogeneous_with(&gl, &data.f, x, t, &opts.kernel);
        }
    }
    let weights: Vec<Vec<Vec<f64>>> = xs
        .iter()
        .map(|&x| boundary_weights(&gl, x, lattice.dt, nt, &opts.kernel))
        .collect();

    let mut lower: Vec<f64> = (0..nt).flat_map(|_| xs.iter().map(|&x| lo_seed.eval(x))).collect();
    let mut upper: Vec<f64> = (0..nt).flat_map(|_| xs.iter().map(|&x| up_seed.eval(x))).collect();
    let q_max = upper.iter().copied().fold(0.0, f64::max);
    let gamma = flux_lipschitz(params.alpha, params.m, q_max);
    let sign = opts.kernel.sign.factor();
    let g = |q: f64| flux(q, params.alpha, params.m);

    let mut state = IterationState {
        k: 0,
        xs: xs.clone(),
        ts: ts.clone(),
        lower: lower.clone(),
        upper: upper.clone(),
        sup_gap: gap(&lower, &upper),
        converged: false,
        history: Vec::new(),
        gamma,
        kernel: opts.kernel,
    };
    if state.sup_gap <= opts.tol {
        state.converged = true;
        return Ok(state);
    }

    let mut new_lower = alloc::vec![0.0; nt * nx];
    let mut new_upper = alloc::vec![0.0; nt * nx];
    for k in 1..=opts.k_max {
        let g_lo: Vec<f64> = (0..nt).map(|n| g(lower[n * nx])).collect();
        let g_up: Vec<f64> = (0..nt).map(|n| g(upper[n * nx])).collect();
        let (drive_lower, drive_upper) = match opts.coupling {
            Coupling::Crossed => (&g_up, &g_lo),
            Coupling::Own => (&g_lo, &g_up),
        };
        for i in 0..nx {
            for n in 0..nt {
                let w = &weights[i][n];
                let bl: f64 = w.iter().zip(drive_lower.iter()).map(|(a, b)| a * b).sum();
                let bu: f64 = w.iter().zip(drive_upper.iter()).map(|(a, b)| a * b).sum();
                new_lower[n * nx + i] = homog[n * nx + i] + sign * bl;
                new_upper[n * nx + i] = homog[n * nx + i] + sign * bu;
            }
        }

        let mut slack = f64::INFINITY;
        let mut worst = 0;
        for idx in 0..nt * nx {
            let s = (new_lower[idx] - lower[idx])
                .min(new_upper[idx] - new_lower[idx])
                .min(upper[idx] - new_upper[idx]);
            if s < slack {
                slack = s;
                worst = idx;
            }
        }
        if slack < -opts.ordering_slack {
            return Err(Error::OrderingViolation {
                k,
                slack,
                x: xs[worst % nx],
                t: ts[worst / nx],
            });
        }
        core::mem::swap(&mut lower, &mut new_lower);
        core::mem::swap(&mut upper, &mut new_upper);
        let sup_gap = gap(&lower, &upper);
        state.history.push(IterationRecord {
            k,
            sup_gap,
            min_ordering_slack: slack,
        });
        state.k = k;
        state.sup_gap = sup_gap;
        if sup_gap <= opts.tol {
            state.converged = true;
            break;
        }
    }
    state.lower = lower;
    state.upper = upper;
    Ok(state)
}

fn gap(lower: &[f64], upper: &[f64]) -> f64 {
    lower.iter().zip(upper).map(|(l, u)| u - l).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderOptions {
    pub rungs: usize,
    /// Time step of the lattice; must not exceed `tau`.
    pub dt: f64,
    pub kernel: KernelConfig,
    pub flux: FluxLaw,
}

impl Default for LadderOptions {
    fn default() -> Self {
        Self {
            rungs: 3,
            dt: 0.05,
            kernel: KernelConfig::default(),
            flux: FluxLaw::Delayed,
        }
    }
}

/// Boundary series `q(0, t)` on `[0, rungs * tau]` for a delayed problem.
///
/// On each window `[(j-1) tau, j tau]` the delayed flux only reads values from
/// earlier windows (or from `h`), so `q(0, t_n)` follows by direct
/// quadrature. The representation is evaluated globally from `t = 0`, which
/// avoids re-interpolating the field at every rung start.
pub fn ladder_solve(params: &ModelParams, data: &InitialData, opts: &LadderOptions) -> Result<Trajectory> {
    params.validate()?;
    if !(params.tau > 0.0) {
        return Err(Error::Precondition("ladder_solve needs tau > 0".into()));
    }
    if opts.dt > params.tau {
        return Err(Error::LatticeTooCoarse {
            step: opts.dt,
            tau: params.tau,
        });
    }
    data.check_history(params.tau)?;
    let gl = GaussLegendre::new(NODES);
    let t_end = opts.rungs as f64 * params.tau;
    let nt = (t_end / opts.dt).round() as usize + 1;
    let w = boundary_weights(&gl, 0.0, opts.dt, nt, &opts.kernel);
    let sign = opts.kernel.sign.factor();

    let times: Vec<f64> = (0..nt).map(|n| n as f64 * opts.dt).collect();
    let mut q0 = Vec::with_capacity(nt);
    let mut gvals: Vec<f64> = Vec::with_capacity(nt);
    q0.push(data.f.eval(0.0));
    for n in 1..nt {
        while gvals.len() <= n {
            let j = gvals.len();
            let gj = match opts.flux {
                FluxLaw::Constant(v) => v,
                FluxLaw::Delayed => {
                    let s = times[j] - params.tau;
                    let delayed = if s <= 0.0 {
                        data.h.eval(s)
                    } else {
                        crate::model::interp(&times[..q0.len()], &q0, s)
                    };
                    flux(delayed, params.alpha, params.m)
                }
            };
            gvals.push(gj);
        }
        let b: f64 = w[n].iter().zip(&gvals).map(|(a, g)| a * g).sum();
        let v = homogeneous_with(&gl, &data.f, 0.0, times[n], &opts.kernel) + sign * b;
        if !v.is_finite() {
            return Err(Error::NonFinite { t: times[n] });
        }
        q0.push(v);
    }
    Ok(Trajectory {
        times,
        q0,
        ..Default::default()
    })
}

/// Fitted constant for `sup_x |∫_0^t G(x, t; 0, s) ds| <= 2 C1 t e^{-t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeFit {
    pub c1: f64,
    /// Time at which the ratio is largest.
    pub t_max: f64,
}

/// Smallest `C1` making the envelope hold at every `(x, t)` sample.
///
/// The bound decays like `e^{-t}`, so it is evaluated with the
/// [`Decay::Absolute`] kernel.
pub fn envelope_fit(ts: &[f64], xs: &[f64]) -> EnvelopeFit {
    let cfg = KernelConfig {
        decay: Decay::Absolute,
        ..Default::default()
    };
    let mut fit = EnvelopeFit {
        c1: 0.0,
        t_max: f64::NAN,
    };
    for &t in ts {
        let sup = xs
            .iter()
            .map(|&x| boundary_integral(|_| 1.0, x, t, &cfg).abs())
            .fold(0.0, f64::max);
        let ratio = sup / (2.0 * t * (-t).exp());
        if ratio > fit.c1 {
            fit = EnvelopeFit { c1: ratio, t_max: t };
        }
    }
    fit
}

/// Checks the envelope with a given constant.
pub fn envelope_holds(c1: f64, ts: &[f64], xs: &[f64]) -> bool {
    let cfg = KernelConfig {
        decay: Decay::Absolute,
        ..Default::default()
    };
    ts.iter().all(|&t| {
        xs.iter()
            .all(|&x| boundary_integral(|_| 1.0, x, t, &cfg).abs() <= 2.0 * c1 * t * (-t).exp() * (1.0 + 1e-12))
    })
}

/// Green's solution for a constant flux, at `x = 0`.
pub fn constant_flux_boundary(f: &Profile, g: f64, t: f64, cfg: &KernelConfig) -> f64 {
    homogeneous_term(f, 0.0, t, cfg) + cfg.sign.factor() * boundary_integral(|_| g, 0.0, t, cfg)
}

/// Sup-norm mismatch of each kernel convention against a reference series.
///
/// `reference` is `q(0, t)` for the constant-flux problem from another solver;
/// the conventions are returned best first.
pub fn rank_conventions(f: &Profile, g: f64, reference: &Trajectory, sample_times: &[f64]) -> Vec<(KernelConfig, f64)> {
    let mut out: Vec<(KernelConfig, f64)> = [Decay::Elapsed, Decay::Absolute]
        .into_iter()
        .flat_map(|decay| {
            [BoundarySign::Subtract, BoundarySign::Add]
                .into_iter()
                .map(move |sign| KernelConfig { decay, sign })
        })
        .map(|cfg| {
            let err = sample_times
                .iter()
                .map(|&t| (constant_flux_boundary(f, g, t, &cfg) - reference.value_at(t)).abs())
                .fold(0.0, f64::max);
            (cfg, err)
        })
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SteadyState;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_examples() {
        let off = KernelConfig {
            decay: Decay::Off,
            ..Default::default()
        };
        assert_abs_diff_eq!(kernel_eval(0.0, 1.0 / (4.0 * PI), 0.0, 0.0, &off), 2.0, epsilon = 1e-14);
        // e^{-1} * 2/sqrt(4 pi) * e^{-1/4}
        assert_abs_diff_eq!(
            kernel_eval(1.0, 1.0, 0.0, 0.0, &KernelConfig::default()),
            0.161643,
            epsilon = 1e-6
        );
    }

    #[test]
    fn kernel_is_nonnegative_and_symmetric_in_images() {
        let cfg = KernelConfig::default();
        for (x, xi) in [(0.0, 0.3), (1.0, 2.0), (4.0, 0.0)] {
            let g = kernel_eval(x, 2.0, xi, 0.5, &cfg);
            assert!(g >= 0.0);
            assert_abs_diff_eq!(g, kernel_eval(xi, 2.0, x, 0.5, &cfg), epsilon = 1e-15);
        }
    }

    #[test]
    fn normalization() {
        let one = Profile::Constant(1.0);
        for x in [0.0, 0.5, 1.0, 5.0] {
            for t in [0.1, 1.0, 5.0] {
                let v = homogeneous_term(&one, x, t, &KernelConfig::default());
                assert!((v - (-t).exp()).abs() <= 1e-10, "x={x} t={t}: {v}");
            }
        }
        assert_eq!(
            homogeneous_term(&Profile::Constant(0.0), 1.0, 1.0, &KernelConfig::default()),
            0.0
        );
    }

    fn erf_trapezoid(z: f64) -> f64 {
        let n = 200_000;
        let h = z / n as f64;
        let mut s = 0.5 * (1.0 + (-z * z).exp());
        for i in 1..n {
            let u = i as f64 * h;
            s += (-u * u).exp();
        }
        2.0 / PI.sqrt() * s * h
    }

    #[test]
    fn constant_flux_boundary_value() {
        let alpha = 0.7;
        for t in [0.05, 0.5, 2.0, 9.0] {
            let v = boundary_term(|_| -alpha, 0.0, t, &KernelConfig::default());
            let oracle = alpha * erf_trapezoid(t.sqrt());
            assert!((v - oracle).abs() <= 1e-10, "t={t}: {v} vs {oracle}");
        }
        assert_eq!(boundary_term(|_| 0.0, 0.3, 1.0, &KernelConfig::default()), 0.0);
    }

    #[test]
    fn lattice_weights_reproduce_direct_quadrature() {
        let gl = GaussLegendre::new(NODES);
        let cfg = KernelConfig::default();
        let dt = 0.1;
        let w = boundary_weights(&gl, 0.4, dt, 11, &cfg);
        // piecewise-linear g is integrated exactly up to quadrature error
        let g = |s: f64| -1.0 - 0.5 * s;
        let gv: Vec<f64> = (0..11).map(|j| g(j as f64 * dt)).collect();
        let via_w: f64 = w[10].iter().zip(&gv).map(|(a, b)| a * b).sum();
        let direct = boundary_integral(g, 0.4, 1.0, &cfg);
        assert!((via_w - direct).abs() < 1e-12, "{via_w} vs {direct}");
    }

    #[test]
    fn steady_pair_is_a_fixed_point() {
        let (alpha, m) = (1.5, 4.0);
        let ss = SteadyState::new(alpha, m).unwrap();
        let p = ModelParams::new(alpha, m, 0.0).unwrap();
        let data = InitialData::steady(&ss);
        let q = data.f.clone();
        let opts = IterateOptions {
            seeds: Seeds::Custom {
                lower: q.clone(),
                upper: q.clone(),
            },
            tol: 0.0,
            k_max: 3,
            ..Default::default()
        };
        let lat = Lattice {
            l: 5.0,
            dx: 0.25,
            dt: 0.1,
            t_end: 1.0,
        };
        let st = monotone_iterate(&p, &data, &lat, &opts).unwrap();
        for (n, _) in st.ts.iter().enumerate() {
            for (i, &x) in st.xs.iter().enumerate() {
                assert!((st.lower_at(n, i) - ss.profile(x)).abs() < 1e-9);
                assert!((st.upper_at(n, i) - ss.profile(x)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn lipschitz_constant() {
        // g'(q) = alpha m q^{m-1}/(1+q^m)^2 peaks at q^m = (m-1)/(m+1)
        let (alpha, m) = (1.0f64, 2.0f64);
        let q = ((m - 1.0) / (m + 1.0)).powf(1.0 / m);
        let peak = alpha * m * q.powf(m - 1.0) / (1.0 + q.powf(m)).powi(2);
        assert!((flux_lipschitz(alpha, m, 3.0) - peak).abs() < 1e-6);
        assert!(flux_lipschitz(1.0, 0.5, 1.0).is_infinite());
    }

    #[test]
    fn iteration_rejects_delay() {
        let p = ModelParams::new(1.5, 4.0, 0.5).unwrap();
        let data = InitialData::steady(&p.steady_state().unwrap());
        assert!(matches!(
            monotone_iterate(&p, &data, &Lattice::default(), &IterateOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ladder_rejects_coarse_lattice() {
        let p = ModelParams::new(1.5, 4.0, 0.02).unwrap();
        let data = InitialData::steady(&p.steady_state().unwrap());
        assert!(matches!(
            ladder_solve(&p, &data, &LadderOptions::default()),
            Err(Error::LatticeTooCoarse { .. })
        ));
    }

    #[test]
    fn ladder_homogeneous_case() {
        let p = ModelParams::new(1.5, 4.0, 0.5).unwrap();
        let data = InitialData::with_constant_history(Profile::Constant(1.0)).unwrap();
        let opts = LadderOptions {
            flux: FluxLaw::Constant(0.0),
            ..Default::default()
        };
        let tr = ladder_solve(&p, &data, &opts).unwrap();
        for (t, v) in tr.times.iter().zip(&tr.q0) {
            assert!((v - (-t).exp()).abs() < 1e-10);
        }
    }
}
