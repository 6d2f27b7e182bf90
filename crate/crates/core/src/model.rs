//! Model parameters, initial data, the steady state and the boundary flux law.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{require, Error, Result};

/// Absolute tolerance on the compatibility condition `h(0) = f(0)`.
pub const COMPAT_TOL: f64 = 1e-12;

/// Dimensional parameters of the membrane flux model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct PhysicalParams {
    /// Diffusivity.
    pub D: f64,
    /// Clearance rate.
    pub k: f64,
    /// Maximum membrane flux.
    pub A: f64,
    /// Threshold concentration.
    pub P0: f64,
    pub m: f64,
    /// Delay in physical time units.
    pub T0: f64,
}

/// Dimensionless parameters `(alpha, m, tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub alpha: f64,
    pub m: f64,
    pub tau: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, m: f64, tau: f64) -> Result<Self> {
        let p = Self { alpha, m, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.alpha > 0.0 && self.alpha.is_finite(),
            "alpha",
            self.alpha,
            "alpha > 0",
        )?;
        require(self.m > 0.0 && self.m.is_finite(), "m", self.m, "m > 0")?;
        require(self.tau >= 0.0 && self.tau.is_finite(), "tau", self.tau, "tau >= 0")
    }

    pub fn steady_state(&self) -> Result<SteadyState> {
        SteadyState::new(self.alpha, self.m)
    }

    /// Boundary flux `q_x(0, t)` for a delayed boundary value `q0`.
    pub fn flux(&self, q0: f64) -> f64 {
        flux(q0, self.alpha, self.m)
    }
}

/// Scales physical parameters to `(alpha, m, tau)`.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<ModelParams> {
    require(p.D > 0.0, "D", p.D, "D > 0")?;
    require(p.k > 0.0, "k", p.k, "k > 0")?;
    require(p.A > 0.0, "A", p.A, "A > 0")?;
    require(p.P0 > 0.0, "P0", p.P0, "P0 > 0")?;
    require(p.m > 0.0, "m", p.m, "m > 0")?;
    require(p.T0 >= 0.0, "T0", p.T0, "T0 >= 0")?;
    ModelParams::new(p.A / (p.P0 * (p.D * p.k).sqrt()), p.m, p.k * p.T0)
}

/// Unique root of `c + c^(m+1) = alpha` in `(0, alpha)`.
pub fn steady_state_c(alpha: f64, m: f64) -> Result<f64> {
    require(alpha > 0.0 && alpha.is_finite(), "alpha", alpha, "alpha > 0")?;
    require(m > 0.0 && m.is_finite(), "m", m, "m > 0")?;

    let phi = |c: f64| c + c.powf(m + 1.0) - alpha;
    let (mut lo, mut hi) = (0.0, alpha);
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut c = 0.5 * (lo + hi);
    for _ in 0..5 {
        let d = 1.0 + (m + 1.0) * c.powf(m);
        let next = c - phi(c) / d;
        c = next.clamp(lo, hi);
    }
    Ok(c)
}

/// Linearized gain at the steady root `c`.
pub fn feedback_gain(alpha: f64, m: f64, c: f64) -> f64 {
    let cm = c.powf(m);
    m * alpha * c.powf(m - 1.0) / ((1.0 + cm) * (1.0 + cm))
}

/// Boundary flux `-alpha / (1 + q0^m)`. Negative `q0` is clamped to zero.
pub fn flux(q0: f64, alpha: f64, m: f64) -> f64 {
    -alpha / (1.0 + q0.max(0.0).powf(m))
}

/// Checked form of [`flux`]: rejects negative boundary values.
pub fn boundary_flux(q0: f64, alpha: f64, m: f64) -> Result<f64> {
    require(q0 >= 0.0, "q0", q0, "q0 >= 0")?;
    Ok(flux(q0, alpha, m))
}

/// Large-`m` estimate of the gain.
pub fn asymptotic_gain(alpha: f64, m: f64) -> f64 {
    if alpha > 1.0 {
        m * (alpha - 1.0) / alpha
    } else {
        let am = alpha.powf(m);
        m * am / ((1.0 + am) * (1.0 + am))
    }
}

/// Steady root, gain and exponential profile.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct SteadyState {
    pub c: f64,
    pub Q: f64,
}

impl SteadyState {
    pub fn new(alpha: f64, m: f64) -> Result<Self> {
        let c = steady_state_c(alpha, m)?;
        Ok(Self {
            c,
            Q: feedback_gain(alpha, m, c),
        })
    }

    pub fn profile(&self, x: f64) -> f64 {
        self.c * (-x).exp()
    }
}

/// Ordered lower solution `c exp(-zeta x - beta x^gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LowerSolution {
    pub c: f64,
    pub zeta: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LowerSolution {
    pub fn new(alpha: f64, m: f64, zeta: f64, beta: f64, gamma: f64) -> Result<Self> {
        require(gamma >= 2.0, "gamma", gamma, "gamma >= 2")?;
        require(beta > 1.0, "beta", beta, "beta > 1")?;
        let bound = (beta * gamma * (gamma - 1.0) + 1.0).sqrt();
        require(
            zeta >= bound * (1.0 - 1e-14),
            "zeta",
            zeta,
            "zeta >= sqrt(beta*gamma*(gamma-1) + 1)",
        )?;
        Ok(Self {
            c: steady_state_c(alpha, m)?,
            zeta,
            beta,
            gamma,
        })
    }

    /// `gamma = 2`, `beta = 1.01` and the smallest admissible `zeta`.
    pub fn with_defaults(alpha: f64, m: f64) -> Result<Self> {
        let beta = 1.01;
        Self::new(alpha, m, (2.0 * beta + 1.0).sqrt(), beta, 2.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c * (-self.zeta * x - self.beta * x.powf(self.gamma)).exp()
    }

    /// Checks `f >= lower` at the given sample points.
    pub fn check_below(&self, f: &Profile, xs: &[f64]) -> Result<()> {
        for &x in xs {
            let (lo, fx) = (self.eval(x), f.eval(x));
            if fx < lo - 1e-12 {
                return Err(Error::InitialData(format!(
                    "f({x}) = {fx} lies below the lower solution {lo}"
                )));
            }
        }
        Ok(())
    }
}

/// `c exp(-zeta x - beta x^gamma)` with parameter validation.
pub fn lower_solution(x: f64, alpha: f64, m: f64, zeta: f64, beta: f64, gamma: f64) -> Result<f64> {
    Ok(LowerSolution::new(alpha, m, zeta, beta, gamma)?.eval(x))
}

pub type ProfileFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A scalar function of one variable, closed-form or sampled.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    /// `amplitude * exp(-rate * x)`.
    Exponential {
        amplitude: f64,
        rate: f64,
    },
    /// Piecewise-linear through `(knots[i], values[i])`, held constant outside the knots.
    Sampled {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
    /// Arbitrary callable with a caller-supplied supremum.
    Custom {
        func: Arc<ProfileFn>,
        sup: f64,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Self::Exponential { amplitude, rate } => f
                .debug_struct("Exponential")
                .field("amplitude", amplitude)
                .field("rate", rate)
                .finish(),
            Self::Sampled { knots, .. } => f
                .debug_struct("Sampled")
                .field("len", &knots.len())
                .finish_non_exhaustive(),
            Self::Custom { sup, .. } => f.debug_struct("Custom").field("sup", sup).finish_non_exhaustive(),
        }
    }
}

impl Profile {
    pub fn custom(func: impl Fn(f64) -> f64 + Send + Sync + 'static, sup: f64) -> Self {
        Self::Custom {
            func: Arc::new(func),
            sup,
        }
    }

    /// Builds a sampled profile; knots must be strictly increasing.
    pub fn sampled(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::InitialData(format!(
                "sampled profile needs matching nonempty columns (got {} knots, {} values)",
                knots.len(),
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InitialData("knots must be strictly increasing".into()));
        }
        if values.iter().chain(&knots).any(|v| !v.is_finite()) {
            return Err(Error::InitialData("sampled profile contains non-finite values".into()));
        }
        Ok(Self::Sampled { knots, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Exponential { amplitude, rate } => amplitude * (-rate * x).exp(),
            Self::Sampled { knots, values } => interp(knots, values, x),
            Self::Custom { func, .. } => func(x),
        }
    }

    /// Supremum over `[0, inf)` for closed forms, over the samples otherwise.
    pub fn sup(&self) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::Exponential { amplitude, rate } => {
                if *rate >= 0.0 {
                    amplitude.max(0.0)
                } else {
                    f64::INFINITY
                }
            }
            Self::Sampled { values, .. } => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Self::Custom { sup, .. } => *sup,
        }
    }

    /// Covered interval for sampled data; closed forms cover the whole line.
    pub fn coverage(&self) -> (f64, f64) {
        match self {
            Self::Sampled { knots, .. } => (knots[0], knots[knots.len() - 1]),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn check_nonnegative(&self, what: &str) -> Result<()> {
        let bad = match self {
            Self::Constant(v) => *v < 0.0,
            Self::Exponential { amplitude, .. } => *amplitude < 0.0,
            Self::Sampled { values, .. } => values.iter().any(|v| *v < 0.0),
            Self::Custom { .. } => false,
        };
        if bad {
            return Err(Error::InitialData(format!("{what} must be nonnegative")));
        }
        Ok(())
    }
}

pub(crate) fn interp(knots: &[f64], values: &[f64], x: f64) -> f64 {
    let n = knots.len();
    if x <= knots[0] {
        return values[0];
    }
    if x >= knots[n - 1] {
        return values[n - 1];
    }
    let i = knots.partition_point(|&k| k <= x) - 1;
    let w = (x - knots[i]) / (knots[i + 1] - knots[i]);
    values[i] + w * (values[i + 1] - values[i])
}

/// Initial field `f` on `x >= 0` and boundary history `h` on `[-tau, 0]`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub f: Profile,
    pub h: Profile,
}

impl InitialData {
    pub fn new(f: Profile, h: Profile) -> Result<Self> {
        f.check_nonnegative("f")?;
        h.check_nonnegative("h")?;
        let sup = f.sup();
        if !sup.is_finite() {
            return Err(Error::InitialData("f must be bounded".into()));
        }
        let (f0, h0) = (f.eval(0.0), h.eval(0.0));
        if f0 < 0.0 || h0 < 0.0 {
            return Err(Error::InitialData("f(0) and h(0) must be nonnegative".into()));
        }
        if (h0 - f0).abs() > COMPAT_TOL {
            return Err(Error::InitialData(format!(
                "compatibility h(0) = f(0) violated: h(0) = {h0}, f(0) = {f0}"
            )));
        }
        Ok(Self { f, h })
    }

    /// `f = c exp(-x)`, `h = c`.
    pub fn steady(ss: &SteadyState) -> Self {
        Self {
            f: Profile::Exponential {
                amplitude: ss.c,
                rate: 1.0,
            },
            h: Profile::Constant(ss.c),
        }
    }

    /// `h` held at `f(0)`.
    pub fn with_constant_history(f: Profile) -> Result<Self> {
        let h = Profile::Constant(f.eval(0.0));
        Self::new(f, h)
    }

    /// `M = sup f`.
    pub fn sup_f(&self) -> f64 {
        self.f.sup()
    }

    /// Errors when sampled `h` does not reach back to `-tau`.
    pub fn check_history(&self, tau: f64) -> Result<()> {
        let (lo, _) = self.h.coverage();
        if lo > -tau + 1e-12 {
            return Err(Error::HistoryUnderrun {
                covered_from: lo,
                needed_from: -tau,
            });
        }
        Ok(())
    }
}
