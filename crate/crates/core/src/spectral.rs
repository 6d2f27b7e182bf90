//! Linear stability of the steady state.
//!
//! Perturbations `e^{lambda t} phi(x)` with `phi = e^{-rho x}` and
//! `lambda = rho^2 - 1` satisfy `F(rho) = rho + Q exp(-(rho^2 - 1) tau) = 0`
//! when `Re rho > 0`; the mirrored form `rho - Q exp(...)` with `Re rho < 0`
//! describes the same eigenvalues.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{require, Error, Result};
use crate::lambert::lambert_w;
use crate::model::SteadyState;

/// Width of the band around `Q = 1` classified as marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Branch {
    /// `rho + Q e^{...}`, decaying eigenfunction needs `a > 0`.
    Positive,
    /// `rho - Q e^{...}`, decaying eigenfunction needs `a < 0`.
    Negative,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// A root `rho = a + ib` and its eigenvalue `lambda = rho^2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CharRoot {
    pub a: f64,
    pub b: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub branch: Branch,
}

impl CharRoot {
    pub fn new(a: f64, b: f64, branch: Branch) -> Self {
        Self {
            a,
            b,
            lambda_re: a * a - b * b - 1.0,
            lambda_im: 2.0 * a * b,
            branch,
        }
    }

    fn from_rho(rho: Complex64, branch: Branch) -> Self {
        Self::new(rho.re, rho.im, branch)
    }

    pub fn rho(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    /// True when the eigenfunction decays in `x`.
    pub fn admissible(&self) -> bool {
        match self.branch {
            Branch::Positive => self.a > 0.0,
            Branch::Negative => self.a < 0.0,
        }
    }
}

/// Real and imaginary parts of the characteristic function at `a + ib`.
pub fn char_residual(a: f64, b: f64, tau: f64, q: f64, branch: Branch) -> (f64, f64) {
    let s = branch.sign();
    let e = q * (-(a * a - b * b - 1.0) * tau).exp();
    let th = 2.0 * a * b * tau;
    (a + s * e * th.cos(), b - s * e * th.sin())
}

fn char_fn(rho: Complex64, tau: f64, q: f64, branch: Branch) -> (Complex64, Complex64) {
    let s = branch.sign();
    let e = (-(rho * rho - 1.0) * tau).exp() * q;
    (rho + s * e, Complex64::new(1.0, 0.0) - s * 2.0 * tau * rho * e)
}

fn check_supercritical(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::NoThreshold(q))
    }
}

/// `omega = sqrt(Q^4 - 1)`.
pub fn crossing_frequency(q: f64) -> Result<f64> {
    check_supercritical(q)?;
    Ok((q.powi(4) - 1.0).sqrt())
}

/// Interval `(pi/(2 omega), pi/omega)` containing the threshold delay.
pub fn hopf_bracket(q: f64) -> Result<(f64, f64)> {
    let lo = PI / (2.0 * crossing_frequency(q)?);
    Ok((lo, 2.0 * lo))
}

/// Smallest delay at which an eigenvalue pair reaches the imaginary axis.
pub fn hopf_tau0(q: f64) -> Result<f64> {
    let omega = crossing_frequency(q)?;
    let s = ((q * q - 1.0) / (q * q + 1.0)).sqrt();
    // tan(theta) + s increases from -inf to s on (pi/2, pi)
    let (mut lo, mut hi) = (PI / 2.0, PI);
    while (hi - lo) / omega > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid.tan() + s < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / omega)
}

/// Closed form `(pi - atan(sqrt(Q^2-1)/sqrt(Q^2+1))) / omega`.
pub fn hopf_tau0_closed(q: f64) -> Result<f64> {
    let omega = crossing_frequency(q)?;
    let s = ((q * q - 1.0) / (q * q + 1.0)).sqrt();
    Ok((PI - s.atan()) / omega)
}

/// `(a0, b0)` with `a0^2 + b0^2 = Q^2` and `a0^2 - b0^2 = 1`.
pub fn crossing_pair(q: f64) -> Result<(f64, f64)> {
    require(q >= 1.0, "Q", q, "Q >= 1")?;
    Ok((((q * q + 1.0) / 2.0).sqrt(), ((q * q - 1.0) / 2.0).sqrt()))
}

/// `d Re(lambda) / d tau` at the threshold.
pub fn crossing_speed(q: f64, tau0: f64) -> Result<f64> {
    check_supercritical(q)?;
    let (a0, b0) = crossing_pair(q)?;
    let th = 2.0 * a0 * b0 * tau0;
    let (c, s) = (th.cos(), th.sin());
    let d1 = 1.0 - 2.0 * q * tau0 * (a0 * c + b0 * s);
    let d2 = 2.0 * q * tau0 * (b0 * c - a0 * s);
    Ok(4.0 * q * a0 * b0 / (d1 * d1 + d2 * d2) * (a0 * s - b0 * c))
}

/// Threshold data for a supercritical gain.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct HopfAnalysis {
    pub Q: f64,
    pub omega: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tau0: f64,
    pub a0: f64,
    pub b0: f64,
    pub crossing_speed: f64,
}

impl HopfAnalysis {
    pub fn new(q: f64) -> Result<Self> {
        let omega = crossing_frequency(q)?;
        let (bracket_lo, bracket_hi) = hopf_bracket(q)?;
        let tau0 = hopf_tau0(q)?;
        let (a0, b0) = crossing_pair(q)?;
        Ok(Self {
            Q: q,
            omega,
            bracket_lo,
            bracket_hi,
            tau0,
            a0,
            b0,
            crossing_speed: crossing_speed(q, tau0)?,
        })
    }

    /// Linear oscillation period `2 pi / omega` at the threshold.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    StableAllDelays,
    StableBelowThreshold,
    OscillatoryAboveThreshold,
    Marginal,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::StableAllDelays => "StableAllDelays",
            Regime::StableBelowThreshold => "StableBelowThreshold",
            Regime::OscillatoryAboveThreshold => "OscillatoryAboveThreshold",
            Regime::Marginal => "Marginal",
        }
    }

    /// Whether the linearization predicts decay back to the steady state.
    pub fn is_stable(self) -> Option<bool> {
        match self {
            Regime::StableAllDelays | Regime::StableBelowThreshold => Some(true),
            Regime::OscillatoryAboveThreshold => Some(false),
            Regime::Marginal => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StabilityVerdict {
    pub regime: Regime,
    pub tau0: Option<f64>,
}

/// Linear stability regime of the steady state for `(alpha, m, tau)`.
pub fn classify(alpha: f64, m: f64, tau: f64) -> Result<StabilityVerdict> {
    require(tau >= 0.0, "tau", tau, "tau >= 0")?;
    let q = SteadyState::new(alpha, m)?.Q;
    Ok(classify_gain(q, tau))
}

/// Same as [`classify`] for a known gain.
pub fn classify_gain(q: f64, tau: f64) -> StabilityVerdict {
    if q < 1.0 - MARGINAL_TOL {
        return StabilityVerdict {
            regime: Regime::StableAllDelays,
            tau0: None,
        };
    }
    if q <= 1.0 + MARGINAL_TOL {
        return StabilityVerdict {
            regime: Regime::Marginal,
            tau0: None,
        };
    }
    let tau0 = hopf_tau0(q).ok();
    let regime = match tau0 {
        Some(t0) if (tau - t0).abs() <= MARGINAL_TOL * t0.max(1.0) => Regime::Marginal,
        Some(t0) if tau < t0 => Regime::StableBelowThreshold,
        Some(_) => Regime::OscillatoryAboveThreshold,
        None => Regime::Marginal,
    };
    StabilityVerdict { regime, tau0 }
}

/// All roots of the characteristic equation for `tau > 0` via Lambert W.
///
/// Branch `k` of `W(2 tau Q^2 e^{2 tau})` gives `lambda = W / (2 tau) - 1`.
/// The returned root may be inadmissible; check [`CharRoot::admissible`].
pub fn lambert_root(q: f64, tau: f64, k: i32) -> Option<CharRoot> {
    if !(tau > 0.0) {
        return None;
    }
    let z = Complex64::new(2.0 * tau * q * q * (2.0 * tau).exp(), 0.0);
    let w = lambert_w(k, z)?;
    let lambda = w / (2.0 * tau) - 1.0;
    let rho = -q * (-lambda * tau).exp();
    // polish against round-off in the exp/log chain
    newton(rho, tau, q, Branch::Positive).map(|r| CharRoot::from_rho(r, Branch::Positive))
}

fn newton(mut rho: Complex64, tau: f64, q: f64, branch: Branch) -> Option<Complex64> {
    for _ in 0..50 {
        let (f, df) = char_fn(rho, tau, q, branch);
        let step = f / df;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        rho -= step;
        if step.norm() <= 1e-14 * (1.0 + rho.norm()) {
            let (f, _) = char_fn(rho, tau, q, branch);
            return (f.norm() <= 1e-9 * (1.0 + rho.norm())).then_some(rho);
        }
    }
    None
}

/// One point of a continuation run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrackedRoot {
    pub tau: f64,
    pub root: CharRoot,
    /// Newton failed even at the smallest step and the point was reseeded.
    pub reseeded: bool,
}

const MIN_STEP: f64 = 1e-6;

/// Follows the rightmost admissible eigenvalue pair across `tau_grid`.
///
/// At `tau = 0` the equation is real and its only root `rho = -Q` does not
/// give a decaying eigenfunction, so that point is reported as inadmissible.
/// For `tau > 0` the branch is started from the `k = 1` Lambert root and
/// continued with a tangent predictor and Newton corrector; steps that fail
/// are halved down to `1e-6` before the root is reseeded from Lambert W.
pub fn track_rightmost_root(q: f64, tau_grid: &[f64]) -> Result<Vec<TrackedRoot>> {
    require(q > 0.0, "Q", q, "Q > 0")?;
    if tau_grid.windows(2).any(|w| !(w[1] > w[0])) || tau_grid.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::Precondition(
            "tau grid must be nonnegative and increasing".into(),
        ));
    }

    let mut out = Vec::with_capacity(tau_grid.len());
    let mut prev: Option<(f64, Complex64)> = None;
    for &tau in tau_grid {
        if tau == 0.0 {
            out.push(TrackedRoot {
                tau,
                root: CharRoot::new(-q, 0.0, Branch::Positive),
                reseeded: false,
            });
            continue;
        }
        let (rho, reseeded) = match prev {
            None => (seed(q, tau)?, false),
            Some((t_prev, rho_prev)) => match continue_root(q, t_prev, rho_prev, tau) {
                Some(r) => (r, false),
                None => (seed(q, tau)?, true),
            },
        };
        prev = Some((tau, rho));
        out.push(TrackedRoot {
            tau,
            root: CharRoot::from_rho(rho, Branch::Positive),
            reseeded,
        });
    }
    Ok(out)
}

fn seed(q: f64, tau: f64) -> Result<Complex64> {
    lambert_root(q, tau, 1)
        .map(|r| r.rho())
        .ok_or_else(|| Error::Convergence(format!("Lambert seed failed at Q = {q}, tau = {tau}")))
}

fn continue_root(q: f64, mut t: f64, mut rho: Complex64, target: f64) -> Option<Complex64> {
    let mut h = target - t;
    while t < target {
        h = h.min(target - t);
        // d rho / d tau = -F_tau / F_rho
        let (_, df) = char_fn(rho, t, q, Branch::Positive);
        let lam = rho * rho - 1.0;
        let e = (-lam * t).exp() * q;
        let slope = lam * e / df;
        let shift = (slope * h).norm();
        let guess = rho + slope * h;
        let small_move = shift <= 0.05 * rho.norm();
        match newton(guess, t + h, q, Branch::Positive) {
            // a corrector much larger than the predictor means a jump to a neighbouring branch
            Some(r) if small_move && (r - guess).norm() <= 0.1 * shift + 1e-12 => {
                rho = r;
                t += h;
                h *= 2.0;
            }
            _ => {
                h *= 0.5;
                if h < MIN_STEP {
                    return None;
                }
            }
        }
    }
    Some(rho)
}
