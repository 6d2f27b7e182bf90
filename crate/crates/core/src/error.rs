use alloc::string::String;

/// Errors raised by the model, solvers and diagnostics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    #[error("domain error: {name} = {value} ({requirement})")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// Initial data violates nonnegativity, boundedness or `h(0) = f(0)`.
    #[error("invalid initial data: {0}")]
    InitialData(String),

    /// The history function does not cover the lookback window `[-tau, 0]`.
    #[error("history underrun: h covers [{covered_from}, 0] but the delay needs [{needed_from}, 0]")]
    HistoryUnderrun { covered_from: f64, needed_from: f64 },

    /// The time stepper produced a NaN or infinite value.
    #[error("non-finite value in solution at t = {t}")]
    NonFinite { t: f64 },

    /// Upper/lower iterates lost their ordering beyond the allowed slack.
    #[error("ordering violation at iteration {k}: slack {slack:e} (x = {x}, t = {t})")]
    OrderingViolation { k: usize, slack: f64, x: f64, t: f64 },

    /// A seed pair does not bracket the initial data.
    #[error("seed pair does not bracket f at x = {x}: lower {lower}, f {f}, upper {upper}")]
    SeedOrdering { x: f64, lower: f64, f: f64, upper: f64 },

    /// The requested quantity needs `Q > 1`.
    #[error("no Hopf threshold exists for Q = {0} (requires Q > 1)")]
    NoThreshold(f64),

    /// A report or trajectory does not satisfy an operation's precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The iteration lattice cannot resolve the delay.
    #[error("lattice too coarse: step {step} exceeds delay {tau}")]
    LatticeTooCoarse { step: f64, tau: f64 },

    /// A root or continuation solve did not converge.
    #[error("no convergence: {0}")]
    Convergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn require(ok: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            requirement,
        })
    }
}
