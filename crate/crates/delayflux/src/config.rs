//! TOML run configuration.
//!
//! Every section is optional; command-line flags fill or override the
//! `[model]` values. Relative paths are resolved against the directory of
//! the config file.

use std::path::{Path, PathBuf};

use delayflux_core::diagnostics::{AnalyzeOptions, SweepSim};
use delayflux_core::fd::{Grid, SimOptions};
use delayflux_core::greens::{Coupling, IterateOptions, Lattice, Seeds};
use delayflux_core::{InitialData, ModelParams, Profile, SteadyState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub iterate: IterateSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

/// Initial field and history. The default is `2 c e^{-x}` with constant history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    /// The equilibrium profile `c e^{-x}` and `h = c`.
    Steady,
    Exponential {
        /// Defaults to `2 c`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate: Option<f64>,
    },
    /// `x,f` and `t,h` CSV files; without `h` the history is `f(0)`.
    File {
        f: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        h: Option<PathBuf>,
    },
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection::Exponential {
            amplitude: None,
            rate: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Defaults to `max(40 tau, 20)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    /// Defaults to `t_end / 50`; zero disables snapshots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_interval: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient_frac: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_peaks: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedChoice {
    #[default]
    Bracket,
    LowerSolutionAndSup,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingChoice {
    #[default]
    Crossed,
    Own,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<SeedChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub m: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tau: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confirm: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_horizon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a config file and makes its relative paths absolute.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_owned(),
            msg: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Config {
            path: path.to_owned(),
            msg: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let InitialSection::File { f, h } = &mut cfg.initial {
            *f = base.join(&*f);
            if let Some(h) = h {
                *h = base.join(&*h);
            }
        }
        if let Some(dir) = &mut cfg.output.dir {
            *dir = base.join(&*dir);
        }
        Ok(cfg)
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let alpha = self
            .model
            .alpha
            .ok_or_else(|| CliError::Usage("alpha is required (--alpha or [model] alpha)".into()))?;
        let m = self
            .model
            .m
            .ok_or_else(|| CliError::Usage("m is required (--m or [model] m)".into()))?;
        Ok(ModelParams::new(alpha, m, self.model.tau.unwrap_or(0.0))?)
    }

    pub fn initial_data(&self, params: &ModelParams) -> Result<InitialData> {
        let ss = SteadyState::new(params.alpha, params.m)?;
        let data = match &self.initial {
            InitialSection::Steady => InitialData::steady(&ss),
            InitialSection::Exponential { amplitude, rate } => {
                let f = Profile::Exponential {
                    amplitude: amplitude.unwrap_or(2.0 * ss.c),
                    rate: rate.unwrap_or(1.0),
                };
                InitialData::with_constant_history(f)?
            }
            InitialSection::File { f, h } => {
                let f = io::read_profile(f, "x", "f")?;
                match h {
                    Some(h) => {
                        let h = io::read_history(h)?;
                        let data = InitialData::new(f, h)?;
                        data.check_history(params.tau)?;
                        data
                    }
                    None => InitialData::with_constant_history(f)?,
                }
            }
        };
        Ok(data)
    }

    pub fn t_end(&self, tau: f64) -> f64 {
        self.grid.t_end.unwrap_or((40.0 * tau).max(20.0))
    }

    pub fn fd_grid(&self, tau: f64) -> Result<Grid> {
        let d = Grid::default_for(tau, self.t_end(tau));
        Ok(Grid::new(
            self.grid.l.unwrap_or(d.l),
            self.grid.nx.unwrap_or(d.nx),
            self.grid.dt.unwrap_or(d.dt),
            d.t_end,
        )?)
    }

    pub fn sim_options(&self, grid: &Grid) -> SimOptions {
        let interval = self.simulate.snapshot_interval.unwrap_or(grid.t_end / 50.0);
        SimOptions {
            record_stride: self.simulate.record_stride.unwrap_or(1).max(1),
            snapshot_interval: (interval > 0.0).then_some(interval),
            ..Default::default()
        }
    }

    pub fn analyze_options(&self) -> AnalyzeOptions {
        let d = AnalyzeOptions::default();
        let s = &self.simulate;
        AnalyzeOptions {
            transient_frac: s.transient_frac.unwrap_or(d.transient_frac),
            eps_s: s.eps_s.unwrap_or(d.eps_s),
            converge_tol: s.converge_tol.unwrap_or(d.converge_tol),
            window_peaks: s.window_peaks.unwrap_or(d.window_peaks),
        }
    }

    pub fn lattice(&self) -> Lattice {
        let d = Lattice::default();
        let s = &self.iterate;
        Lattice {
            l: s.l.unwrap_or(d.l),
            dx: s.dx.unwrap_or(d.dx),
            dt: s.dt.unwrap_or(d.dt),
            t_end: s.t_end.unwrap_or(d.t_end),
        }
    }

    pub fn iterate_options(&self) -> IterateOptions {
        let d = IterateOptions::default();
        let s = &self.iterate;
        IterateOptions {
            tol: s.tol.unwrap_or(d.tol),
            k_max: s.k_max.unwrap_or(d.k_max),
            seeds: match s.seeds.unwrap_or_default() {
                SeedChoice::Bracket => Seeds::Bracket,
                SeedChoice::LowerSolutionAndSup => Seeds::LowerSolutionAndSup,
            },
            coupling: match s.coupling.unwrap_or_default() {
                CouplingChoice::Crossed => Coupling::Crossed,
                CouplingChoice::Own => Coupling::Own,
            },
            ..d
        }
    }

    pub fn sweep_sim(&self) -> SweepSim {
        let d = SweepSim::default();
        let s = &self.sweep;
        SweepSim {
            nx: s.nx.unwrap_or(d.nx),
            dt_max: s.dt_max.unwrap_or(d.dt_max),
            windows: s.windows.unwrap_or(d.windows),
            min_horizon: s.min_horizon.unwrap_or(d.min_horizon),
            ..d
        }
    }
}
