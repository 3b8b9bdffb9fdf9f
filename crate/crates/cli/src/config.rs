//! TOML run configuration.
//!
//! ```toml
//! theta = [0.6667, 1.3333, 1.0, 1.0]   # true parameters (required with [sim])
//! x0 = [1.0, 2.0]                      # true initial state (required with [sim])
//!
//! [model]
//! name = "lotka_volterra"
//!
//! [sim]
//! t_end = 10.0
//!
//! [window]
//! a = 0.0
//! b = 10.0
//! grid_n = 200
//! ```
//!
//! Top-level keys must precede the first table, as TOML requires.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use lindep_core::models::Control;
use lindep_core::recovery::{DerivativeSource, SolveMode};
use lindep_core::Strategy;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(default)]
    pub window: WindowSection,
    #[serde(default)]
    pub derivatives: DerivativesSection,
    #[serde(default)]
    pub selection: SelectionSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: String,
    /// Linparam only: `(s+1) × b` coefficient matrix, one inner array per row.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    /// Linparam only: ascending coefficients of `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<f64>>,
    /// Linparam only: `ρ₀, …, ρₘ`, each ascending.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<f64>>>,
    /// Linparam only: the control `u(t)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<ControlSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlSection {
    Polynomial {
        coeffs: Vec<f64>,
    },
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    Exponential {
        amplitude: f64,
        rate: f64,
        #[serde(default)]
        offset: f64,
    },
}

impl From<&ControlSection> for Control {
    fn from(c: &ControlSection) -> Self {
        match *c {
            ControlSection::Polynomial { ref coeffs } => Control::Polynomial(coeffs.clone()),
            ControlSection::Sinusoid { amplitude, frequency, phase, offset } => Control::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            },
            ControlSection::Exponential { amplitude, rate, offset } => Control::Exponential { amplitude, rate, offset },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_end: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Sample spacing for numeric derivatives.
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_rtol() -> f64 {
    1e-10
}
fn default_atol() -> f64 {
    1e-12
}
fn default_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Relative paths resolve against the config file's directory.
    pub csv: PathBuf,
}

/// Semi-open data window `[a, b)`. Missing ends default to the simulated
/// span or the data range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Grid points for analytic jets.
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
}

fn default_grid_n() -> usize {
    200
}

impl Default for WindowSection {
    fn default() -> Self {
        Self { a: None, b: None, grid_n: default_grid_n() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    #[default]
    Analytic,
    Numeric,
}

impl From<DerivativeMode> for DerivativeSource {
    fn from(m: DerivativeMode) -> Self {
        match m {
            DerivativeMode::Analytic => DerivativeSource::Analytic,
            DerivativeMode::Numeric => DerivativeSource::Numeric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativesSection {
    #[serde(default)]
    pub mode: DerivativeMode,
    #[serde(default = "default_stencil")]
    pub stencil: usize,
}

fn default_stencil() -> usize {
    5
}

impl Default for DerivativesSection {
    fn default() -> Self {
        Self { mode: DerivativeMode::default(), stencil: default_stencil() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    #[default]
    Greedy,
    Exhaustive,
}

impl From<StrategyName> for Strategy {
    fn from(s: StrategyName) -> Self {
        match s {
            StrategyName::Greedy => Strategy::Greedy,
            StrategyName::Exhaustive => Strategy::Exhaustive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolveName {
    Square,
    #[default]
    Oversampled,
}

impl From<SolveName> for SolveMode {
    fn from(s: SolveName) -> Self {
        match s {
            SolveName::Square => SolveMode::Square,
            SolveName::Oversampled => SolveMode::Oversampled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionSection {
    #[serde(default)]
    pub strategy: StrategyName,
    /// Relative rank tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub mode: SolveName,
}

fn default_tol() -> f64 {
    lindep_core::timeselect::DEFAULT_RANK_TOL
}

impl Default for SelectionSection {
    fn default() -> Self {
        Self {
            strategy: StrategyName::default(),
            tol: default_tol(),
            mode: SolveName::default(),
        }
    }
}

/// One standard deviation for every channel, or one per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sigma {
    Uniform(f64),
    PerChannel(Vec<f64>),
}

impl Sigma {
    pub fn per_channel(&self, m: usize) -> Vec<f64> {
        match self {
            Sigma::Uniform(s) => vec![*s; m],
            Sigma::PerChannel(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma: Sigma,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.message().to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }
}
