//! JSON report. Every field except `timestamp` is a pure function of the
//! configuration, so reruns produce byte-identical reports up to that key.

use serde::Serialize;

use lindep_core::recovery::{DerivativeSource, SolveMode};
use lindep_core::{IdentificationReport, Model, Strategy};

use crate::config::Config;

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockEntry {
    pub index: usize,
    pub label: String,
    pub basis: Vec<String>,
    pub sigma: Vec<f64>,
    pub rank: usize,
    pub residual_norm: f64,
    pub condition_number: f64,
    pub selected_times: Vec<f64>,
    pub selected_min_singular: f64,
    pub selected_condition_number: f64,
    pub selected_determinant: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioEntry {
    pub label: String,
    pub parameter: String,
    pub value: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelativeError {
    /// Per parameter `|θ̂ᵢ − θᵢ| / |θᵢ|`.
    pub theta: Vec<f64>,
    pub theta_max: f64,
    /// Per state coordinate; `null` where the state is not recoverable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<Option<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: Tool,
    pub timestamp: String,
    pub config: Config,
    pub model: String,
    pub param_names: Vec<String>,
    pub theta_hat: Vec<f64>,
    pub state_names: Vec<String>,
    pub x0_hat: Vec<Option<f64>>,
    pub recoverable: Vec<bool>,
    pub state_time: f64,
    pub sigma_raw: Vec<f64>,
    pub sigma: Vec<f64>,
    pub image_residual: f64,
    pub blocks: Vec<BlockEntry>,
    pub ratios: Vec<RatioEntry>,
    pub distinct_times: usize,
    pub q: usize,
    pub max_block_size: usize,
    pub window: [f64; 2],
    pub grid_points: usize,
    pub solve_mode: &'static str,
    pub strategy: &'static str,
    pub derivatives: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<RelativeError>,
}

fn rel(est: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        (est - truth).abs()
    } else {
        (est - truth).abs() / truth.abs()
    }
}

fn timestamp() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_default()
}

impl Report {
    pub fn new(cfg: &Config, model: &Model, r: &IdentificationReport) -> Self {
        let x0_hat = r
            .x0_hat
            .iter()
            .zip(&r.recoverable)
            .map(|(&v, &ok)| ok.then_some(v))
            .collect();
        let relative_error = cfg.theta.as_ref().map(|th| {
            let theta: Vec<f64> = r.theta_hat.iter().zip(th).map(|(&e, &t)| rel(e, t)).collect();
            let x0: Option<Vec<Option<f64>>> = cfg.x0.as_ref().map(|x| {
                r.x0_hat
                    .iter()
                    .zip(x)
                    .zip(&r.recoverable)
                    .map(|((&e, &t), &ok)| ok.then(|| rel(e, t)))
                    .collect()
            });
            RelativeError {
                theta_max: theta.iter().copied().fold(0.0, f64::max),
                theta,
                x0_max: x0.as_ref().map(|v| v.iter().flatten().copied().fold(0.0, f64::max)),
                x0,
            }
        });
        Report {
            tool: Tool { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
            timestamp: timestamp(),
            config: cfg.clone(),
            model: r.model.clone(),
            param_names: r.param_names.clone(),
            theta_hat: r.theta_hat.clone(),
            state_names: r.state_names.clone(),
            x0_hat,
            recoverable: r.recoverable.clone(),
            state_time: r.state_time,
            sigma_raw: r.sigma_raw.clone(),
            sigma: r.sigma.clone(),
            image_residual: r.image_residual,
            blocks: r
                .blocks
                .iter()
                .map(|b| BlockEntry {
                    index: b.index,
                    label: b.label.clone(),
                    basis: model.blocks[b.index].basis_labels.clone(),
                    sigma: b.sigma.clone(),
                    rank: b.rank,
                    residual_norm: b.residual_norm,
                    condition_number: b.condition_number,
                    selected_times: b.selection.times.clone(),
                    selected_min_singular: b.selection.min_singular,
                    selected_condition_number: b.selection.condition_number,
                    selected_determinant: b.selection.determinant,
                })
                .collect(),
            ratios: r
                .ratios
                .iter()
                .map(|x| RatioEntry {
                    label: x.label.clone(),
                    parameter: r.param_names[x.param_index].clone(),
                    value: x.value,
                    samples_used: x.used,
                })
                .collect(),
            distinct_times: r.distinct_times,
            q: r.q,
            max_block_size: r.max_block_size,
            window: [r.window.0, r.window.1],
            grid_points: r.grid_points,
            solve_mode: match r.solve_mode {
                SolveMode::Square => "square",
                SolveMode::Oversampled => "oversampled",
            },
            strategy: match r.strategy {
                Strategy::Greedy => "greedy",
                Strategy::Exhaustive => "exhaustive",
            },
            derivatives: match r.derivatives {
                DerivativeSource::Analytic => "analytic",
                DerivativeSource::Numeric => "numeric",
            },
            relative_error,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
