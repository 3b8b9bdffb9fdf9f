//! Per-block linear solves for σ, reconciliation of duplicated components,
//! `θ = r⁻¹(σ)`, and reconstruction of the initial state.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::block::{ParameterMap, RegressionBlock, SigmaStore};
use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix, Svd};
use crate::ode::{self, Tolerances};
use crate::registry::Model;
use crate::system::{OutputJet, SystemSpec};
use crate::timeselect::{self, BasisMatrix, SelectedTimes, Strategy};

/// Which rows enter the σ solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Exactly the `q_j` selected times.
    Square,
    /// Least squares over every time in the window.
    #[default]
    Oversampled,
}

/// Where the jets came from; recorded in the report only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeSource {
    #[default]
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyConfig {
    /// Semi-open data window `[a, b)`; `None` keeps every jet.
    pub window: Option<(f64, f64)>,
    pub strategy: Strategy,
    pub rank_tol: f64,
    pub solve_mode: SolveMode,
    /// Relative tolerance for redundant σ pairs.
    pub reconcile_tol: f64,
    /// Relative tolerance for `r(θ̂) = σ`.
    pub image_tol: f64,
    pub ratio_guard: f64,
    pub ode: Tolerances,
    pub derivatives: DerivativeSource,
}

impl Default for IdentifyConfig {
    fn default() -> Self {
        Self {
            window: None,
            strategy: Strategy::Greedy,
            rank_tol: timeselect::DEFAULT_RANK_TOL,
            solve_mode: SolveMode::Oversampled,
            reconcile_tol: 1e-4,
            image_tol: 1e-6,
            ratio_guard: 1e-8,
            ode: Tolerances::default(),
            derivatives: DerivativeSource::Analytic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSolution {
    pub sigma: Vec<f64>,
    /// `‖Aσ − g₀‖ / ‖g₀‖` over every row of the basis matrix (absolute when
    /// the target vanishes).
    pub residual_norm: f64,
    /// Condition number of the matrix actually solved, after column scaling.
    pub condition_number: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockReport {
    pub index: usize,
    pub label: String,
    pub sigma: Vec<f64>,
    pub residual_norm: f64,
    pub condition_number: f64,
    pub selection: SelectedTimes,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioEstimate {
    pub label: String,
    pub param_index: usize,
    pub value: f64,
    /// Jets that passed the denominator guard.
    pub used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationReport {
    pub model: String,
    pub param_names: Vec<String>,
    pub state_names: Vec<String>,
    pub theta_hat: Vec<f64>,
    pub x0_hat: Vec<f64>,
    pub recoverable: Vec<bool>,
    /// Blocks in execution order.
    pub blocks: Vec<BlockReport>,
    /// Flat σ before reconciliation, in block-index order.
    pub sigma_raw: Vec<f64>,
    pub sigma: Vec<f64>,
    pub ratios: Vec<RatioEstimate>,
    pub image_residual: f64,
    pub state_time: f64,
    pub distinct_times: usize,
    pub q: usize,
    pub max_block_size: usize,
    pub window: (f64, f64),
    pub grid_points: usize,
    pub solve_mode: SolveMode,
    pub strategy: Strategy,
    pub derivatives: DerivativeSource,
}

fn relative_residual(a: &Matrix, sigma: &[f64], b: &[f64]) -> f64 {
    let fit = a.mul_vec(sigma);
    let r: Vec<f64> = fit.iter().zip(b).map(|(f, b)| f - b).collect();
    let nb = norm2(b);
    let nr = norm2(&r);
    if nb > 0.0 {
        nr / nb
    } else {
        nr
    }
}

/// Smallest relative singular value accepted by a square solve.
const SQUARE_SINGULAR_TOL: f64 = 1e-13;

/// Solves one block for σ. Square mode uses the selected rows only;
/// oversampled mode fits all rows by least squares.
pub fn solve_block(bm: &BasisMatrix, selected: &SelectedTimes, mode: SolveMode) -> Result<BlockSolution> {
    let q = bm.basis.cols();
    let (mut a, b) = match mode {
        SolveMode::Square => {
            if selected.rows.len() != q {
                return Err(Error::Dimension(alloc::format!(
                    "square solve needs {q} rows, got {}",
                    selected.rows.len()
                )));
            }
            (
                bm.basis.select_rows(&selected.rows),
                selected.rows.iter().map(|&r| bm.target[r]).collect::<Vec<_>>(),
            )
        }
        SolveMode::Oversampled => (bm.basis.clone(), bm.target.clone()),
    };
    let scale = a.equilibrate_columns();
    let svd = Svd::new(&a);
    let lo = svd.min_singular();
    if !(lo > SQUARE_SINGULAR_TOL * svd.max_singular()) {
        return Err(Error::Singular { min_singular: lo });
    }
    let mut sigma = svd.solve(&b, 0.0);
    for (s, n) in sigma.iter_mut().zip(&scale) {
        if *n > 0.0 {
            *s /= n;
        }
    }
    Ok(BlockSolution {
        residual_norm: relative_residual(&bm.basis, &sigma, &bm.target),
        condition_number: svd.condition_number(),
        sigma,
    })
}

/// Evaluates, selects and solves one block on the given jets.
pub fn fit_block(
    index: usize,
    block: &RegressionBlock,
    jets: &[OutputJet],
    prior: &SigmaStore,
    config: &IdentifyConfig,
) -> Result<BlockReport> {
    let run = || -> Result<BlockReport> {
        let bm = timeselect::evaluate_basis(block, jets, prior)?;
        let rank = timeselect::independence_report(&bm.basis, config.rank_tol).rank;
        let selection = timeselect::select_times(&bm, block.basis_size(), config.strategy, config.rank_tol, &block.label)?;
        let sol = solve_block(&bm, &selection, config.solve_mode)?;
        Ok(BlockReport {
            index,
            label: block.label.clone(),
            sigma: sol.sigma,
            residual_norm: sol.residual_norm,
            condition_number: sol.condition_number,
            selection,
            rank,
        })
    };
    run().map_err(|e| e.in_block(&block.label))
}

/// Averages each redundant pair after checking that the two values agree
/// within `tol · max(1, |a|, |b|)`.
pub fn reconcile_sigma(sigma: &[f64], pairs: &[(usize, usize)], tol: f64) -> Result<Vec<f64>> {
    let mut out = sigma.to_vec();
    for &(i, j) in pairs {
        let (a, b) = (sigma[i], sigma[j]);
        let scale = 1.0_f64.max(a.abs()).max(b.abs());
        if !((a - b).abs() <= tol * scale) {
            return Err(Error::Inconsistent { i, j, a, b });
        }
        let mean = 0.5 * (a + b);
        out[i] = mean;
        out[j] = mean;
    }
    Ok(out)
}

/// `r(θ)` evaluated from only the entries `pmap` determines.
pub fn forward_partial(pmap: &ParameterMap, part: &[f64]) -> Vec<f64> {
    let mut theta = vec![f64::NAN; pmap.param_dim];
    for (&i, &v) in pmap.theta_indices.iter().zip(part) {
        theta[i] = v;
    }
    pmap.forward(&theta)
}

/// Maximum of `|r(θ̂)ᵢ − σᵢ| / max(1, |σᵢ|)`.
pub fn image_residual(pmap: &ParameterMap, part: &[f64], sigma: &[f64]) -> f64 {
    forward_partial(pmap, part)
        .iter()
        .zip(sigma)
        .map(|(f, s)| {
            let d = (f - s).abs() / 1.0_f64.max(s.abs());
            if d.is_nan() {
                f64::INFINITY
            } else {
                d
            }
        })
        .fold(0.0, f64::max)
}

/// Full θ from σ plus the pointwise-ratio parameters. Fails when the
/// result is outside Θ or `r(θ̂)` misses σ by more than `image_tol`.
pub fn recover_theta(model: &Model, sigma: &[f64], ratios: &[RatioEstimate], image_tol: f64) -> Result<(Vec<f64>, f64)> {
    let pmap = &model.pmap;
    let part = pmap.inverse(sigma)?;
    let mut theta = vec![f64::NAN; model.spec.param_dim];
    for (&i, &v) in pmap.theta_indices.iter().zip(&part) {
        theta[i] = v;
    }
    for r in ratios {
        theta[r.param_index] = r.value;
    }
    if let Some(i) = theta.iter().position(|v| !v.is_finite()) {
        return Err(Error::ImageViolation(alloc::format!(
            "parameter `{}` is not finite",
            model.spec.param_names.get(i).map_or("?", String::as_str)
        )));
    }
    if !model.spec.in_theta(&theta) {
        return Err(Error::ImageViolation(alloc::format!("{theta:?}")));
    }
    let res = image_residual(pmap, &part, sigma);
    if !(res <= image_tol) {
        return Err(Error::ImageViolation(alloc::format!(
            "r(theta) misses sigma by {res:e}"
        )));
    }
    Ok((theta, res))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median of `scale · num / den` over jets with `|den| > guard`.
pub fn recover_pointwise_ratios(model: &Model, jets: &[OutputJet], guard: f64) -> Result<Vec<RatioEstimate>> {
    model
        .ratios
        .iter()
        .map(|r| {
            let vals: Vec<f64> = jets
                .iter()
                .filter_map(|j| {
                    let den = (r.denominator)(j);
                    if den.abs() > guard {
                        let v = r.scale * (r.numerator)(j) / den;
                        v.is_finite().then_some(v)
                    } else {
                        None
                    }
                })
                .collect();
            if vals.is_empty() {
                return Err(Error::NoValidTime {
                    label: r.label.clone(),
                });
            }
            Ok(RatioEstimate {
                label: r.label.clone(),
                param_index: r.param_index,
                used: vals.len(),
                value: median(vals),
            })
        })
        .collect()
}

/// Initial state from the jet at `t̃ = jet.t`: invert the outputs there,
/// then integrate backward to `t = 0` unless `t̃` already is 0.
///
/// Coordinates the outputs do not determine are masked `false` and only
/// carried as placeholders; Ω is checked with the placeholders frozen.
pub fn recover_initial_state(
    spec: &SystemSpec,
    jet: &OutputJet,
    theta: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let inv = spec.inverse_output_map.as_ref().ok_or(Error::MissingInverseMap)?;
    let (state, mask) = inv(jet, theta);
    if state.len() != spec.state_dim || mask.len() != spec.state_dim {
        return Err(Error::Dimension("inverse output map returned the wrong length".into()));
    }
    if jet.t == 0.0 {
        return Ok((state, mask));
    }
    if mask.iter().all(|&m| m) {
        let x0 = ode::integrate_backward(spec, (jet.t, &state), theta, 0.0, tol)?;
        return Ok((x0, mask));
    }
    let frozen = state.clone();
    let mask_c = mask.clone();
    let omega = spec.omega_member.clone();
    let mut masked = spec.clone();
    masked.omega_member = alloc::sync::Arc::new(move |x: &[f64], th: &[f64]| {
        let probe: Vec<f64> = x
            .iter()
            .zip(&frozen)
            .zip(&mask_c)
            .map(|((&v, &p), &m)| if m { v } else { p })
            .collect();
        omega(&probe, th)
    });
    let x0 = ode::integrate_backward(&masked, (jet.t, &state), theta, 0.0, tol)?;
    Ok((x0, mask))
}

fn variance(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = v.clone().count() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let mean = v.clone().sum::<f64>() / n;
    v.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Runs the whole pipeline on jets of one output trajectory.
pub fn identify(model: &Model, jets: &[OutputJet], config: &IdentifyConfig) -> Result<IdentificationReport> {
    let spec = &model.spec;
    let in_window: Vec<OutputJet> = match config.window {
        Some((a, b)) => {
            if !(a < b) {
                return Err(Error::InvalidArgument(alloc::format!("empty window [{a}, {b})")));
            }
            jets.iter().filter(|j| j.t >= a && j.t < b).cloned().collect()
        }
        None => jets.to_vec(),
    };
    if in_window.len() < model.max_block_size().max(1) {
        return Err(Error::InvalidArgument(alloc::format!(
            "{} jets in the window, need at least {}",
            in_window.len(),
            model.max_block_size()
        )));
    }
    for w in in_window.windows(2) {
        if !(w[0].t < w[1].t) {
            return Err(Error::InvalidArgument("jet times must be strictly increasing".into()));
        }
    }
    for j in &in_window {
        j.validate(&spec.output_orders)?;
    }
    let window = config
        .window
        .unwrap_or((in_window[0].t, in_window[in_window.len() - 1].t));

    for &c in &model.nonconstant_channels {
        if variance(in_window.iter().map(|j| j.y(c))) <= 1e-12 {
            return Err(Error::ConstantObservation { channel: c });
        }
    }

    let ratios = recover_pointwise_ratios(model, &in_window, config.ratio_guard)?;

    let mut store = SigmaStore::new(model.blocks.len());
    let mut reports = Vec::with_capacity(model.blocks.len());
    for &j in &model.order {
        let block = &model.blocks[j];
        let rep = fit_block(j, block, &in_window, &store, config)?;
        store.insert(j, rep.sigma.clone());
        reports.push(rep);
    }

    let mut sigma_raw = Vec::with_capacity(model.pmap.q);
    for j in 0..model.blocks.len() {
        sigma_raw.extend_from_slice(store.block(j).expect("every block solved"));
    }
    let sigma = reconcile_sigma(&sigma_raw, &model.pmap.redundancy_pairs, config.reconcile_tol)?;
    let (theta_hat, image_res) = recover_theta(model, &sigma, &ratios, config.image_tol)?;

    let first = &in_window[0];
    let (x0_hat, recoverable) = recover_initial_state(spec, first, &theta_hat, &config.ode)?;

    let mut times: Vec<f64> = reports
        .iter()
        .flat_map(|r| r.selection.times.iter().copied())
        .collect();
    times.push(first.t);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    times.dedup();

    Ok(IdentificationReport {
        model: model.name.clone(),
        param_names: spec.param_names.clone(),
        state_names: spec.state_names.clone(),
        theta_hat,
        x0_hat,
        recoverable,
        blocks: reports,
        sigma_raw,
        sigma,
        ratios,
        image_residual: image_res,
        state_time: first.t,
        distinct_times: times.len(),
        q: model.pmap.q,
        max_block_size: model.max_block_size(),
        window,
        grid_points: in_window.len(),
        solve_mode: config.solve_mode,
        strategy: config.strategy,
        derivatives: config.derivatives,
    })
}
