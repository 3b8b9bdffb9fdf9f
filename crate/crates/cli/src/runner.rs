use std::path::{Path, PathBuf};

use lindep_core::jets::sample_outputs;
use lindep_core::linalg::Matrix;
use lindep_core::models::{self, LinparamSpec};
use lindep_core::recovery::DerivativeSource;
use lindep_core::{
    identify, integrate, numeric_jets, simulate_jets, uniform_grid, IdentificationReport, IdentifyConfig, ModelHandle,
    OutputJet, Registry, SampleTable, Tolerances,
};

use crate::config::{Config, DerivativeMode, NoiseSection};
use crate::ingest::ingest_csv;
use crate::noise::add_gaussian_noise;
use crate::report::Report;
use crate::CliError;

/// Where the output data comes from.
#[derive(Debug, Clone)]
pub enum Source {
    Simulated { theta: Vec<f64>, x0: Vec<f64>, t_end: f64, tol: Tolerances, dt: f64 },
    Csv(PathBuf),
}

/// A configuration checked against the model it names.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: ModelHandle,
    pub source: Source,
    pub identify: IdentifyConfig,
    pub grid_n: usize,
    pub stencil: usize,
    pub noise: Option<(Vec<f64>, u64)>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn finite_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(schema(format!("{name} must be a positive number, got {v}")))
    }
}

/// Registry with the built-in models plus the configured linparam
/// instance, if any.
pub fn registry_for(cfg: &Config) -> Result<Registry, CliError> {
    let mut reg = Registry::with_builtin();
    let m = &cfg.model;
    let linparam_keys = m.a.is_some() || m.n.is_some() || m.rho.is_some() || m.u.is_some();
    if m.name == "linparam" {
        let (Some(a), Some(n), Some(rho), Some(u)) = (&m.a, &m.n, &m.rho, &m.u) else {
            return Err(schema("model `linparam` needs a, n, rho and u"));
        };
        let cols = a.first().map_or(0, Vec::len);
        if a.is_empty() || cols == 0 || a.iter().any(|r| r.len() != cols) {
            return Err(schema("model.a must be a non-empty rectangular matrix"));
        }
        let flat: Vec<f64> = a.iter().flatten().copied().collect();
        let spec = LinparamSpec {
            a: Matrix::from_row_slice(a.len(), cols, &flat),
            n: n.clone(),
            rho: rho.clone(),
            u: u.into(),
        };
        reg.register("linparam", models::linparam(spec)?)?;
    } else if linparam_keys {
        return Err(schema("model keys a, n, rho and u apply to `linparam` only"));
    }
    Ok(reg)
}

fn check_len(name: &str, v: &[f64], n: usize) -> Result<(), CliError> {
    if v.len() != n {
        return Err(schema(format!("{name} has {} entries, the model needs {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(schema(format!("{name} has non-finite entries")));
    }
    Ok(())
}

/// Checks the configuration and resolves the model. `base` is the
/// directory relative paths are resolved against.
pub fn prepare(cfg: &Config, base: &Path) -> Result<Prepared, CliError> {
    let model = registry_for(cfg)?.get(&cfg.model.name)?;
    let spec = &model.spec;

    if let Some(th) = &cfg.theta {
        check_len("theta", th, spec.param_dim)?;
    }
    if let Some(x0) = &cfg.x0 {
        check_len("x0", x0, spec.state_dim)?;
    }

    let numeric = cfg.derivatives.mode == DerivativeMode::Numeric;
    let stencil = cfg.derivatives.stencil;
    if numeric && (stencil < 3 || stencil.is_multiple_of(2)) {
        return Err(schema(format!("derivatives.stencil must be odd and at least 3, got {stencil}")));
    }

    let source = match (&cfg.sim, &cfg.data) {
        (Some(_), Some(_)) => return Err(schema("sections [sim] and [data] are mutually exclusive")),
        (None, None) => return Err(schema("one of [sim] or [data] is required")),
        (Some(sim), None) => {
            let (Some(theta), Some(x0)) = (&cfg.theta, &cfg.x0) else {
                return Err(schema("[sim] needs top-level theta and x0"));
            };
            finite_positive("sim.t_end", sim.t_end)?;
            finite_positive("sim.rtol", sim.rtol)?;
            finite_positive("sim.atol", sim.atol)?;
            finite_positive("sim.dt", sim.dt)?;
            if !spec.in_theta(theta) {
                return Err(schema("theta lies outside the model's parameter set"));
            }
            if !spec.in_omega(x0, theta) {
                return Err(schema("x0 lies outside the model's admissible state set"));
            }
            Source::Simulated {
                theta: theta.clone(),
                x0: x0.clone(),
                t_end: sim.t_end,
                tol: Tolerances::new(sim.rtol, sim.atol),
                dt: sim.dt,
            }
        }
        (None, Some(data)) => {
            if !numeric {
                return Err(schema("[data] requires derivatives.mode = \"numeric\""));
            }
            Source::Csv(resolve(base, &data.csv))
        }
    };

    let noise = match &cfg.noise {
        None => None,
        Some(NoiseSection { sigma, seed }) => {
            if !matches!(source, Source::Simulated { .. }) || !numeric {
                return Err(schema("[noise] applies to simulated data with numeric derivatives only"));
            }
            let s = sigma.per_channel(spec.output_dim);
            if s.len() != spec.output_dim || s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(schema(format!(
                    "noise.sigma needs one non-negative value or {} of them",
                    spec.output_dim
                )));
            }
            Some((s, *seed))
        }
    };

    let w = &cfg.window;
    let (a, b) = match &source {
        Source::Simulated { t_end, .. } => (w.a.unwrap_or(0.0), w.b.unwrap_or(*t_end)),
        Source::Csv(_) => (w.a.unwrap_or(f64::NEG_INFINITY), w.b.unwrap_or(f64::INFINITY)),
    };
    if a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
        return Err(schema(format!("window [{a}, {b}) is empty")));
    }
    if let Source::Simulated { t_end, .. } = source {
        if a < 0.0 || b > t_end {
            return Err(schema(format!("window [{a}, {b}) must lie inside [0, {t_end}]")));
        }
    }
    if w.grid_n == 0 {
        return Err(schema("window.grid_n must be positive"));
    }
    let sel = &cfg.selection;
    finite_positive("selection.tol", sel.tol)?;

    let ode = match &source {
        Source::Simulated { tol, .. } => *tol,
        Source::Csv(_) => Tolerances::default(),
    };
    let identify = IdentifyConfig {
        window: (a.is_finite() || b.is_finite()).then_some((a, b)),
        strategy: sel.strategy.into(),
        rank_tol: sel.tol,
        solve_mode: sel.mode.into(),
        ode,
        derivatives: cfg.derivatives.mode.into(),
        ..IdentifyConfig::default()
    };

    Ok(Prepared { model, source, identify, grid_n: w.grid_n, stencil, noise })
}

fn samples_on(model: &ModelHandle, theta: &[f64], x0: &[f64], t_end: f64, tol: &Tolerances, dt: f64) -> Result<SampleTable, CliError> {
    let n = (t_end / dt + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let span = times[n - 1].max(dt);
    let traj = integrate(&model.spec, x0, theta, (0.0, span), tol)?;
    Ok(sample_outputs(&model.spec, &traj, theta, &times)?)
}

/// Produces the jets the identification runs on.
pub fn build_jets(p: &Prepared) -> Result<Vec<OutputJet>, CliError> {
    let spec = &p.model.spec;
    match (&p.source, p.identify.derivatives) {
        (Source::Simulated { theta, x0, tol, .. }, DerivativeSource::Analytic) => {
            let (a, b) = p.identify.window.expect("simulated runs have a window");
            Ok(simulate_jets(spec, x0, theta, &uniform_grid(a, b, p.grid_n), tol)?)
        }
        (Source::Simulated { theta, x0, t_end, tol, dt }, DerivativeSource::Numeric) => {
            let mut table = samples_on(&p.model, theta, x0, *t_end, tol, *dt)?;
            if let Some((sigma, seed)) = &p.noise {
                add_gaussian_noise(&mut table, sigma, *seed);
            }
            Ok(numeric_jets(&table, &spec.output_orders, p.stencil)?)
        }
        (Source::Csv(path), _) => {
            let table = ingest_csv(path)?;
            if table.channels() != spec.output_dim {
                return Err(schema(format!(
                    "{} has {} output channels, model `{}` has {}",
                    path.display(),
                    table.channels(),
                    p.model.name,
                    spec.output_dim
                )));
            }
            Ok(numeric_jets(&table, &spec.output_orders, p.stencil)?)
        }
    }
}

/// Runs one configured identification.
pub fn run_identification(p: &Prepared) -> Result<IdentificationReport, CliError> {
    let jets = build_jets(p)?;
    Ok(identify(&p.model, &jets, &p.identify)?)
}

/// Validates, runs and assembles the report.
pub fn execute(cfg: &Config, base: &Path) -> Result<Report, CliError> {
    let p = prepare(cfg, base)?;
    let rep = run_identification(&p)?;
    Ok(Report::new(cfg, &p.model, &rep))
}
