//! Ready-made bundles: Lotka–Volterra with predation/death outputs, the
//! non-isothermal reactor, Hénon–Heiles with staged blocks, and the
//! linearly parameterized rational family.
//!
//! Every bundle derives its jets from the dynamics (`ẏ = ∂h/∂x · f`), never
//! from the regression relations, so the relations can be checked against
//! the jets.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::block::{ParameterMap, PointwiseRatio, RegressionBlock, SigmaStore};
use crate::error::{Error, Result};
use crate::linalg::{pivoted_qr_columns, Matrix, Svd};
use crate::registry::ModelBundle;
use crate::system::{OutputJet, SystemSpec};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| String::from(*s)).collect()
}

fn near(x: &[f64], p: &[f64]) -> bool {
    let d: f64 = x.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
    let scale = 1.0 + p.iter().map(|v| v * v).sum::<f64>();
    d <= 1e-18 * scale
}

// ---------------------------------------------------------------------------
// Lotka–Volterra

fn lv_field(x: &[f64], th: &[f64], dx: &mut [f64]) {
    let (al, be, ga, de) = (th[0], th[1], th[2], th[3]);
    dx[0] = al * x[0] - be * x[0] * x[1];
    dx[1] = ga * x[0] * x[1] - de * x[1];
}

/// Positive equilibrium `(δ/γ, α/β)`.
pub fn lv_equilibrium(theta: &[f64]) -> [f64; 2] {
    [theta[3] / theta[2], theta[0] / theta[1]]
}

/// Prey/predator system observed through predation `βx₁x₂` and predator
/// death `δx₂`; θ = (α, β, γ, δ).
pub fn lotka_volterra() -> ModelBundle {
    let spec = SystemSpec {
        state_dim: 2,
        param_dim: 4,
        output_dim: 2,
        f: Arc::new(lv_field),
        h: Arc::new(|x, th| vec![th[1] * x[0] * x[1], th[3] * x[1]]),
        output_orders: vec![1, 1],
        analytic_jet: Some(Arc::new(|x, th| {
            let mut dx = [0.0; 2];
            lv_field(x, th, &mut dx);
            let (be, de) = (th[1], th[3]);
            vec![
                vec![be * x[0] * x[1], be * (dx[0] * x[1] + x[0] * dx[1])],
                vec![de * x[1], de * dx[1]],
            ]
        })),
        omega_member: Arc::new(|x, th| {
            x[0] > 0.0 && x[1] > 0.0 && !near(x, &lv_equilibrium(th))
        }),
        theta_member: Arc::new(|th| th.iter().all(|&v| v > 0.0)),
        inverse_output_map: Some(Arc::new(|jet: &OutputJet, th: &[f64]| {
            let (be, de) = (th[1], th[3]);
            let x2 = jet.y(1) / de;
            let x1 = de * jet.y(0) / (be * jet.y(1));
            (vec![x1, x2], vec![true, true])
        })),
        state_names: names(&["x1", "x2"]),
        param_names: names(&["alpha", "beta", "gamma", "delta"]),
    };

    let prey = RegressionBlock::new("ydot1", Arc::new(|j: &OutputJet, _: &SigmaStore| j.dy(0)))
        .with_basis("y1", Arc::new(|j: &OutputJet| j.y(0)))
        .with_basis("y1*y2", Arc::new(|j: &OutputJet| j.y(0) * j.y(1)))
        .with_basis("y1^2/y2", Arc::new(|j: &OutputJet| j.y(0) * j.y(0) / j.y(1)));
    let predator = RegressionBlock::new("ydot2", Arc::new(|j: &OutputJet, _: &SigmaStore| j.dy(1)))
        .with_basis("y1", Arc::new(|j: &OutputJet| j.y(0)))
        .with_basis("y2", Arc::new(|j: &OutputJet| j.y(1)));

    let pmap = ParameterMap {
        q: 5,
        param_dim: 4,
        theta_indices: vec![0, 1, 2, 3],
        forward: Arc::new(|th| {
            let (al, be, ga, de) = (th[0], th[1], th[2], th[3]);
            vec![al - de, -be / de, ga * de / be, ga * de / be, -de]
        }),
        inverse: Arc::new(|s| {
            let de = -s[4];
            let al = s[0] + de;
            let be = -de * s[1];
            let ga = be * s[2] / de;
            vec![al, be, ga, de]
        }),
        redundancy_pairs: vec![(2, 3)],
    };

    ModelBundle::new(spec, vec![prey, predator], pmap)
}

// ---------------------------------------------------------------------------
// Non-isothermal reactor

fn reaction_rate(x: &[f64], th: &[f64]) -> f64 {
    th[0] * libm::exp(-th[2] / x[2]) * x[0]
}

/// `A → B` with Arrhenius kinetics; state (c_A, c_B, T), outputs (c_A, T),
/// θ = (k₁₀, h₁, E). `c_B` never reaches the outputs.
///
/// The dynamics give `ẏ₂ = h₁ ẏ₁`, so `h₁` is read as `ẏ₂ / ẏ₁`.
pub fn reactor() -> ModelBundle {
    let spec = SystemSpec {
        state_dim: 3,
        param_dim: 3,
        output_dim: 2,
        f: Arc::new(|x, th, dx| {
            let r = reaction_rate(x, th);
            dx[0] = -r;
            dx[1] = r;
            dx[2] = -th[1] * r;
        }),
        h: Arc::new(|x, _| vec![x[0], x[2]]),
        output_orders: vec![1, 1],
        analytic_jet: Some(Arc::new(|x, th| {
            let r = reaction_rate(x, th);
            vec![vec![x[0], -r], vec![x[2], -th[1] * r]]
        })),
        omega_member: Arc::new(|x, _| x[0] > 0.0 && x[1] >= 0.0 && x[2] > 0.0),
        theta_member: Arc::new(|th| th.iter().all(|&v| v > 0.0)),
        inverse_output_map: Some(Arc::new(|jet: &OutputJet, _th: &[f64]| {
            (vec![jet.y(0), 0.0, jet.y(1)], vec![true, false, true])
        })),
        state_names: names(&["c_A", "c_B", "T"]),
        param_names: names(&["k10", "h1", "E"]),
    };

    let arrhenius = RegressionBlock::new(
        "log_rate",
        Arc::new(|j: &OutputJet, _: &SigmaStore| libm::log(-j.dy(0)) - libm::log(j.y(0))),
    )
    .with_basis("1", Arc::new(|_: &OutputJet| 1.0))
    .with_basis("1/y2", Arc::new(|j: &OutputJet| 1.0 / j.y(1)));

    let pmap = ParameterMap {
        q: 2,
        param_dim: 3,
        theta_indices: vec![0, 2],
        forward: Arc::new(|th| vec![libm::log(th[0]), -th[2]]),
        inverse: Arc::new(|s| vec![libm::exp(s[0]), -s[1]]),
        redundancy_pairs: Vec::new(),
    };

    let mut bundle = ModelBundle::new(spec, vec![arrhenius], pmap);
    bundle.ratios.push(PointwiseRatio {
        label: "h1 = ydot2/ydot1".into(),
        param_index: 1,
        numerator: Arc::new(|j: &OutputJet| j.dy(1)),
        denominator: Arc::new(|j: &OutputJet| j.dy(0)),
        scale: 1.0,
    });
    bundle
}

// ---------------------------------------------------------------------------
// Hénon–Heiles

fn hh_field(x: &[f64], a: &[f64], dx: &mut [f64]) {
    let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
    dx[0] = -2.0 * a[2] * p1;
    dx[1] = -2.0 * a[3] * p2;
    dx[2] = 2.0 * a[0] * q1 + 2.0 * a[4] * q1 * q2;
    dx[3] = 2.0 * a[1] * q2 + a[4] * q1 * q1 + 3.0 * a[5] * q2 * q2;
}

/// `H(q, p) = a₁q₁² + a₂q₂² + a₃p₁² + a₄p₂² + a₅q₁²q₂ + a₆q₂³`, conserved by
/// the flow with `ṗ = ∂H/∂q`, `q̇ = −∂H/∂p`.
pub fn henon_heiles_energy(x: &[f64], a: &[f64]) -> f64 {
    let (q1, q2, p1, p2) = (x[0], x[1], x[2], x[3]);
    a[0] * q1 * q1
        + a[1] * q2 * q2
        + a[2] * p1 * p1
        + a[3] * p2 * p2
        + a[4] * q1 * q1 * q2
        + a[5] * q2 * q2 * q2
}

/// Equilibria `(q₁, q₂, 0, 0)` of the Hénon–Heiles flow.
pub fn henon_heiles_equilibria(a: &[f64]) -> Vec<[f64; 4]> {
    let mut eq = vec![[0.0; 4], [0.0, -2.0 * a[1] / (3.0 * a[5]), 0.0, 0.0]];
    let q2 = -a[0] / a[4];
    let q1_sq = -(2.0 * a[1] * q2 + 3.0 * a[5] * q2 * q2) / a[4];
    if q1_sq > 0.0 {
        let q1 = libm::sqrt(q1_sq);
        eq.push([q1, q2, 0.0, 0.0]);
        eq.push([-q1, q2, 0.0, 0.0]);
    }
    eq
}

/// State (q₁, q₂, p₁, p₂) observed in full; θ = (a₁, …, a₆).
///
/// a₃ and a₄ come from pointwise ratios. The ṗ₂ block subtracts the
/// already recovered `σ = 2a₅` times `y₁²/2`, leaving the basis {y₂, y₂²}.
pub fn henon_heiles() -> ModelBundle {
    let spec = SystemSpec {
        state_dim: 4,
        param_dim: 6,
        output_dim: 4,
        f: Arc::new(hh_field),
        h: Arc::new(|x, _| x.to_vec()),
        output_orders: vec![1, 1, 1, 1],
        analytic_jet: Some(Arc::new(|x, a| {
            let mut dx = [0.0; 4];
            hh_field(x, a, &mut dx);
            (0..4).map(|i| vec![x[i], dx[i]]).collect()
        })),
        omega_member: Arc::new(|x, a| henon_heiles_equilibria(a).iter().all(|e| {
            let d: f64 = x.iter().zip(e).map(|(u, v)| (u - v) * (u - v)).sum();
            libm::sqrt(d) > 1e-9
        })),
        theta_member: Arc::new(|a| a.iter().all(|&v| v != 0.0)),
        inverse_output_map: Some(Arc::new(|jet: &OutputJet, _a: &[f64]| {
            ((0..4).map(|i| jet.y(i)).collect(), vec![true; 4])
        })),
        state_names: names(&["q1", "q2", "p1", "p2"]),
        param_names: names(&["a1", "a2", "a3", "a4", "a5", "a6"]),
    };

    let block_p1 = RegressionBlock::new("ydot3", Arc::new(|j: &OutputJet, _: &SigmaStore| j.dy(2)))
        .with_basis("y1", Arc::new(|j: &OutputJet| j.y(0)))
        .with_basis("y1*y2", Arc::new(|j: &OutputJet| j.y(0) * j.y(1)));
    let block_p2 = RegressionBlock::new(
        "ydot4 - sigma_a5/2*y1^2",
        Arc::new(|j: &OutputJet, s: &SigmaStore| j.dy(3) - 0.5 * s.get(0, 1) * j.y(0) * j.y(0)),
    )
    .with_basis("y2", Arc::new(|j: &OutputJet| j.y(1)))
    .with_basis("y2^2", Arc::new(|j: &OutputJet| j.y(1) * j.y(1)))
    .depending_on(0, 1);

    let pmap = ParameterMap {
        q: 4,
        param_dim: 6,
        // a1, a5, a2, a6
        theta_indices: vec![0, 4, 1, 5],
        forward: Arc::new(|a| vec![2.0 * a[0], 2.0 * a[4], 2.0 * a[1], 3.0 * a[5]]),
        inverse: Arc::new(|s| vec![s[0] / 2.0, s[1] / 2.0, s[2] / 2.0, s[3] / 3.0]),
        redundancy_pairs: Vec::new(),
    };

    let mut bundle = ModelBundle::new(spec, vec![block_p1, block_p2], pmap);
    bundle.ratios = vec![
        PointwiseRatio {
            label: "a3 = -ydot1/(2 y3)".into(),
            param_index: 2,
            numerator: Arc::new(|j: &OutputJet| j.dy(0)),
            denominator: Arc::new(|j: &OutputJet| j.y(2)),
            scale: -0.5,
        },
        PointwiseRatio {
            label: "a4 = -ydot2/(2 y4)".into(),
            param_index: 3,
            numerator: Arc::new(|j: &OutputJet| j.dy(1)),
            denominator: Arc::new(|j: &OutputJet| j.y(3)),
            scale: -0.5,
        },
    ];
    bundle.nonconstant_channels = vec![1];
    bundle
}

// ---------------------------------------------------------------------------
// Linearly parameterized rational systems

/// Closed-form control signal `u(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    /// `Σ cₖ tᵏ`, ascending coefficients.
    Polynomial(Vec<f64>),
    /// `offset + amplitude · sin(frequency · t + phase)`.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        phase: f64,
        offset: f64,
    },
    /// `offset + amplitude · exp(rate · t)`.
    Exponential { amplitude: f64, rate: f64, offset: f64 },
}

impl Control {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Control::Polynomial(c) => poly(c, t),
            Control::Sinusoid {
                amplitude,
                frequency,
                phase,
                offset,
            } => offset + amplitude * libm::sin(frequency * t + phase),
            Control::Exponential {
                amplitude,
                rate,
                offset,
            } => offset + amplitude * libm::exp(rate * t),
        }
    }
}

/// Horner evaluation, ascending coefficients.
pub fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// `n(x) ẋ = (1, x, …, xˢ) A θ + Σᵢ ρᵢ(x) u(t)ⁱ`, observed as `y = x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinparamSpec {
    /// `(s+1) × b` monomial coefficients of φ.
    pub a: Matrix,
    /// Ascending coefficients of `n`.
    pub n: Vec<f64>,
    /// `ρ₀, …, ρₘ`, each with ascending coefficients.
    pub rho: Vec<Vec<f64>>,
    pub u: Control,
}

/// Relative singular-value cutoff for the rank test on `A`.
pub const LINPARAM_RANK_TOL: f64 = 1e-10;

impl LinparamSpec {
    fn forcing(&self, x: f64, t: f64) -> f64 {
        let u = self.u.eval(t);
        let mut upow = 1.0;
        let mut acc = 0.0;
        for r in &self.rho {
            acc += poly(r, x) * upow;
            upow *= u;
        }
        acc
    }

    fn drift(&self, x: f64, theta: &[f64]) -> f64 {
        let s1 = self.a.rows();
        let mut xp = 1.0;
        let mut acc = 0.0;
        for i in 0..s1 {
            let row: f64 = self.a.row(i).iter().zip(theta).map(|(a, t)| a * t).sum();
            acc += row * xp;
            xp *= x;
        }
        acc
    }

    fn xdot(&self, x: f64, t: f64, theta: &[f64]) -> f64 {
        (self.drift(x, theta) + self.forcing(x, t)) / poly(&self.n, x)
    }
}

/// Builds the single-block bundle for a linearly parameterized system.
/// The state carries time as a second coordinate with `ṫ = 1`.
///
/// Fails with `AssumptionViolated` when `s < b − 1` and with
/// `NonIdentifiable` when `A` lacks full column rank.
pub fn linparam(cfg: LinparamSpec) -> Result<ModelBundle> {
    let s1 = cfg.a.rows();
    let b = cfg.a.cols();
    if s1 == 0 || b == 0 {
        return Err(Error::InvalidArgument("coefficient matrix is empty".into()));
    }
    if cfg.n.is_empty() {
        return Err(Error::InvalidArgument("n must have at least one coefficient".into()));
    }
    let s = s1 - 1;
    if s + 1 < b {
        return Err(Error::AssumptionViolated { s, b });
    }
    let rank = Svd::new(&cfg.a).rank(LINPARAM_RANK_TOL);
    if rank < b {
        return Err(Error::NonIdentifiable { rank, cols: b });
    }

    let rows: Vec<usize> = pivoted_qr_columns(&cfg.a.transpose())[..b].to_vec();
    let sub = cfg.a.select_rows(&rows);
    let sub_svd = Svd::new(&sub);
    // columns of Ã⁻¹
    let mut inv = Matrix::zeros(b, b);
    for c in 0..b {
        let mut e = vec![0.0; b];
        e[c] = 1.0;
        let col = sub_svd.solve(&e, 0.0);
        for r in 0..b {
            inv[(r, c)] = col[r];
        }
    }

    let cfg = Arc::new(cfg);
    let c_f = cfg.clone();
    let c_jet = cfg.clone();
    let c_omega = cfg.clone();
    let c_target = cfg.clone();
    let c_fwd = cfg.clone();

    let spec = SystemSpec {
        state_dim: 2,
        param_dim: b,
        output_dim: 1,
        f: Arc::new(move |x, th, dx| {
            dx[0] = c_f.xdot(x[0], x[1], th);
            dx[1] = 1.0;
        }),
        h: Arc::new(|x, _| vec![x[0]]),
        output_orders: vec![1],
        analytic_jet: Some(Arc::new(move |x, th| vec![vec![x[0], c_jet.xdot(x[0], x[1], th)]])),
        omega_member: Arc::new(move |x, _| poly(&c_omega.n, x[0]) > 0.0),
        theta_member: Arc::new(|_| true),
        inverse_output_map: Some(Arc::new(|jet: &OutputJet, _| (vec![jet.y(0), jet.t], vec![true, true]))),
        state_names: names(&["x", "t"]),
        param_names: (1..=b).map(|j| alloc::format!("theta{j}")).collect(),
    };

    let mut block = RegressionBlock::new(
        "n(y)ydot - sum rho_i(y)u^i",
        Arc::new(move |j: &OutputJet, _: &SigmaStore| {
            let y = j.y(0);
            poly(&c_target.n, y) * j.dy(0) - c_target.forcing(y, j.t)
        }),
    );
    for i in 0..=s {
        let label = if i == 0 { String::from("1") } else { alloc::format!("y^{i}") };
        block = block.with_basis(label, Arc::new(move |j: &OutputJet| libm::pow(j.y(0), i as f64)));
    }

    let pmap = ParameterMap {
        q: s + 1,
        param_dim: b,
        theta_indices: (0..b).collect(),
        forward: Arc::new(move |th| c_fwd.a.mul_vec(th)),
        inverse: Arc::new(move |sig| {
            let picked: Vec<f64> = rows.iter().map(|&r| sig[r]).collect();
            inv.mul_vec(&picked)
        }),
        redundancy_pairs: Vec::new(),
    };

    Ok(ModelBundle::new(spec, vec![block], pmap))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
    }

    #[test]
    fn lv_parameter_map_values() {
        let m = lotka_volterra();
        let s = m.pmap.forward(&[2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0]);
        assert!(close(&s, &[-1.0 / 3.0, -4.0 / 3.0, 0.75, 0.75, -1.0], 1e-15));
        assert_eq!(m.pmap.forward(&[1.0; 4]), vec![0.0, -1.0, 1.0, 1.0, -1.0]);
        let th = (m.pmap.inverse)(&[-1.0 / 3.0, -4.0 / 3.0, 0.75, 0.75, -1.0]);
        assert!(close(&th, &[2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0], 1e-15));
    }

    #[test]
    fn lv_omega_excludes_equilibrium_and_axes() {
        let m = lotka_volterra();
        let th = [2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0];
        let eq = lv_equilibrium(&th);
        assert_eq!(eq, [1.0, 0.5]);
        assert!(!m.spec.in_omega(&eq, &th));
        // the point written with the ratio swapped is an ordinary state
        assert!(m.spec.in_omega(&[th[3] / th[2], th[1] / th[0]], &th));
        assert!(!m.spec.in_omega(&[0.0, 1.0], &th));
        assert!(!m.spec.in_omega(&[1.0, -0.1], &th));
        assert!(m.spec.in_omega(&[1.0, 2.0], &th));
    }

    #[test]
    fn lv_jet_matches_regression_form() {
        let m = lotka_volterra();
        let (al, be, ga, de) = (0.9, 1.3, 0.7, 1.1);
        let th = [al, be, ga, de];
        let jet = m.spec.jet_at(0.0, &[1.4, 0.6], &th).unwrap();
        let (y1, y2) = (jet.y(0), jet.y(1));
        let ydot1 = (al - de) * y1 - (be / de) * y1 * y2 + (ga * de / be) * y1 * y1 / y2;
        let ydot2 = (ga * de / be) * y1 - de * y2;
        assert!((jet.dy(0) - ydot1).abs() < 1e-14);
        assert!((jet.dy(1) - ydot2).abs() < 1e-14);
    }

    #[test]
    fn reactor_parameter_map_and_basis() {
        let m = reactor();
        assert_eq!(m.pmap.forward(&[1.0, 2.0, 100.0]), vec![0.0, -100.0]);
        let jet = OutputJet::new(0.0, vec![vec![1.0, -0.5], vec![500.0, -1.0]]);
        let row: Vec<f64> = m.blocks[0].basis.iter().map(|g| g(&jet)).collect();
        assert_eq!(row, vec![1.0, 0.002]);
    }

    #[test]
    fn reactor_log_target_needs_negative_slope() {
        let m = reactor();
        let jet = OutputJet::new(0.3, vec![vec![1.0, 0.0], vec![350.0, 0.0]]);
        let err = crate::timeselect::evaluate_basis(&m.blocks[0], &[jet], &SigmaStore::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { t, .. } if t == 0.3));
    }

    #[test]
    fn reactor_outputs_obey_ratio_from_dynamics() {
        let m = reactor();
        let th = [1.0, 2.0, 100.0];
        let jet = m.spec.jet_at(0.0, &[1.0, 0.0, 350.0], &th).unwrap();
        assert!((jet.dy(1) / jet.dy(0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn henon_heiles_parameter_map() {
        let m = henon_heiles();
        let a = [0.5, 0.5, 0.5, 0.5, 1.0, -1.0 / 3.0];
        let s = m.pmap.forward(&a);
        assert!(close(&s, &[1.0, 2.0, 1.0, -1.0], 1e-15));
        assert!(close(&(m.pmap.inverse)(&s), &[0.5, 1.0, 0.5, -1.0 / 3.0], 1e-15));
    }

    #[test]
    fn henon_heiles_equilibria_are_fixed_points_outside_omega() {
        let m = henon_heiles();
        let a = [0.5, 0.5, 0.5, 0.5, 1.0, -1.0 / 3.0];
        let eqs = henon_heiles_equilibria(&a);
        assert_eq!(eqs.len(), 4);
        for e in &eqs {
            let dx = m.spec.eval_f(e, &a);
            assert!(dx.iter().all(|v| v.abs() < 1e-14), "{e:?} -> {dx:?}");
            assert!(!m.spec.in_omega(e, &a));
        }
        assert!(m.spec.in_omega(&[0.1, 0.1, 0.0, 0.0], &a));
    }

    #[test]
    fn linparam_scalar_linear() {
        let a = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let m = linparam(LinparamSpec {
            a,
            n: vec![1.0],
            rho: Vec::new(),
            u: Control::Polynomial(Vec::new()),
        })
        .unwrap();
        assert_eq!(m.pmap.forward(&[-0.7]), vec![0.0, -0.7]);
        assert_eq!((m.pmap.inverse)(&[0.0, -0.7]), vec![-0.7]);
        let dx = m.spec.eval_f(&[2.0, 0.0], &[-0.7]);
        assert!((dx[0] + 1.4).abs() < 1e-15 && dx[1] == 1.0);
    }

    #[test]
    fn linparam_identity_matrix() {
        let m = linparam(LinparamSpec {
            a: Matrix::identity(3),
            n: vec![1.0],
            rho: Vec::new(),
            u: Control::Polynomial(Vec::new()),
        })
        .unwrap();
        assert_eq!(m.pmap.forward(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        assert!(close(&(m.pmap.inverse)(&[1.0, 2.0, 3.0]), &[1.0, 2.0, 3.0], 1e-15));
    }

    #[test]
    fn linparam_rank_deficient_and_low_degree() {
        let rank1 = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 0.5, 1.0, -1.0, -2.0]);
        assert_eq!(
            linparam(LinparamSpec {
                a: rank1,
                n: vec![1.0],
                rho: Vec::new(),
                u: Control::Polynomial(Vec::new()),
            })
            .unwrap_err(),
            Error::NonIdentifiable { rank: 1, cols: 2 }
        );
        let wide = Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(
            linparam(LinparamSpec {
                a: wide,
                n: vec![1.0],
                rho: Vec::new(),
                u: Control::Polynomial(Vec::new()),
            })
            .unwrap_err(),
            Error::AssumptionViolated { s: 1, b: 3 }
        );
    }

    #[test]
    fn control_family() {
        assert_eq!(Control::Polynomial(vec![1.0, 2.0, 3.0]).eval(2.0), 17.0);
        let s = Control::Sinusoid {
            amplitude: 2.0,
            frequency: 1.0,
            phase: 0.0,
            offset: 1.0,
        };
        assert!((s.eval(core::f64::consts::FRAC_PI_2) - 3.0).abs() < 1e-15);
        let e = Control::Exponential {
            amplitude: 1.0,
            rate: 0.0,
            offset: 0.5,
        };
        assert_eq!(e.eval(3.0), 1.5);
    }
}
