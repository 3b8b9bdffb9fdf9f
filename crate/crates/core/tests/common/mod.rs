#![allow(dead_code)]

use lindep_core::linalg::Matrix;
use lindep_core::models::{self, Control, LinparamSpec};
use lindep_core::{integrate, Model, ModelBundle, SystemSpec, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn model(name: &str, bundle: ModelBundle) -> Model {
    Model::build(name, bundle).expect("valid bundle")
}

pub fn rel_err(est: &[f64], truth: &[f64]) -> f64 {
    est.iter()
        .zip(truth)
        .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// One draw of (ξ, θ) inside Ω × Θ, away from degenerate solutions.
pub type Sampler = fn(&mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>);

pub fn sample_lv(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let th: Vec<f64> = (0..4).map(|_| r.random_range(0.5..1.5)).collect();
        let xi: Vec<f64> = (0..2).map(|_| r.random_range(0.5..2.0)).collect();
        let eq = models::lv_equilibrium(&th);
        if (xi[0] - eq[0]).hypot(xi[1] - eq[1]) > 0.2 {
            return (xi, th);
        }
    }
}

pub fn sample_reactor(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let th = vec![r.random_range(0.5..2.0), r.random_range(0.5..5.0), r.random_range(50.0..200.0)];
    let xi = vec![r.random_range(0.5..2.0), r.random_range(0.0..1.0), r.random_range(300.0..400.0)];
    (xi, th)
}

/// Whether the orbit stays in a ball of radius 10 up to `BOUNDED_HORIZON`.
pub fn stays_bounded(spec: &SystemSpec, xi: &[f64], th: &[f64]) -> bool {
    integrate(spec, xi, th, (0.0, BOUNDED_HORIZON), &Tolerances::default())
        .is_ok_and(|tr| tr.states.iter().all(|x| x.iter().all(|v| v.abs() < 10.0)))
}

pub const BOUNDED_HORIZON: f64 = 10.0;

pub fn sample_hh(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let spec = models::henon_heiles().spec;
    let sign = |r: &mut ChaCha8Rng| if r.random_bool(0.5) { 1.0 } else { -1.0 };
    loop {
        let mut a: Vec<f64> = (0..4).map(|_| r.random_range(0.3..1.0)).collect();
        a.push(sign(r) * r.random_range(0.5..1.5));
        a.push(sign(r) * r.random_range(0.2..0.6));
        let xi: Vec<f64> = (0..4).map(|_| r.random_range(-0.2..0.2)).collect();
        if stays_bounded(&spec, &xi, &a) {
            return (xi, a);
        }
    }
}

pub fn sample_linparam_theta(r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let spec = linparam_fixed().spec;
    loop {
        let th: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let xi = vec![r.random_range(0.5..1.5), 0.0];
        if stays_bounded(&spec, &xi, &th) {
            return (xi, th);
        }
    }
}

/// Random 4×3 coefficient matrix with entries in [-1, 1].
pub fn random_a(r: &mut ChaCha8Rng) -> Matrix {
    let data: Vec<f64> = (0..12).map(|_| r.random_range(-1.0..1.0)).collect();
    Matrix::from_row_slice(4, 3, &data)
}

pub fn linparam_spec(a: Matrix) -> LinparamSpec {
    LinparamSpec {
        a,
        n: vec![1.0, 0.0, 1.0],
        rho: vec![vec![0.0], vec![1.0]],
        u: Control::Sinusoid {
            amplitude: 1.0,
            frequency: 2.0,
            phase: 0.0,
            offset: 0.0,
        },
    }
}

pub fn linparam_fixed() -> ModelBundle {
    let a = Matrix::from_row_slice(
        4,
        3,
        &[0.3, -0.8, 0.5, 0.9, 0.1, -0.4, -0.2, 0.6, 0.7, 0.4, -0.5, 0.2],
    );
    models::linparam(linparam_spec(a)).expect("full-rank A")
}

/// Every model with its sampler.
pub fn all_models() -> Vec<(Model, Sampler)> {
    vec![
        (model("lotka_volterra", models::lotka_volterra()), sample_lv as Sampler),
        (model("reactor", models::reactor()), sample_reactor as Sampler),
        (model("henon_heiles", models::henon_heiles()), sample_hh as Sampler),
        (model("linparam", linparam_fixed()), sample_linparam_theta as Sampler),
    ]
}
