mod common;

use common::*;
use lindep_core::models;
use lindep_core::recovery::forward_partial;
use lindep_core::{simulate_jets, uniform_grid, Error, Model, SigmaStore, Tolerances};
use rand::Rng;

fn blocks_sigma(m: &Model, theta: &[f64]) -> SigmaStore {
    let sigma = m.pmap.forward(theta);
    let mut store = SigmaStore::new(m.blocks.len());
    for (j, b) in m.blocks.iter().enumerate() {
        let k = m.sigma_index(j, 0);
        store.insert(j, sigma[k..k + b.basis_size()].to_vec());
    }
    store
}

fn vec_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

#[test]
fn regression_identities_hold_along_trajectories() {
    for (m, sample) in all_models() {
        let mut r = rng(21);
        for _ in 0..20 {
            let (xi, th) = sample(&mut r);
            let store = blocks_sigma(&m, &th);
            let jets = simulate_jets(&m.spec, &xi, &th, &uniform_grid(0.0, 5.0, 50), &Tolerances::default()).unwrap();
            for (j, b) in m.blocks.iter().enumerate() {
                let sigma = store.block(j).unwrap();
                for jet in &jets {
                    let res = b.identity_residual(jet, &store, sigma);
                    let scale = 1.0_f64
                        .max((b.target)(jet, &store).abs())
                        .max(b.basis.iter().zip(sigma).map(|(g, s)| (s * g(jet)).abs()).sum());
                    assert!(res.abs() <= 1e-8 * scale, "{} {} t={}: {res:e}", m.name, b.label, jet.t);
                }
            }
        }
    }
}

#[test]
fn parameter_maps_round_trip() {
    let mut models = all_models();
    let mut r = rng(8);
    for _ in 0..5 {
        let a = random_a(&mut r);
        models.push((model("linparam", models::linparam(linparam_spec(a)).unwrap()), sample_linparam_theta));
    }
    for (m, sample) in models {
        let mut r = rng(99);
        for _ in 0..100 {
            let (_, th) = sample(&mut r);
            let sigma = m.pmap.forward(&th);
            let part = m.pmap.inverse(&sigma).unwrap();
            let truth: Vec<f64> = m.pmap.theta_indices.iter().map(|&i| th[i]).collect();
            assert!(vec_rel(&part, &truth) <= 1e-12, "{}: {part:?} vs {truth:?}", m.name);
            let back = forward_partial(&m.pmap, &part);
            assert!(vec_rel(&back, &sigma) <= 1e-12, "{}: {back:?} vs {sigma:?}", m.name);
        }
    }
}

#[test]
fn inverse_output_maps_recover_observable_states() {
    for (m, sample) in all_models() {
        let mut r = rng(4);
        let inv = m.spec.inverse_output_map.as_ref().unwrap();
        for _ in 0..20 {
            let (xi, th) = sample(&mut r);
            let jet = m.spec.jet_at(0.0, &xi, &th).unwrap();
            let (x, mask) = inv(&jet, &th);
            for ((a, b), keep) in x.iter().zip(&xi).zip(&mask) {
                if *keep {
                    assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{}", m.name);
                }
            }
        }
    }
    let reactor = model("reactor", models::reactor());
    let jet = reactor.spec.jet_at(0.0, &[1.0, 0.3, 350.0], &[1.0, 2.0, 100.0]).unwrap();
    let (_, mask) = (reactor.spec.inverse_output_map.as_ref().unwrap())(&jet, &[1.0, 2.0, 100.0]);
    assert_eq!(mask, vec![true, false, true]);
}

#[test]
fn lotka_volterra_inverse_map_at_later_time() {
    let m = model("lv", models::lotka_volterra());
    let th = [2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0];
    let tol = Tolerances::default();
    let traj = lindep_core::integrate(&m.spec, &[1.0, 2.0], &th, (0.0, 3.0), &tol).unwrap();
    let x = traj.interpolate(2.5).unwrap();
    let jet = m.spec.jet_at(2.5, &x, &th).unwrap();
    let (est, _) = (m.spec.inverse_output_map.as_ref().unwrap())(&jet, &th);
    assert!(rel_err(&est, &x) <= 1e-8);
}

#[test]
fn state_and_parameter_domains() {
    let lv = models::lotka_volterra().spec;
    let th = [2.0 / 3.0, 4.0 / 3.0, 1.0, 1.0];
    let eq = models::lv_equilibrium(&th);
    assert_eq!(eq, [1.0, 0.5]);
    assert!(!lv.in_omega(&eq, &th));
    assert!(!lv.in_omega(&[0.0, 1.0], &th));
    assert!(!lv.in_omega(&[1.0, -1.0], &th));
    assert!(lv.in_omega(&[1.0, 2.0], &th));
    assert!(!lv.in_theta(&[1.0, 0.0, 1.0, 1.0]));

    let reactor = models::reactor().spec;
    assert!(reactor.in_omega(&[1.0, 0.0, 350.0], &[1.0, 1.0, 1.0]));
    assert!(!reactor.in_omega(&[0.0, 0.0, 350.0], &[1.0, 1.0, 1.0]));
    assert!(!reactor.in_omega(&[1.0, 0.0, 0.0], &[1.0, 1.0, 1.0]));

    let hh = models::henon_heiles().spec;
    let a = [0.5, 0.5, 0.5, 0.5, 1.0, -1.0 / 3.0];
    let eqs = models::henon_heiles_equilibria(&a);
    assert_eq!(eqs.len(), 4);
    for e in &eqs {
        let mut dx = [0.0; 4];
        (hh.f)(e, &a, &mut dx);
        assert!(dx.iter().all(|v| v.abs() < 1e-12));
        assert!(!hh.in_omega(e, &a));
    }
    assert!(hh.in_omega(&[0.1, 0.2, 0.3, -0.1], &a));
    assert!(!hh.in_theta(&[0.5, 0.5, 0.0, 0.5, 1.0, 1.0]));

    let lp = models::linparam(linparam_spec(random_a(&mut rng(1)))).unwrap().spec;
    assert!(lp.in_omega(&[3.0, 0.0], &[0.0; 3]));
}

#[test]
fn linparam_requires_full_rank_and_enough_monomials() {
    let mut r = rng(17);
    let a = random_a(&mut r);
    let mut deficient = a.clone();
    // third column a combination of the first two
    let (c1, c2) = (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
    for i in 0..4 {
        deficient[(i, 2)] = c1 * a[(i, 0)] + c2 * a[(i, 1)];
    }
    assert!(matches!(
        models::linparam(linparam_spec(deficient)),
        Err(Error::NonIdentifiable { rank: 2, cols: 3 })
    ));
    let short = lindep_core::linalg::Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    assert!(matches!(
        models::linparam(linparam_spec(short)),
        Err(Error::AssumptionViolated { s: 1, b: 3 })
    ));
}
