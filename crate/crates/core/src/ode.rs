//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! Backward integration runs the same stepper on the time-reversed field
//! `-f`, so there is a single code path for both directions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::system::SystemSpec;

// Node values c are not needed: the field is autonomous.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Local error tolerances for the stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

/// Accepted steps of a forward integration with a continuous extension on
/// every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub tolerances: Tolerances,
    pub rejected_steps: usize,
    /// Five coefficient vectors per step for the quartic interpolant.
    dense: Vec<[Vec<f64>; 5]>,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one point")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one point")
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    /// State at any time inside the span via the continuous extension.
    pub fn interpolate(&self, t: f64) -> Result<Vec<f64>> {
        let (t0, t1) = (self.t_start(), self.t_end());
        if !(t >= t0 && t <= t1) {
            return Err(Error::OutsideSpan { t, t0, t1 });
        }
        if self.dense.is_empty() {
            return Ok(self.states[0].clone());
        }
        // first step whose right end is >= t
        let k = self.times[1..].partition_point(|&tk| tk < t).min(self.dense.len() - 1);
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let s1 = 1.0 - s;
        let r = &self.dense[k];
        Ok((0..r[0].len())
            .map(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
            .collect())
    }
}

struct Stepper<'a> {
    field: &'a dyn Fn(&[f64], &mut [f64]),
    n: usize,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(field: &'a dyn Fn(&[f64], &mut [f64]), n: usize) -> Self {
        Self {
            field,
            n,
            k: core::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }

    fn eval(&mut self, stage: usize) {
        let (f, k, tmp) = (self.field, &mut self.k, &self.tmp);
        f(tmp, &mut k[stage]);
    }

    /// One trial step from `y` (with `k[0] = f(y)`); fills `y_new`,
    /// `k[6] = f(y_new)` and returns the scaled error norm.
    fn step(&mut self, y: &[f64], h: f64, y_new: &mut [f64], tol: &Tolerances) -> f64 {
        let n = self.n;
        for i in 0..n {
            self.tmp[i] = y[i] + h * A21 * self.k[0][i];
        }
        self.eval(1);
        for i in 0..n {
            self.tmp[i] = y[i] + h * (A31 * self.k[0][i] + A32 * self.k[1][i]);
        }
        self.eval(2);
        for i in 0..n {
            self.tmp[i] =
                y[i] + h * (A41 * self.k[0][i] + A42 * self.k[1][i] + A43 * self.k[2][i]);
        }
        self.eval(3);
        for i in 0..n {
            self.tmp[i] = y[i]
                + h * (A51 * self.k[0][i]
                    + A52 * self.k[1][i]
                    + A53 * self.k[2][i]
                    + A54 * self.k[3][i]);
        }
        self.eval(4);
        for i in 0..n {
            self.tmp[i] = y[i]
                + h * (A61 * self.k[0][i]
                    + A62 * self.k[1][i]
                    + A63 * self.k[2][i]
                    + A64 * self.k[3][i]
                    + A65 * self.k[4][i]);
        }
        self.eval(5);
        for i in 0..n {
            y_new[i] = y[i]
                + h * (A71 * self.k[0][i]
                    + A73 * self.k[2][i]
                    + A74 * self.k[3][i]
                    + A75 * self.k[4][i]
                    + A76 * self.k[5][i]);
        }
        self.tmp.copy_from_slice(y_new);
        self.eval(6);

        let mut acc = 0.0;
        for i in 0..n {
            let e = h
                * (E1 * self.k[0][i]
                    + E3 * self.k[2][i]
                    + E4 * self.k[3][i]
                    + E5 * self.k[4][i]
                    + E6 * self.k[5][i]
                    + E7 * self.k[6][i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc) * (e / sc);
        }
        let err = libm::sqrt(acc / n as f64);
        if err.is_finite() {
            err
        } else {
            f64::INFINITY
        }
    }

    fn dense(&self, y: &[f64], y_new: &[f64], h: f64) -> [Vec<f64>; 5] {
        let n = self.n;
        let mut r: [Vec<f64>; 5] = core::array::from_fn(|_| vec![0.0; n]);
        for i in 0..n {
            let ydiff = y_new[i] - y[i];
            let bspl = h * self.k[0][i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * self.k[6][i] - bspl;
            r[4][i] = h
                * (D1 * self.k[0][i]
                    + D3 * self.k[2][i]
                    + D4 * self.k[3][i]
                    + D5 * self.k[4][i]
                    + D6 * self.k[5][i]
                    + D7 * self.k[6][i]);
        }
        r
    }
}

fn rms_scaled(v: &[f64], y: &[f64], tol: &Tolerances) -> f64 {
    let s: f64 = v
        .iter()
        .zip(y)
        .map(|(vi, yi)| {
            let sc = tol.atol + tol.rtol * yi.abs();
            (vi / sc) * (vi / sc)
        })
        .sum();
    libm::sqrt(s / v.len().max(1) as f64)
}

/// Starting step size (Hairer, Nørsett & Wanner, II.4).
fn initial_step(
    field: &dyn Fn(&[f64], &mut [f64]),
    y0: &[f64],
    f0: &[f64],
    span: f64,
    tol: &Tolerances,
) -> f64 {
    let d0 = rms_scaled(y0, y0, tol);
    let d1 = rms_scaled(f0, y0, tol);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    field(&y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, y0, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / d1.max(d2), 1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `ẏ = field(y)` on `[t0, t1]`, checking `admissible` at every
/// accepted step.
fn run(
    field: &dyn Fn(&[f64], &mut [f64]),
    admissible: &dyn Fn(&[f64]) -> bool,
    y0: &[f64],
    t0: f64,
    t1: f64,
    tol: &Tolerances,
) -> Result<Trajectory> {
    let n = y0.len();
    let span = t1 - t0;
    let mut traj = Trajectory {
        times: vec![t0],
        states: vec![y0.to_vec()],
        tolerances: *tol,
        rejected_steps: 0,
        dense: Vec::new(),
    };
    if span == 0.0 {
        return Ok(traj);
    }

    let mut st = Stepper::new(field, n);
    let mut y = y0.to_vec();
    let mut y_new = vec![0.0; n];
    field(&y, &mut st.k[0]);
    let mut h = initial_step(field, &y, &st.k[0].clone(), span, tol);
    let mut t = t0;
    let mut last_rejected = false;

    for _ in 0..tol.max_steps {
        let remaining = t1 - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::StepUnderflow { t, h });
        }
        let err = st.step(&y, h, &mut y_new, tol);
        if err <= 1.0 {
            let t_new = if last { t1 } else { t + h };
            if !admissible(&y_new) || y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::OmegaExit { t: t_new });
            }
            traj.dense.push(st.dense(&y, &y_new, h));
            traj.times.push(t_new);
            traj.states.push(y_new.clone());
            core::mem::swap(&mut y, &mut y_new);
            let k6 = core::mem::take(&mut st.k[6]);
            st.k[6] = core::mem::replace(&mut st.k[0], k6);
            t = t_new;
            if last {
                return Ok(traj);
            }
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * libm::pow(err, -0.2)).clamp(FAC_MIN, FAC_MAX)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h *= fac;
        } else {
            traj.rejected_steps += 1;
            last_rejected = true;
            let fac = if err.is_finite() {
                (SAFETY * libm::pow(err, -0.2)).max(FAC_MIN)
            } else {
                0.1
            };
            h *= fac;
        }
    }
    Err(Error::StepUnderflow { t, h })
}

/// Forward integration of `ẋ = f(x, θ)` from `ξ` over `[t0, t1]`.
pub fn integrate(
    spec: &SystemSpec,
    xi: &[f64],
    theta: &[f64],
    span: (f64, f64),
    tol: &Tolerances,
) -> Result<Trajectory> {
    spec.check_dims(xi, theta)?;
    let (t0, t1) = span;
    if !(t0 < t1) {
        return Err(Error::InvalidArgument(alloc::format!(
            "integration span [{t0}, {t1}] is empty"
        )));
    }
    if !spec.in_theta(theta) {
        return Err(Error::ImageViolation("theta outside the parameter set".into()));
    }
    if !spec.in_omega(xi, theta) {
        return Err(Error::OmegaExit { t: t0 });
    }
    let field = |x: &[f64], dx: &mut [f64]| (spec.f)(x, theta, dx);
    let admissible = |x: &[f64]| spec.in_omega(x, theta);
    run(&field, &admissible, xi, t0, t1, tol)
}

/// State at `t_target <= t̃` given the state at `t̃`.
pub fn integrate_backward(
    spec: &SystemSpec,
    state_at: (f64, &[f64]),
    theta: &[f64],
    t_target: f64,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let (t_tilde, x) = state_at;
    spec.check_dims(x, theta)?;
    if t_target > t_tilde {
        return Err(Error::InvalidArgument(alloc::format!(
            "backward target {t_target} lies after {t_tilde}"
        )));
    }
    if !spec.in_omega(x, theta) {
        return Err(Error::OmegaExit { t: t_tilde });
    }
    if t_target == t_tilde {
        return Ok(x.to_vec());
    }
    let field = |x: &[f64], dx: &mut [f64]| {
        (spec.f)(x, theta, dx);
        for v in dx.iter_mut() {
            *v = -*v;
        }
    };
    let admissible = |x: &[f64]| spec.in_omega(x, theta);
    match run(&field, &admissible, x, 0.0, t_tilde - t_target, tol) {
        Ok(traj) => Ok(traj.final_state().to_vec()),
        Err(Error::OmegaExit { t }) => Err(Error::OmegaExit { t: t_tilde - t }),
        Err(Error::StepUnderflow { t, h }) => Err(Error::StepUnderflow { t: t_tilde - t, h }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;

    fn scalar_spec(rate: f64) -> SystemSpec {
        // ẋ = rate (θ unused), Ω = {x > 0}
        SystemSpec {
            state_dim: 1,
            param_dim: 1,
            output_dim: 1,
            f: Arc::new(move |_x, _th, dx| dx[0] = rate),
            h: Arc::new(|x, _| x.to_vec()),
            output_orders: vec![0],
            analytic_jet: None,
            omega_member: Arc::new(|x, _| x[0] > 0.0),
            theta_member: Arc::new(|_| true),
            inverse_output_map: None,
            state_names: vec!["x".into()],
            param_names: vec!["unused".into()],
        }
    }

    fn decay_spec() -> SystemSpec {
        SystemSpec {
            f: Arc::new(|x, th, dx| dx[0] = -th[0] * x[0]),
            ..scalar_spec(0.0)
        }
    }

    #[test]
    fn exponential_decay_accuracy() {
        let spec = decay_spec();
        let traj = integrate(&spec, &[1.0], &[1.5], (0.0, 2.0), &Tolerances::default()).unwrap();
        let exact = libm::exp(-3.0);
        assert!((traj.final_state()[0] - exact).abs() < 1e-10);
        for &t in &[0.0, 0.123, 0.77, 1.5, 2.0] {
            let x = traj.interpolate(t).unwrap()[0];
            assert!((x - libm::exp(-1.5 * t)).abs() < 1e-9, "t={t}");
        }
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn interpolation_outside_span_fails() {
        let spec = decay_spec();
        let traj = integrate(&spec, &[1.0], &[1.0], (0.0, 1.0), &Tolerances::default()).unwrap();
        assert!(matches!(traj.interpolate(1.5), Err(Error::OutsideSpan { .. })));
    }

    #[test]
    fn empty_span_rejected() {
        let spec = decay_spec();
        assert!(integrate(&spec, &[1.0], &[1.0], (1.0, 1.0), &Tolerances::default()).is_err());
    }

    #[test]
    fn forward_exit_reports_time() {
        // x(t) = 0.5 - t leaves x > 0 at t = 0.5
        let spec = scalar_spec(-1.0);
        match integrate(&spec, &[0.5], &[0.0], (0.0, 1.0), &Tolerances::default()) {
            Err(Error::OmegaExit { t }) => assert!(t > 0.5 && t <= 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backward_zero_length_is_identity() {
        let spec = decay_spec();
        let x = integrate_backward(&spec, (0.7, &[0.3]), &[2.0], 0.7, &Tolerances::default()).unwrap();
        assert_eq!(x, vec![0.3]);
    }

    #[test]
    fn backward_exit_from_omega() {
        // ẋ = 1 with x(1) = 0.5 means x(0) = -0.5, outside x > 0
        let spec = scalar_spec(1.0);
        match integrate_backward(&spec, (1.0, &[0.5]), &[0.0], 0.0, &Tolerances::default()) {
            Err(Error::OmegaExit { t }) => assert!((0.0..0.5).contains(&t)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn backward_decay_roundtrip() {
        let spec = decay_spec();
        let tol = Tolerances::default();
        let traj = integrate(&spec, &[2.0], &[0.8], (0.0, 3.0), &tol).unwrap();
        let back = integrate_backward(&spec, (3.0, traj.final_state()), &[0.8], 0.0, &tol).unwrap();
        assert!((back[0] - 2.0).abs() < 1e-9);
    }
}
