//! Output jets along a trajectory, either from the closed-form Lie
//! derivatives of a model or from uniformly sampled output data.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ode::{self, Tolerances, Trajectory};
use crate::system::{OutputJet, SystemSpec};

/// Sampled outputs: `values[k]` holds every channel at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

/// `n` uniform points covering the semi-open window `[a, b)`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let dt = (b - a) / n as f64;
    (0..n).map(|k| a + k as f64 * dt).collect()
}

/// Analytic jets at each grid time using interpolated states.
pub fn analytic_jets(
    spec: &SystemSpec,
    traj: &Trajectory,
    theta: &[f64],
    grid: &[f64],
) -> Result<Vec<OutputJet>> {
    if spec.analytic_jet.is_none() {
        return Err(Error::MissingAnalyticJet);
    }
    grid.iter()
        .map(|&t| {
            let x = traj.interpolate(t)?;
            spec.jet_at(t, &x, theta)
        })
        .collect()
}

/// Outputs `h(x(t), θ)` at each requested time.
pub fn sample_outputs(
    spec: &SystemSpec,
    traj: &Trajectory,
    theta: &[f64],
    times: &[f64],
) -> Result<SampleTable> {
    let values = times
        .iter()
        .map(|&t| traj.interpolate(t).map(|x| spec.eval_h(&x, theta)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleTable {
        times: times.to_vec(),
        values,
    })
}

/// Integrates from `x(0) = ξ` far enough to cover every grid time, then
/// evaluates analytic jets on the grid.
pub fn simulate_jets(
    spec: &SystemSpec,
    xi: &[f64],
    theta: &[f64],
    grid: &[f64],
    tol: &Tolerances,
) -> Result<Vec<OutputJet>> {
    let t_end = grid.iter().copied().fold(0.0_f64, f64::max);
    if grid.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("grid times must be non-negative".into()));
    }
    if t_end == 0.0 {
        let x = xi.to_vec();
        return grid.iter().map(|&t| spec.jet_at(t, &x, theta)).collect();
    }
    let traj = ode::integrate(spec, xi, theta, (0.0, t_end), tol)?;
    analytic_jets(spec, &traj, theta, grid)
}

/// Finite-difference weights for the `order`-th derivative on the integer
/// offsets `offsets`, by Fornberg's recursion. Divide by `dtᵒʳᵈᵉʳ` to use.
pub fn fd_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let n = offsets.len();
    // c[j][k]: weight of node j for derivative k, evaluated at 0
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Central-difference jets at interior samples. `orders[i]` is the highest
/// derivative wanted on channel `i`; `stencil` is the odd stencil width.
pub fn numeric_jets(samples: &SampleTable, orders: &[usize], stencil: usize) -> Result<Vec<OutputJet>> {
    let max_order = orders.iter().copied().max().unwrap_or(0);
    if stencil.is_multiple_of(2) || stencil < 2 * max_order + 1 {
        return Err(Error::InvalidStencil {
            stencil,
            order: max_order,
        });
    }
    let n = samples.len();
    if n < stencil {
        return Err(Error::TooFewSamples {
            samples: n,
            stencil,
        });
    }
    if samples.channels() != orders.len() || samples.values.iter().any(|r| r.len() != orders.len()) {
        return Err(Error::Dimension(alloc::format!(
            "samples carry {} channels, orders name {}",
            samples.channels(),
            orders.len()
        )));
    }

    let t = &samples.times;
    let dt = t[1] - t[0];
    if !(dt > 0.0) {
        return Err(Error::NonUniformSpacing { index: 1 });
    }
    for k in 1..n {
        let d = t[k] - t[k - 1];
        if (d - dt).abs() > 1e-9 * dt {
            return Err(Error::NonUniformSpacing { index: k });
        }
    }
    // spacing from the full span is less sensitive to rounding in t
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;

    let half = stencil / 2;
    let offsets: Vec<f64> = (0..stencil).map(|j| j as f64 - half as f64).collect();
    let weights: Vec<Vec<f64>> = (0..=max_order)
        .map(|k| {
            let scale = libm::pow(dt, k as f64);
            fd_weights(&offsets, k).into_iter().map(|w| w / scale).collect()
        })
        .collect();

    let mut jets = Vec::with_capacity(n - 2 * half);
    for centre in half..n - half {
        let values = orders
            .iter()
            .enumerate()
            .map(|(ch, &d)| {
                let mut v = Vec::with_capacity(d + 1);
                v.push(samples.values[centre][ch]);
                for w in &weights[1..=d] {
                    let s: f64 = w
                        .iter()
                        .enumerate()
                        .map(|(j, wj)| wj * samples.values[centre + j - half][ch])
                        .sum();
                    v.push(s);
                }
                v
            })
            .collect();
        jets.push(OutputJet::new(t[centre], values));
    }
    Ok(jets)
}
