//! The autonomous system `ẋ = f(x, θ)`, `y = h(x, θ)` and its output jets.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Right-hand side `f(x, θ)`, written into the output slice.
pub type VectorField = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
/// Output map `h(x, θ)`.
pub type OutputMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// Closed-form output derivatives: per channel `y⁽⁰⁾ … y⁽ᵈ⁾` at a state.
pub type JetMap = Arc<dyn Fn(&[f64], &[f64]) -> Vec<Vec<f64>> + Send + Sync>;
pub type StatePredicate = Arc<dyn Fn(&[f64], &[f64]) -> bool + Send + Sync>;
pub type ParamPredicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
/// Inverse output map: state at the jet's time plus a mask of the
/// coordinates that are actually determined by the outputs.
pub type InverseOutputMap =
    Arc<dyn Fn(&OutputJet, &[f64]) -> (Vec<f64>, Vec<bool>) + Send + Sync>;

/// Output values and their time derivatives at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputJet {
    pub t: f64,
    /// `values[i][k]` is the k-th derivative of output channel `i`.
    pub values: Vec<Vec<f64>>,
}

impl OutputJet {
    pub fn new(t: f64, values: Vec<Vec<f64>>) -> Self {
        Self { t, values }
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.values.len()
    }

    /// Output channel `i` (zero-based).
    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        self.values[i][0]
    }

    /// First derivative of channel `i`.
    #[inline]
    pub fn dy(&self, i: usize) -> f64 {
        self.values[i][1]
    }

    #[inline]
    pub fn derivative(&self, i: usize, k: usize) -> f64 {
        self.values[i][k]
    }

    /// Checks the channel count, per-channel orders and finiteness.
    pub fn validate(&self, orders: &[usize]) -> Result<()> {
        if self.values.len() != orders.len() {
            return Err(Error::Dimension(alloc::format!(
                "jet has {} channels, expected {}",
                self.values.len(),
                orders.len()
            )));
        }
        for (i, (ch, &d)) in self.values.iter().zip(orders).enumerate() {
            if ch.len() != d + 1 {
                return Err(Error::Dimension(alloc::format!(
                    "channel {i} carries {} entries, expected {}",
                    ch.len(),
                    d + 1
                )));
            }
        }
        if !self.t.is_finite() || self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                label: "jet".into(),
                t: self.t,
            });
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct SystemSpec {
    pub state_dim: usize,
    pub param_dim: usize,
    pub output_dim: usize,
    pub f: VectorField,
    pub h: OutputMap,
    pub output_orders: Vec<usize>,
    pub analytic_jet: Option<JetMap>,
    pub omega_member: StatePredicate,
    pub theta_member: ParamPredicate,
    pub inverse_output_map: Option<InverseOutputMap>,
    pub state_names: Vec<String>,
    pub param_names: Vec<String>,
}

impl core::fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SystemSpec")
            .field("state_dim", &self.state_dim)
            .field("param_dim", &self.param_dim)
            .field("output_dim", &self.output_dim)
            .field("output_orders", &self.output_orders)
            .field("analytic_jet", &self.analytic_jet.is_some())
            .field("inverse_output_map", &self.inverse_output_map.is_some())
            .finish()
    }
}

impl SystemSpec {
    pub fn eval_f(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        let mut dx = alloc::vec![0.0; self.state_dim];
        (self.f)(x, theta, &mut dx);
        dx
    }

    pub fn eval_h(&self, x: &[f64], theta: &[f64]) -> Vec<f64> {
        (self.h)(x, theta)
    }

    pub fn in_omega(&self, x: &[f64], theta: &[f64]) -> bool {
        x.len() == self.state_dim && x.iter().all(|v| v.is_finite()) && (self.omega_member)(x, theta)
    }

    pub fn in_theta(&self, theta: &[f64]) -> bool {
        theta.len() == self.param_dim
            && theta.iter().all(|v| v.is_finite())
            && (self.theta_member)(theta)
    }

    /// Analytic jet at a state, stamped with time `t`.
    pub fn jet_at(&self, t: f64, x: &[f64], theta: &[f64]) -> Result<OutputJet> {
        let jet = self.analytic_jet.as_ref().ok_or(Error::MissingAnalyticJet)?;
        Ok(OutputJet::new(t, jet(x, theta)))
    }

    pub(crate) fn check_dims(&self, x: &[f64], theta: &[f64]) -> Result<()> {
        if x.len() != self.state_dim {
            return Err(Error::Dimension(alloc::format!(
                "state has length {}, expected {}",
                x.len(),
                self.state_dim
            )));
        }
        if theta.len() != self.param_dim {
            return Err(Error::Dimension(alloc::format!(
                "parameter vector has length {}, expected {}",
                theta.len(),
                self.param_dim
            )));
        }
        Ok(())
    }
}
