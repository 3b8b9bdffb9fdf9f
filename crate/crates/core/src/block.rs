//! Linear regression relations `g₀ = Σₗ rₗ(θ) gₗ` between jet functionals,
//! and the parameter map `r` tying their coefficients back to `θ`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::system::OutputJet;

pub type BasisFn = Arc<dyn Fn(&OutputJet) -> f64 + Send + Sync>;
pub type TargetFn = Arc<dyn Fn(&OutputJet, &SigmaStore) -> f64 + Send + Sync>;
pub type ParamFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Coefficients recovered so far, indexed by block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SigmaStore {
    blocks: Vec<Option<Vec<f64>>>,
}

impl SigmaStore {
    pub fn new(n_blocks: usize) -> Self {
        Self {
            blocks: alloc::vec![None; n_blocks],
        }
    }

    pub fn insert(&mut self, block: usize, sigma: Vec<f64>) {
        if block >= self.blocks.len() {
            self.blocks.resize(block + 1, None);
        }
        self.blocks[block] = Some(sigma);
    }

    pub fn block(&self, block: usize) -> Option<&[f64]> {
        self.blocks.get(block)?.as_deref()
    }

    /// Component `component` of block `block`; NaN when not yet known so a
    /// missing dependency surfaces as a non-finite target.
    pub fn get(&self, block: usize, component: usize) -> f64 {
        self.block(block)
            .and_then(|s| s.get(component).copied())
            .unwrap_or(f64::NAN)
    }

    pub fn covers(&self, deps: &[(usize, usize)]) -> bool {
        deps.iter()
            .all(|&(b, c)| self.block(b).is_some_and(|s| c < s.len()))
    }
}

/// One relation `target(jet) = Σₗ σₗ · basisₗ(jet)`.
#[derive(Clone)]
pub struct RegressionBlock {
    pub label: String,
    pub target: TargetFn,
    pub basis: Vec<BasisFn>,
    pub basis_labels: Vec<String>,
    /// `(block index, σ component)` pairs read by `target`.
    pub depends_on: Vec<(usize, usize)>,
}

impl core::fmt::Debug for RegressionBlock {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RegressionBlock")
            .field("label", &self.label)
            .field("basis", &self.basis_labels)
            .field("depends_on", &self.depends_on)
            .finish()
    }
}

impl RegressionBlock {
    pub fn new(label: impl Into<String>, target: TargetFn) -> Self {
        Self {
            label: label.into(),
            target,
            basis: Vec::new(),
            basis_labels: Vec::new(),
            depends_on: Vec::new(),
        }
    }

    pub fn with_basis(mut self, label: impl Into<String>, g: BasisFn) -> Self {
        self.basis.push(g);
        self.basis_labels.push(label.into());
        self
    }

    pub fn depending_on(mut self, block: usize, component: usize) -> Self {
        self.depends_on.push((block, component));
        self
    }

    #[inline]
    pub fn basis_size(&self) -> usize {
        self.basis.len()
    }

    /// `target − Σ σₗ basisₗ` at one jet.
    pub fn identity_residual(&self, jet: &OutputJet, prior: &SigmaStore, sigma: &[f64]) -> f64 {
        let fit: f64 = self.basis.iter().zip(sigma).map(|(g, s)| s * g(jet)).sum();
        (self.target)(jet, prior) - fit
    }
}

/// `r: Θ → σ` and its inverse on the parameters it determines.
#[derive(Clone)]
pub struct ParameterMap {
    pub q: usize,
    pub param_dim: usize,
    /// Positions in θ filled by `inverse`, in output order. `forward` reads
    /// only these positions.
    pub theta_indices: Vec<usize>,
    pub forward: ParamFn,
    pub inverse: ParamFn,
    /// Flat σ indices that must carry the same value.
    pub redundancy_pairs: Vec<(usize, usize)>,
}

impl core::fmt::Debug for ParameterMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ParameterMap")
            .field("q", &self.q)
            .field("param_dim", &self.param_dim)
            .field("theta_indices", &self.theta_indices)
            .field("redundancy_pairs", &self.redundancy_pairs)
            .finish()
    }
}

impl ParameterMap {
    pub fn forward(&self, theta: &[f64]) -> Vec<f64> {
        (self.forward)(theta)
    }

    pub fn inverse(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        if sigma.len() != self.q {
            return Err(Error::Dimension(alloc::format!(
                "sigma has length {}, expected {}",
                sigma.len(),
                self.q
            )));
        }
        Ok((self.inverse)(sigma))
    }

    /// Writes `inverse(σ)` into the matching slots of `theta`.
    pub fn scatter(&self, sigma: &[f64], theta: &mut [f64]) -> Result<()> {
        let part = self.inverse(sigma)?;
        for (&i, v) in self.theta_indices.iter().zip(part) {
            theta[i] = v;
        }
        Ok(())
    }
}

/// A parameter read directly as `scale · numerator / denominator` at
/// (almost) any time.
#[derive(Clone)]
pub struct PointwiseRatio {
    pub label: String,
    pub param_index: usize,
    pub numerator: BasisFn,
    pub denominator: BasisFn,
    pub scale: f64,
}

impl core::fmt::Debug for PointwiseRatio {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PointwiseRatio")
            .field("label", &self.label)
            .field("param_index", &self.param_index)
            .field("scale", &self.scale)
            .finish()
    }
}
