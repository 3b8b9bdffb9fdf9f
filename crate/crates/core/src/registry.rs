//! Named model bundles with validated block ordering.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::block::{ParameterMap, PointwiseRatio, RegressionBlock};
use crate::error::{Error, Result};
use crate::system::SystemSpec;

/// Everything needed to identify one system.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    pub spec: SystemSpec,
    pub blocks: Vec<RegressionBlock>,
    pub pmap: ParameterMap,
    pub ratios: Vec<PointwiseRatio>,
    /// Output channels that must vary over the data window.
    pub nonconstant_channels: Vec<usize>,
}

impl ModelBundle {
    pub fn new(spec: SystemSpec, blocks: Vec<RegressionBlock>, pmap: ParameterMap) -> Self {
        Self {
            spec,
            blocks,
            pmap,
            ratios: Vec::new(),
            nonconstant_channels: Vec::new(),
        }
    }
}

/// A validated, immutable model.
#[derive(Debug)]
pub struct Model {
    pub name: String,
    pub spec: SystemSpec,
    pub blocks: Vec<RegressionBlock>,
    pub pmap: ParameterMap,
    pub ratios: Vec<PointwiseRatio>,
    pub nonconstant_channels: Vec<usize>,
    /// Block indices in an order where every dependency comes first.
    pub order: Vec<usize>,
    /// Start of each block's slice in the flat σ vector.
    pub offsets: Vec<usize>,
}

pub type ModelHandle = Arc<Model>;

impl Model {
    /// Validates a bundle and computes the block execution order.
    pub fn build(name: impl Into<String>, bundle: ModelBundle) -> Result<Self> {
        let ModelBundle {
            spec,
            blocks,
            pmap,
            ratios,
            nonconstant_channels,
        } = bundle;

        let total: usize = blocks.iter().map(RegressionBlock::basis_size).sum();
        if total != pmap.q {
            return Err(Error::QMismatch {
                blocks: total,
                pmap: pmap.q,
            });
        }
        for b in &blocks {
            if b.basis.is_empty() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "block `{}` has an empty basis",
                    b.label
                )));
            }
            for &(dep, comp) in &b.depends_on {
                if dep >= blocks.len() || comp >= blocks[dep].basis_size() {
                    return Err(Error::InvalidDependency {
                        block: b.label.clone(),
                        dep_block: dep,
                        component: comp,
                    });
                }
            }
        }
        for &(i, j) in &pmap.redundancy_pairs {
            if i >= pmap.q || j >= pmap.q {
                return Err(Error::InvalidArgument(alloc::format!(
                    "redundancy pair ({i}, {j}) outside q = {}",
                    pmap.q
                )));
            }
        }
        for &c in &nonconstant_channels {
            if c >= spec.output_dim {
                return Err(Error::InvalidArgument(alloc::format!(
                    "non-constant check on missing channel {c}"
                )));
            }
        }

        let mut covered = vec![0usize; spec.param_dim];
        for &i in &pmap.theta_indices {
            if i >= spec.param_dim {
                return Err(Error::ParameterCoverage(alloc::format!("index {i} out of range")));
            }
            covered[i] += 1;
        }
        for r in &ratios {
            if r.param_index >= spec.param_dim {
                return Err(Error::ParameterCoverage(alloc::format!(
                    "ratio `{}` targets index {} out of range",
                    r.label,
                    r.param_index
                )));
            }
            covered[r.param_index] += 1;
        }
        if let Some(i) = covered.iter().position(|&c| c != 1) {
            return Err(Error::ParameterCoverage(alloc::format!(
                "parameter {i} is determined {} times",
                covered[i]
            )));
        }

        let order = topological_order(&blocks)?;
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            acc += b.basis_size();
        }

        Ok(Self {
            name: name.into(),
            spec,
            blocks,
            pmap,
            ratios,
            nonconstant_channels,
            order,
            offsets,
        })
    }

    /// Flat σ index of component `l` in block `j`.
    pub fn sigma_index(&self, block: usize, component: usize) -> usize {
        self.offsets[block] + component
    }

    /// Largest block size q̃.
    pub fn max_block_size(&self) -> usize {
        self.blocks.iter().map(RegressionBlock::basis_size).max().unwrap_or(0)
    }
}

/// Kahn's algorithm; among ready blocks the lowest index runs first.
fn topological_order(blocks: &[RegressionBlock]) -> Result<Vec<usize>> {
    let n = blocks.len();
    let mut indegree = vec![0usize; n];
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, b) in blocks.iter().enumerate() {
        let mut deps: Vec<usize> = b.depends_on.iter().map(|&(d, _)| d).collect();
        deps.sort_unstable();
        deps.dedup();
        for d in deps {
            if d == j {
                return Err(Error::CyclicDependencies);
            }
            indegree[j] += 1;
            users[d].push(j);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut done = vec![false; n];
    while order.len() < n {
        let next = (0..n).find(|&j| !done[j] && indegree[j] == 0);
        let Some(j) = next else {
            return Err(Error::CyclicDependencies);
        };
        done[j] = true;
        order.push(j);
        for &u in &users[j] {
            indegree[u] -= 1;
        }
    }
    Ok(order)
}

/// Read-mostly collection of models keyed by name.
#[derive(Debug, Default, Clone)]
pub struct Registry {
    models: BTreeMap<String, ModelHandle>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the three fixed example systems. The linearly
    /// parameterized family needs user coefficients and is registered on
    /// demand.
    pub fn with_builtin() -> Self {
        let mut r = Self::new();
        r.register("lotka_volterra", crate::models::lotka_volterra())
            .expect("builtin model");
        r.register("reactor", crate::models::reactor()).expect("builtin model");
        r.register("henon_heiles", crate::models::henon_heiles())
            .expect("builtin model");
        r
    }

    pub fn register(&mut self, name: &str, bundle: ModelBundle) -> Result<ModelHandle> {
        if self.models.contains_key(name) {
            return Err(Error::DuplicateModel(name.into()));
        }
        let model = Arc::new(Model::build(name, bundle)?);
        self.models.insert(name.into(), model.clone());
        Ok(model)
    }

    pub fn get(&self, name: &str) -> Result<ModelHandle> {
        self.models
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownModel(name.into()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }
}
