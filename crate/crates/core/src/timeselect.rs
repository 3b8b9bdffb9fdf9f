//! Linear independence of basis functions over a time grid, and selection
//! of `q` times at which the basis matrix is square and well conditioned.
//!
//! Selection works on a column-equilibrated copy of the basis matrix, so
//! rescaling a basis function changes neither the chosen rows nor the
//! pass/fail verdict.

use alloc::string::String;
use alloc::vec::Vec;

use crate::block::{RegressionBlock, SigmaStore};
use crate::error::{Error, Result};
use crate::linalg::{determinant, Matrix, Svd};
use crate::system::OutputJet;

/// Default relative rank tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Upper bound on subsets visited by exhaustive selection.
pub const MAX_EXHAUSTIVE_SUBSETS: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Greedy,
    Exhaustive,
}

/// Basis functions and target evaluated on a set of jets.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    pub times: Vec<f64>,
    pub basis: Matrix,
    pub target: Vec<f64>,
}

/// Times chosen for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedTimes {
    /// Row indices into the basis matrix, ascending.
    pub rows: Vec<usize>,
    pub times: Vec<f64>,
    /// Smallest singular value of the equilibrated square submatrix.
    pub min_singular: f64,
    /// Condition number of the equilibrated square submatrix.
    pub condition_number: f64,
    /// Determinant of the raw square submatrix.
    pub determinant: f64,
}

/// Numerical rank and singular values of a basis matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Evaluates `block` on every jet. Fails on the first non-finite entry and
/// reports its time.
pub fn evaluate_basis(block: &RegressionBlock, jets: &[OutputJet], prior: &SigmaStore) -> Result<BasisMatrix> {
    if jets.is_empty() {
        return Err(Error::InvalidArgument("no jets to evaluate".into()));
    }
    if !prior.covers(&block.depends_on) {
        return Err(Error::InvalidArgument(alloc::format!(
            "block `{}` needs sigma components that are not yet known",
            block.label
        )));
    }
    let q = block.basis_size();
    let mut basis = Matrix::zeros(jets.len(), q);
    let mut target = Vec::with_capacity(jets.len());
    for (k, jet) in jets.iter().enumerate() {
        for (l, g) in block.basis.iter().enumerate() {
            let v = g(jet);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    label: block.basis_labels.get(l).cloned().unwrap_or_else(String::new),
                    t: jet.t,
                });
            }
            basis[(k, l)] = v;
        }
        let v = (block.target)(jet, prior);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                label: alloc::format!("{} target", block.label),
                t: jet.t,
            });
        }
        target.push(v);
    }
    Ok(BasisMatrix {
        times: jets.iter().map(|j| j.t).collect(),
        basis,
        target,
    })
}

/// Rank of the basis matrix relative to its largest singular value.
pub fn independence_report(basis: &Matrix, tol: f64) -> IndependenceReport {
    let svd = Svd::new(basis);
    IndependenceReport {
        rank: svd.rank(tol),
        singular_values: svd.s,
    }
}

fn min_singular(m: &Matrix) -> f64 {
    Svd::new(m).min_singular()
}

/// Picks `q` rows of `bm.basis` making a full-rank square system.
pub fn select_times(bm: &BasisMatrix, q: usize, strategy: Strategy, tol: f64, label: &str) -> Result<SelectedTimes> {
    let n = bm.basis.rows();
    if q == 0 || bm.basis.cols() != q {
        return Err(Error::Dimension(alloc::format!(
            "basis matrix has {} columns, block size is {q}",
            bm.basis.cols()
        )));
    }
    if n < q {
        return Err(Error::LinearlyDependent { block: label.into() });
    }
    let mut eq = bm.basis.clone();
    eq.equilibrate_columns();
    let cutoff = tol * Svd::new(&eq).max_singular();

    let rows = match strategy {
        Strategy::Greedy => greedy_rows(&eq, q),
        Strategy::Exhaustive => exhaustive_rows(&eq, q, cutoff)?,
    };
    let rows = rows.ok_or_else(|| Error::LinearlyDependent { block: label.into() })?;

    let sub = eq.select_rows(&rows);
    let svd = Svd::new(&sub);
    if !(svd.min_singular() > cutoff) {
        return Err(Error::LinearlyDependent { block: label.into() });
    }
    Ok(SelectedTimes {
        times: rows.iter().map(|&r| bm.times[r]).collect(),
        min_singular: svd.min_singular(),
        condition_number: svd.condition_number(),
        determinant: determinant(&bm.basis.select_rows(&rows)),
        rows,
    })
}

/// Adds one row at a time, each time maximizing the smallest singular value
/// of the rows chosen so far. Ties go to the lowest row index.
fn greedy_rows(eq: &Matrix, q: usize) -> Option<Vec<usize>> {
    let n = eq.rows();
    let mut chosen: Vec<usize> = Vec::with_capacity(q);
    let mut used = alloc::vec![false; n];
    for _ in 0..q {
        let mut best: Option<(usize, f64)> = None;
        let mut trial = chosen.clone();
        trial.push(0);
        for i in 0..n {
            if used[i] {
                continue;
            }
            *trial.last_mut().unwrap() = i;
            let s = min_singular(&eq.select_rows(&trial));
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let (i, s) = best?;
        if !(s > 0.0) {
            return None;
        }
        used[i] = true;
        chosen.push(i);
    }
    chosen.sort_unstable();
    Some(chosen)
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k.min(n));
    let mut acc: u64 = 1;
    for i in 0..k as u64 {
        acc = acc.saturating_mul(n as u64 - i) / (i + 1);
    }
    acc
}

/// Largest-volume subset among those passing the singular-value cutoff;
/// lexicographically first on ties.
fn exhaustive_rows(eq: &Matrix, q: usize, cutoff: f64) -> Result<Option<Vec<usize>>> {
    let n = eq.rows();
    let count = binomial(n, q);
    if count > MAX_EXHAUSTIVE_SUBSETS {
        return Err(Error::InvalidArgument(alloc::format!(
            "exhaustive selection over {count} subsets; use greedy"
        )));
    }
    let mut idx: Vec<usize> = (0..q).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let sub = eq.select_rows(&idx);
        if min_singular(&sub) > cutoff {
            let vol = determinant(&sub).abs();
            if best.as_ref().is_none_or(|(_, b)| vol > *b) {
                best = Some((idx.clone(), vol));
            }
        }
        // next combination in lexicographic order
        let mut i = q;
        loop {
            if i == 0 {
                return Ok(best.map(|(r, _)| r));
            }
            i -= 1;
            if idx[i] < n - q + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..q {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
