//! Small dense linear algebra: row-major matrices, one-sided Jacobi SVD,
//! SVD-backed solves and column-pivoted QR pivot selection.
//!
//! Matrices in this crate are tiny (a few columns, at most a few thousand
//! rows), so everything is written for clarity and accuracy rather than
//! cache behaviour.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self {
            rows,
            cols,
            data: data.to_vec(),
        }
    }

    /// Builds a matrix from equally sized rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Submatrix made of the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Scales every column to unit Euclidean norm. Zero columns are left
    /// untouched. Returns the norms that were divided out.
    pub fn equilibrate_columns(&mut self) -> Vec<f64> {
        let norms: Vec<f64> = (0..self.cols)
            .map(|j| norm2(&self.column(j)))
            .collect();
        for i in 0..self.rows {
            for (j, &n) in norms.iter().enumerate() {
                if n > 0.0 {
                    self[(i, j)] /= n;
                }
            }
        }
        norms
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large entries
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * libm::sqrt(s)
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
///
/// `s` is sorted in decreasing order; `u` is `rows × k` and `v` is
/// `cols × k` with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn new(a: &Matrix) -> Self {
        if a.rows >= a.cols {
            jacobi_svd(a)
        } else {
            let t = jacobi_svd(&a.transpose());
            Svd {
                u: t.v,
                s: t.s,
                v: t.u,
            }
        }
    }

    pub fn max_singular(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    pub fn min_singular(&self) -> f64 {
        self.s.last().copied().unwrap_or(0.0)
    }

    /// `σ_max / σ_min`, infinite for a singular matrix.
    pub fn condition_number(&self) -> f64 {
        let lo = self.min_singular();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            self.max_singular() / lo
        }
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.max_singular();
        self.s.iter().filter(|&&s| s > cut).count()
    }

    /// Minimum-norm least-squares solution, discarding singular values at or
    /// below `rel_cut · σ_max`.
    pub fn solve(&self, b: &[f64], rel_cut: f64) -> Vec<f64> {
        assert_eq!(b.len(), self.u.rows());
        let k = self.s.len();
        let cut = rel_cut * self.max_singular();
        let mut x = vec![0.0; self.v.rows()];
        for l in 0..k {
            if self.s[l] <= cut {
                continue;
            }
            let coeff: f64 = (0..b.len()).map(|i| self.u[(i, l)] * b[i]).sum::<f64>() / self.s[l];
            for (j, xj) in x.iter_mut().enumerate() {
                *xj += coeff * self.v[(j, l)];
            }
        }
        x
    }
}

/// Singular values only, in decreasing order.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    Svd::new(a).s
}

/// One-sided Jacobi (Hestenes) SVD for `rows >= cols`.
fn jacobi_svd(a: &Matrix) -> Svd {
    let m = a.rows;
    let n = a.cols;
    let mut w = a.clone();
    let mut v = Matrix::identity(n);

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut s: Vec<f64> = (0..n).map(|j| norm2(&w.column(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).unwrap_or(core::cmp::Ordering::Equal));

    let mut u = Matrix::zeros(m, n);
    let mut vs = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let sv = s[src];
        for i in 0..m {
            u[(i, dst)] = if sv > 0.0 { w[(i, src)] / sv } else { 0.0 };
        }
        for i in 0..n {
            vs[(i, dst)] = v[(i, src)];
        }
    }
    s = order.iter().map(|&i| s[i]).collect();
    Svd { u, s, v: vs }
}

/// Determinant of a square matrix by Gaussian elimination with partial
/// pivoting.
pub fn determinant(a: &Matrix) -> f64 {
    assert_eq!(a.rows, a.cols, "determinant of a non-square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| {
                m[(i, k)]
                    .abs()
                    .partial_cmp(&m[(j, k)].abs())
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if m[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            det = -det;
        }
        det *= m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    det
}

/// Solves a square system through its SVD, refusing when the smallest
/// singular value falls below `rel_tol · σ_max`.
pub fn solve_square(a: &Matrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    if a.rows != a.cols || b.len() != a.rows {
        return Err(Error::Dimension("solve_square needs a square system".into()));
    }
    let svd = Svd::new(a);
    let lo = svd.min_singular();
    if !(lo > rel_tol * svd.max_singular()) {
        return Err(Error::Singular { min_singular: lo });
    }
    Ok(svd.solve(b, 0.0))
}

/// Columns chosen by Householder QR with column pivoting, in pivot order.
/// The first `rank` entries span the column space.
pub fn pivoted_qr_columns(a: &Matrix) -> Vec<usize> {
    let m = a.rows;
    let n = a.cols;
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    for k in 0..steps {
        // pivot: largest remaining column norm below row k
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let col: Vec<f64> = (k..m).map(|i| r[(i, j)]).collect();
            let nn = norm2(&col);
            if nn > best_norm {
                best_norm = nn;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, best)];
                r[(i, best)] = tmp;
            }
            perm.swap(k, best);
        }
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = norm2(&x);
        if alpha == 0.0 {
            continue;
        }
        let mut hv = x;
        hv[0] += libm::copysign(alpha, hv[0]);
        let hn = norm2(&hv);
        for e in hv.iter_mut() {
            *e /= hn;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| hv[i - k] * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= 2.0 * hv[i - k] * dot;
            }
        }
    }
    perm
}
