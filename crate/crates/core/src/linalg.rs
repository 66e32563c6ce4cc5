//! Sparse complex matrices and the spectral norm.
//!
//! Walk operators have at most `2 * 2d` nonzeros per row, and every
//! commutator with a diagonal weight inherits that pattern, so the
//! operators are kept in CSR form. Dense copies are made only for the
//! eigensolver and the dense singular-value route.

use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const ZERO: c64 = c64 { re: 0.0, im: 0.0 };

/// Compressed sparse row matrix over `c64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<c64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, c64)>) -> Self {
        let mut rows: Vec<Vec<(usize, c64)>> = vec![Vec::new(); nrows];
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut acc = ZERO;
                while k < row.len() && row[k].0 == j {
                    acc += row[k].1;
                    k += 1;
                }
                if acc != ZERO {
                    col_idx.push(j);
                    values.push(acc);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, c64::new(1.0, 0.0))))
    }

    pub fn from_dense(m: &Mat<c64>) -> Self {
        let mut triplets = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), triplets)
    }

    pub fn to_dense(&self) -> Mat<c64> {
        let mut m = Mat::<c64>::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, c64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, c64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => ZERO,
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[c64], y: &mut [c64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `y = A^* x`.
    pub fn matvec_adjoint(&self, x: &[c64], y: &mut [c64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        y.fill(ZERO);
        for (i, xi) in x.iter().enumerate() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k].conj() * xi;
            }
        }
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        let mut y = vec![ZERO; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.ncols, self.nrows, self.iter().map(|(i, j, v)| (j, i, v.conj())))
    }

    /// Sparse product `self * rhs`.
    pub fn mul(&self, rhs: &SparseMatrix) -> Self {
        assert_eq!(self.ncols, rhs.nrows);
        let mut triplets = Vec::new();
        let mut acc = vec![ZERO; rhs.ncols];
        let mut touched = vec![false; rhs.ncols];
        let mut cols = Vec::new();
        for i in 0..self.nrows {
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            for &j in &cols {
                triplets.push((i, j, acc[j]));
                acc[j] = ZERO;
                touched[j] = false;
            }
            cols.clear();
        }
        Self::from_triplets(self.nrows, rhs.ncols, triplets)
    }

    /// Entrywise `f(i, j, a_ij)` over the stored pattern.
    pub fn map_entries(&self, f: impl Fn(usize, usize, c64) -> c64) -> Self {
        Self::from_triplets(self.nrows, self.ncols, self.iter().map(|(i, j, v)| (i, j, f(i, j, v))))
    }

    pub fn scale(&self, factor: c64) -> Self {
        self.map_entries(|_, _, v| v * factor)
    }

    /// `self - rhs`.
    pub fn sub(&self, rhs: &SparseMatrix) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.iter().chain(rhs.iter().map(|(i, j, v)| (i, j, -v))))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max |(A^* A - I)_{ij}|`.
    pub fn unitarity_deviation(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.adjoint().mul(self).sub(&SparseMatrix::identity(self.nrows)).max_abs()
    }
}

/// How [`operator_norm`] evaluates the largest singular value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    /// Dense SVD up to [`NormOptions::dense_limit`], power iteration above.
    Auto,
    Dense,
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    pub method: NormMethod,
    pub dense_limit: usize,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { method: NormMethod::Auto, dense_limit: 256, rel_tol: 1e-10, max_iter: 200_000, seed: 0x5eed }
    }
}

/// Largest singular value of `m`.
pub fn operator_norm(m: &SparseMatrix, opts: &NormOptions) -> Result<f64> {
    if m.nnz() == 0 {
        return Ok(0.0);
    }
    let dense = match opts.method {
        NormMethod::Dense => true,
        NormMethod::PowerIteration => false,
        NormMethod::Auto => m.nrows().max(m.ncols()) <= opts.dense_limit,
    };
    if dense {
        dense_operator_norm(&m.to_dense())
    } else {
        power_iteration_norm(m, opts)
    }
}

/// Largest singular value from a full SVD.
pub fn dense_operator_norm(m: &Mat<c64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    let s = m.singular_values().map_err(|e| Error::Eigensolver(format!("singular values: {e:?}")))?;
    Ok(s.first().copied().unwrap_or(0.0))
}

/// Power iteration on `A^* A`, stopping when the estimate of `|A|` changes
/// by less than `rel_tol` relative.
pub fn power_iteration_norm(m: &SparseMatrix, opts: &NormOptions) -> Result<f64> {
    let n = m.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v: Vec<c64> = (0..n).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    normalize(&mut v);
    let mut av = vec![ZERO; m.nrows()];
    let mut w = vec![ZERO; n];
    let mut estimate = 0.0;
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_iter {
        m.matvec(&v, &mut av);
        let sigma = norm(&av);
        if sigma == 0.0 {
            return Ok(0.0);
        }
        change = (sigma - estimate).abs() / sigma;
        estimate = sigma;
        if change <= opts.rel_tol {
            return Ok(estimate);
        }
        m.matvec_adjoint(&av, &mut w);
        std::mem::swap(&mut v, &mut w);
        normalize(&mut v);
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, change })
}

pub fn norm(x: &[c64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(x: &mut [c64]) {
    let n = norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|a| *a /= n);
    }
}

pub fn inner(x: &[c64], y: &[c64]) -> c64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
