//! Compressed sparse row storage for complex matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, Complex64::new(1.0, 0.0))))
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut t: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        t.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self { nrows, ncols, indptr, indices, data };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.data.iter().all(|v| *v != Complex64::new(0.0, 0.0)) {
            return;
        }
        let mut indptr = vec![0; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                if self.data[p] != Complex64::new(0.0, 0.0) {
                    indices.push(self.indices[p]);
                    data.push(self.data[p]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        *self = Self { nrows: self.nrows, ncols: self.ncols, indptr, indices, data };
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |p| (self.indices[p], self.data[p]))
    }

    /// `y += alpha * A x`.
    pub fn mul_vec_add(&self, x: &[Complex64], alpha: Complex64, y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[p] * x[self.indices[p]];
            }
            *yr += alpha * acc;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        self.mul_vec_add(x, Complex64::new(1.0, 0.0), &mut y);
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut d = vec![Complex64::new(0.0, 0.0); self.nrows * self.ncols];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                d[r * self.ncols + c] += v;
            }
        }
        d
    }

    /// Maximum absolute row sum.
    pub fn sup_norm(&self) -> f64 {
        (0..self.nrows).map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v = v.conj());
        m
    }
}

/// Row-major dense complex matrix used for renewal and tower products.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, data: vec![Complex64::new(0.0, 0.0); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_csr(a: &CsrMatrix) -> Self {
        Self { nrows: a.nrows, ncols: a.ncols, data: a.to_dense() }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.ncols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.ncols..(r + 1) * self.ncols]
    }

    /// `self += S * D` for sparse `S` and dense `D`.
    pub fn add_sparse_dense(&mut self, s: &CsrMatrix, d: &DenseMatrix) {
        assert_eq!(s.ncols, d.nrows);
        assert_eq!((self.nrows, self.ncols), (s.nrows, d.ncols));
        let nc = self.ncols;
        for r in 0..s.nrows {
            let out = &mut self.data[r * nc..(r + 1) * nc];
            for (c, v) in s.row(r) {
                for (o, x) in out.iter_mut().zip(d.row(c)) {
                    *o += v * x;
                }
            }
        }
    }

    /// `self += D * S` for dense `D` and sparse `S`.
    pub fn add_dense_sparse(&mut self, d: &DenseMatrix, s: &CsrMatrix) {
        assert_eq!(d.ncols, s.nrows);
        assert_eq!((self.nrows, self.ncols), (d.nrows, s.ncols));
        let nc = self.ncols;
        for r in 0..d.nrows {
            let out = &mut self.data[r * nc..(r + 1) * nc];
            for (k, &dv) in d.row(r).iter().enumerate() {
                if dv == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (c, sv) in s.row(k) {
                    out[c] += dv * sv;
                }
            }
        }
    }

    /// `self += A * B` for dense operands.
    pub fn add_dense_dense(&mut self, a: &DenseMatrix, b: &DenseMatrix) {
        assert_eq!(a.ncols, b.nrows);
        let nc = self.ncols;
        for r in 0..a.nrows {
            let out = &mut self.data[r * nc..(r + 1) * nc];
            for (k, &av) in a.row(r).iter().enumerate() {
                if av == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, x) in out.iter_mut().zip(b.row(k)) {
                    *o += av * x;
                }
            }
        }
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.nrows).map(|r| self.row(r).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_row_slice(self.nrows, self.ncols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<Complex64>) -> Self {
        let mut d = Self::zeros(m.nrows(), m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                d.data[r * m.ncols() + c] = m[(r, c)];
            }
        }
        d
    }
}
