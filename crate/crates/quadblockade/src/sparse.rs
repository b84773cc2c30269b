//! Compressed sparse row storage for complex operators.
//!
//! Operators on truncated Fock spaces are a few percent dense at most, and
//! the vectorized Liouvillian (dimension D^2) is far too large to hold
//! densely, so everything is built and combined in CSR form. Densification
//! is an explicit conversion and is logged.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Sparse complex matrix in CSR format with sorted, deduplicated columns
/// within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl ComplexOperator {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        ComplexOperator {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        ComplexOperator {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        ComplexOperator {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: diag.to_vec(),
        }
    }

    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut sorted: Vec<(usize, usize, C64)> = triplets.to_vec();
        sorted.sort_unstable_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut data: Vec<C64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                let k = data.len() - 1;
                data[k] += v;
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
        ComplexOperator { nrows, ncols, indptr, indices, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Dimension of a square operator.
    pub fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows, self.ncols);
        self.nrows
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        self.indices[lo..hi]
            .iter()
            .zip(&self.data[lo..hi])
            .map(|(&c, &v)| (c, v))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        match self.indices[lo..hi].binary_search(&c) {
            Ok(k) => self.data[lo + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut data = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            let (mut i, hi_a) = (self.indptr[r], self.indptr[r + 1]);
            let (mut j, hi_b) = (other.indptr[r], other.indptr[r + 1]);
            while i < hi_a || j < hi_b {
                let ca = if i < hi_a { self.indices[i] } else { usize::MAX };
                let cb = if j < hi_b { other.indices[j] } else { usize::MAX };
                if ca < cb {
                    indices.push(ca);
                    data.push(self.data[i]);
                    i += 1;
                } else if cb < ca {
                    indices.push(cb);
                    data.push(other.data[j]);
                    j += 1;
                } else {
                    indices.push(ca);
                    data.push(self.data[i] + other.data[j]);
                    i += 1;
                    j += 1;
                }
            }
            indptr[r + 1] = indices.len();
        }
        ComplexOperator { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }

    /// Sparse matrix product self * other.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let ncols = other.ncols;
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        // dense accumulator per row
        let mut acc = vec![C64::new(0.0, 0.0); ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            for (ka, va) in self.row(r) {
                for (kb, vb) in other.row(ka) {
                    if acc[kb] == C64::new(0.0, 0.0) && !touched.contains(&kb) {
                        touched.push(kb);
                    }
                    acc[kb] += va * vb;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                indices.push(c);
                data.push(acc[c]);
                acc[c] = C64::new(0.0, 0.0);
            }
            indptr[r + 1] = indices.len();
            touched.clear();
        }
        ComplexOperator { nrows: self.nrows, ncols, indptr, indices, data }
    }

    /// Kronecker product self (x) other, left factor on the slow index.
    pub fn kron(&self, other: &Self) -> Self {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz() * other.nnz());
        let mut data = Vec::with_capacity(self.nnz() * other.nnz());
        for r1 in 0..self.nrows {
            for r2 in 0..other.nrows {
                for (c1, v1) in self.row(r1) {
                    for (c2, v2) in other.row(r2) {
                        indices.push(c1 * other.ncols + c2);
                        data.push(v1 * v2);
                    }
                }
                indptr[r1 * other.nrows + r2 + 1] = indices.len();
            }
        }
        ComplexOperator { nrows, ncols, indptr, indices, data }
    }

    pub fn transpose(&self) -> Self {
        let mut triplets: Vec<(usize, usize, C64)> = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.iter() {
            triplets.push((c, r, v));
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets)
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = v.conj();
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        self.transpose().conj()
    }

    /// y = self * x.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
    }

    /// Copy with one row replaced by the given (column, value) entries.
    pub fn replace_row(&self, row: usize, entries: &[(usize, C64)]) -> Self {
        assert!(row < self.nrows);
        let mut sorted = entries.to_vec();
        sorted.sort_unstable_by_key(|e| e.0);
        let old_lo = self.indptr[row];
        let old_hi = self.indptr[row + 1];
        let new_nnz = self.nnz() - (old_hi - old_lo) + sorted.len();
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(new_nnz);
        let mut data = Vec::with_capacity(new_nnz);
        indptr.push(0);
        for r in 0..self.nrows {
            if r == row {
                for &(c, v) in &sorted {
                    indices.push(c);
                    data.push(v);
                }
            } else {
                for (c, v) in self.row(r) {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        ComplexOperator { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.add(&other.scale(C64::new(-1.0, 0.0))).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.dagger()) <= tol
    }

    /// Explicit densification (logged; the Liouvillian must never take this path).
    pub fn to_dense(&self) -> DMatrix<C64> {
        log::debug!(
            "densifying {}x{} operator with {} nonzeros",
            self.nrows,
            self.ncols,
            self.nnz()
        );
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }
}

impl std::ops::Add for &ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: &ComplexOperator) -> ComplexOperator {
        ComplexOperator::add(self, rhs)
    }
}

impl std::ops::Mul for &ComplexOperator {
    type Output = ComplexOperator;
    fn mul(self, rhs: &ComplexOperator) -> ComplexOperator {
        self.matmul(rhs)
    }
}
