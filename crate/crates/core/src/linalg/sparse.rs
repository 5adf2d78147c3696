//! Compressed sparse row storage assembled deterministically from
//! per-cell dense blocks.

use crate::Scalar;
use nalgebra::DMatrix;

/// Triplet accumulator; duplicate entries are summed on build.
#[derive(Clone, Debug)]
pub struct CooBuilder<S> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, S)>,
}

impl<S: Scalar> CooBuilder<S> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: S) {
        debug_assert!(i < self.nrows && j < self.ncols);
        if v != S::zero() {
            self.entries.push((i, j, v));
        }
    }

    /// Scatter a dense block: `block[(a, b)]` goes to `(rows[a], cols[b])`.
    /// Indices mapped to `usize::MAX` are skipped (eliminated dofs).
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], block: &DMatrix<S>) {
        for (a, &i) in rows.iter().enumerate() {
            if i == usize::MAX {
                continue;
            }
            for (b, &j) in cols.iter().enumerate() {
                if j == usize::MAX {
                    continue;
                }
                self.push(i, j, block[(a, b)]);
            }
        }
    }

    pub fn build(mut self) -> CsrMatrix<S> {
        // stable sort keeps the assembly order deterministic among duplicates
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<S> = Vec::with_capacity(self.entries.len());
        let mut last = None;
        for &(i, j, v) in &self.entries {
            if last == Some((i, j)) {
                let acc = vals.last_mut().unwrap();
                *acc = *acc + v;
            } else {
                col_idx.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix<S> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<S>,
}

impl<S: Scalar> CsrMatrix<S> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![S::one(); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[S]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, S)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[S], y: &mut [S]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = S::zero();
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    /// y += Aᵀ x without forming the transpose.
    pub fn mul_transpose_vec_add(&self, x: &[S], y: &mut [S]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let xi = x[i];
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix<S> {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut vals = vec![S::zero(); self.nnz()];
        let mut next = counts.clone();
        for (i, j, v) in self.iter() {
            let p = next[j];
            col_idx[p] = i;
            vals[p] = v;
            next[j] += 1;
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            vals,
        }
    }

    /// Extract the block `self[rows, cols]`; `col_map[j]` gives the local
    /// column of global `j` or `usize::MAX` if dropped.
    pub fn extract(&self, rows: &[usize], col_map: &[usize], ncols_local: usize) -> CsrMatrix<S> {
        let mut b = CooBuilder::new(rows.len(), ncols_local);
        for (li, &gi) in rows.iter().enumerate() {
            let (cols, vals) = self.row(gi);
            for (&gj, &v) in cols.iter().zip(vals) {
                let lj = col_map[gj];
                if lj != usize::MAX {
                    b.push(li, lj, v);
                }
            }
        }
        b.build()
    }

    pub fn to_dense(&self) -> DMatrix<S> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            m[(i, j)] += v;
        }
        m
    }

    /// Maximum absolute asymmetry ‖A − Aᵀ‖_max; the matrix must be square.
    pub fn max_asymmetry(&self) -> S {
        let t = self.transpose();
        let mut worst = S::zero();
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = t.row(i);
            // rows are sorted; merge-compare
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                let d = if ja == jb {
                    p += 1;
                    q += 1;
                    va[p - 1] - vb[q - 1]
                } else if ja < jb {
                    p += 1;
                    va[p - 1]
                } else {
                    q += 1;
                    vb[q - 1]
                };
                let a = d.abs();
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> S {
        self.vals
            .iter()
            .fold(S::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    /// Upper triangle (including diagonal) in compressed sparse column form,
    /// with explicit zero diagonal entries inserted where missing.
    pub fn upper_triangle_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<S>) {
        assert_eq!(self.nrows, self.ncols);
        let n = self.nrows;
        let mut counts = vec![0usize; n + 1];
        let mut has_diag = vec![false; n];
        for (i, j, _) in self.iter() {
            if i <= j {
                counts[j + 1] += 1;
                if i == j {
                    has_diag[j] = true;
                }
            }
        }
        for j in 0..n {
            if !has_diag[j] {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let nnz = counts[n];
        let mut rowval = vec![0usize; nnz];
        let mut nzval = vec![S::zero(); nnz];
        let mut next = counts.clone();
        // CSR iteration emits ascending rows, so each column stays row-sorted
        for (i, j, v) in self.iter() {
            if i < j {
                rowval[next[j]] = i;
                nzval[next[j]] = v;
                next[j] += 1;
            }
        }
        for j in 0..n {
            if !has_diag[j] {
                rowval[next[j]] = j;
                next[j] += 1;
            }
        }
        for (i, j, v) in self.iter() {
            if i == j {
                rowval[next[j]] = i;
                nzval[next[j]] = v;
                next[j] += 1;
            }
        }
        (counts, rowval, nzval)
    }

    /// Frobenius-style residual ‖Ax − b‖₂.
    pub fn residual_norm(&self, x: &[S], b: &[S]) -> S {
        let ax = self.mul_vec(x);
        let mut s = S::zero();
        for i in 0..b.len() {
            let d = ax[i] - b[i];
            s += d * d;
        }
        s.sqrt()
    }
}



#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn dvec(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn random_csr(seed: u64, n: usize, m: usize) -> CsrMatrix<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut b = CooBuilder::new(n, m);
        for _ in 0..(3 * n) {
            b.push(
                rng.gen_range(0..n),
                rng.gen_range(0..m),
                rng.gen_range(-1.0..1.0),
            );
        }
        b.build()
    }

    #[test]
    fn duplicates_are_summed() {
        let mut b = CooBuilder::new(2, 2);
        b.push(0, 1, 1.5);
        b.push(0, 1, 0.5);
        b.push(1, 0, -1.0);
        let a = b.build();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.to_dense()[(0, 1)], 2.0);
        assert_eq!(a.to_dense()[(1, 0)], -1.0);
    }

    #[test]
    fn upper_csc_inserts_missing_diagonal() {
        let mut b = CooBuilder::new(3, 3);
        b.push(0, 0, 2.0);
        b.push(0, 2, 1.0);
        b.push(2, 0, 1.0);
        let a = b.build();
        let (cp, ri, _vx) = a.upper_triangle_csc();
        assert_eq!(cp, vec![0, 1, 2, 4]);
        // column 1 got an explicit zero diagonal
        assert_eq!(ri[1], 1);
    }

    proptest! {
        #[test]
        fn matvec_matches_dense(seed in 0u64..50) {
            let a = random_csr(seed, 13, 9);
            let x: Vec<f64> = (0..9).map(|i| (i as f64) * 0.3 - 1.0).collect();
            let sparse = a.mul_vec(&x);
            let dense = a.to_dense() * dvec(&x);
            for i in 0..13 {
                prop_assert!((sparse[i] - dense[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn transpose_involution(seed in 0u64..50) {
            let a = random_csr(seed, 7, 11);
            let att = a.transpose().transpose();
            prop_assert_eq!(a.to_dense(), att.to_dense());
        }
    }
}
