//! Compressed sparse rows and an envelope (skyline) Cholesky factorization.
//!
//! The grids are numbered row by row, so every matrix row only couples to
//! indices within about `m` of the diagonal. The envelope factor keeps the
//! fill inside that profile and is used as the eigensolver preconditioner.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a square matrix from per-row `(column, value)` lists.
    /// Duplicate columns are summed; columns are stored in ascending order.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range for {n}x{n} matrix");
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self::from_rows(diag.iter().enumerate().map(|(i, &v)| vec![(i, v)]).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// Column-wise product with a dense block.
    pub fn mul_block(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(x.nrows(), x.ncols());
        for c in 0..x.ncols() {
            let src = x.column(c);
            let mut dst = y.column_mut(c);
            self.mul_vec(src.as_slice(), dst.as_mut_slice());
        }
        y
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|r| x[r] * self.row(r).map(|(c, v)| v * x[c]).sum::<f64>()).sum()
    }

    /// Largest `|A_rc − A_cr|` over the stored pattern of both triangles.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    /// Largest `|c − r|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, _)| c.abs_diff(r)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                a[(r, c)] = v;
            }
        }
        a
    }
}

/// Lower-triangular Cholesky factor stored by rows over the matrix envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors `A + shift·diag(d)`; `A` must be symmetric.
    pub fn factor_shifted(a: &CsrMatrix, shift: f64, d: &[f64]) -> Result<Self> {
        let n = a.dim();
        let mut first = Vec::with_capacity(n);
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for r in 0..n {
            let f = a.row(r).map(|(c, _)| c).filter(|&c| c <= r).min().unwrap_or(r);
            first.push(f);
            offset.push(offset[r] + (r - f + 1));
        }
        let mut data = vec![0.0; offset[n]];
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c <= r {
                    data[offset[r] + c - first[r]] = v;
                }
            }
            data[offset[r] + r - first[r]] += shift * d[r];
        }

        for r in 0..n {
            let fr = first[r];
            for c in fr..=r {
                let fc = first[c];
                let lo = fr.max(fc);
                let row_r = &data[offset[r] + lo - fr..offset[r] + c - fr];
                let row_c = &data[offset[c] + lo - fc..offset[c] + c - fc];
                let dot: f64 = row_r.iter().zip(row_c).map(|(a, b)| a * b).sum();
                let idx = offset[r] + c - fr;
                let s = data[idx] - dot;
                if c < r {
                    data[idx] = s / data[offset[c] + c - fc];
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: r, value: s });
                    }
                    data[idx] = s.sqrt();
                }
            }
        }
        Ok(Self {
            first,
            offset,
            data,
        })
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_shifted(a, 0.0, &vec![0.0; a.dim()])
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn stored_entries(&self) -> usize {
        self.data.len()
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        // L z = b
        for r in 0..n {
            let fr = self.first[r];
            let row = &self.data[self.offset[r]..self.offset[r + 1]];
            let dot: f64 = row[..r - fr].iter().zip(&b[fr..r]).map(|(a, x)| a * x).sum();
            b[r] = (b[r] - dot) / row[r - fr];
        }
        // Lᵀ x = z, column sweep over the row storage
        for r in (0..n).rev() {
            let fr = self.first[r];
            let row = &self.data[self.offset[r]..self.offset[r + 1]];
            b[r] /= row[r - fr];
            let xr = b[r];
            for (a, x) in row[..r - fr].iter().zip(&mut b[fr..r]) {
                *x -= a * xr;
            }
        }
    }
}
