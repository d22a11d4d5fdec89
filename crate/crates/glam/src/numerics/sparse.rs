//! CSR sparse matrices for features and graphs.

use crate::numerics::DenseMatrix;
use crate::{GlamError, Result};
use rayon::prelude::*;

/// Compressed sparse row matrix with unique, in-range coordinates and finite
/// values. Column indices are sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triples. Rejects out-of-range indices,
    /// duplicate coordinates, and non-finite values.
    pub fn from_coo(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        sorted.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut prev: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            if r >= rows || c >= cols {
                return Err(GlamError::dim(format!(
                    "entry ({r},{c}) out of range for {rows}x{cols}"
                )));
            }
            if prev == Some((r, c)) {
                return Err(GlamError::param(format!("duplicate coordinate ({r},{c})")));
            }
            if !v.is_finite() {
                return Err(GlamError::param(format!("non-finite value at ({r},{c})")));
            }
            prev = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            0.0
        } else {
            self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
        }
    }

    /// Column indices and values of one row, sorted by column.
    pub fn row_entries(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (cols, vals) = self.row_entries(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row_entries(r).1.iter().sum())
            .collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.cols {
            counts[i + 1] += counts[i];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0f64; self.nnz()];
        let mut cursor = counts.clone();
        for (r, c, v) in self.iter() {
            let at = cursor[c];
            col_idx[at] = r;
            values[at] = v;
            cursor[c] += 1;
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            out.set(r, c, v);
        }
        out
    }

    /// `self * b` for dense `b`, parallel over output rows.
    pub fn matmul_dense(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != b.rows() {
            return Err(GlamError::dim(format!(
                "spmm: {}x{} * {}x{}",
                self.rows,
                self.cols,
                b.rows(),
                b.cols()
            )));
        }
        let bc = b.cols();
        let mut out = DenseMatrix::zeros(self.rows, bc);
        let bdata = b.values();
        out.values_mut()
            .par_chunks_mut(bc)
            .enumerate()
            .for_each(|(r, orow)| {
                let (cols, vals) = self.row_entries(r);
                for (&c, &v) in cols.iter().zip(vals) {
                    let brow = &bdata[c * bc..(c + 1) * bc];
                    for (o, &bv) in orow.iter_mut().zip(brow) {
                        *o += v * bv;
                    }
                }
            });
        Ok(out)
    }

    /// `self^T * b` for dense `b`. Sequential scatter; cheap at feature scale.
    pub fn transpose_matmul_dense(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != b.rows() {
            return Err(GlamError::dim(format!(
                "spmm^T: {}x{} ^T * {}x{}",
                self.rows,
                self.cols,
                b.rows(),
                b.cols()
            )));
        }
        let bc = b.cols();
        let mut out = DenseMatrix::zeros(self.cols, bc);
        for r in 0..self.rows {
            let (cols, vals) = self.row_entries(r);
            let brow = b.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let orow = out.row_mut(c);
                for (o, &bv) in orow.iter_mut().zip(brow) {
                    *o += v * bv;
                }
            }
        }
        Ok(out)
    }

    /// `self * other` for sparse `other`, returning CSR. Parallel over rows.
    pub fn matmul_sparse(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(GlamError::dim(format!(
                "sparse matmul: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let oc = other.cols;
        let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..self.rows)
            .into_par_iter()
            .map(|r| {
                let mut acc = vec![0.0f64; oc];
                let mut touched = Vec::new();
                let (cols, vals) = self.row_entries(r);
                for (&k, &v) in cols.iter().zip(vals) {
                    let (ocols, ovals) = other.row_entries(k);
                    for (&c, &ov) in ocols.iter().zip(ovals) {
                        if acc[c] == 0.0 {
                            touched.push(c);
                        }
                        acc[c] += v * ov;
                    }
                }
                touched.sort_unstable();
                let vals: Vec<f64> = touched.iter().map(|&c| acc[c]).collect();
                (touched, vals)
            })
            .collect();
        let mut row_ptr = vec![0usize; self.rows + 1];
        for (r, (cols, _)) in rows.iter().enumerate() {
            row_ptr[r + 1] = row_ptr[r] + cols.len();
        }
        let mut col_idx = Vec::with_capacity(row_ptr[self.rows]);
        let mut values = Vec::with_capacity(row_ptr[self.rows]);
        for (cols, vals) in rows {
            col_idx.extend(cols);
            values.extend(vals);
        }
        Ok(SparseMatrix {
            rows: self.rows,
            cols: oc,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Drops entries for which `keep` returns false.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize, f64) -> bool) -> SparseMatrix {
        let mut entries = Vec::new();
        for (r, c, v) in self.iter() {
            if keep(r, c, v) {
                entries.push((r, c, v));
            }
        }
        SparseMatrix::from_coo(self.rows, self.cols, &entries)
            .expect("filtered entries remain valid")
    }
}

/// Sparse-dense product, the workhorse behind every graph convolution.
pub fn spmm(a: &SparseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    a.matmul_dense(b)
}
