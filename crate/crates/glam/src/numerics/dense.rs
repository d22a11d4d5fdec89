//! Row-major dense f64 matrices.

use crate::{GlamError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

// Below this many output elements, parallel dispatch costs more than it saves.
const PAR_THRESHOLD: usize = 16 * 1024;

/// Row-major dense matrix of f64.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(GlamError::dim(format!(
                "expected {}x{}={} values, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(GlamError::dim("ragged rows".to_string()));
            }
            data.extend_from_slice(row);
        }
        Ok(DenseMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * other`, parallel over output rows.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(GlamError::dim(format!(
                "matmul: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        let oc = other.cols;
        let ic = self.cols;
        let body = |(i, orow): (usize, &mut [f64])| {
            let arow = &self.data[i * ic..(i + 1) * ic];
            for (k, &a) in arow.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * oc..(k + 1) * oc];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        };
        if out.data.len() * ic >= PAR_THRESHOLD * 64 {
            out.data.par_chunks_mut(oc).enumerate().for_each(body);
        } else {
            out.data.chunks_mut(oc).enumerate().for_each(body);
        }
        Ok(out)
    }

    /// `self^T * other` without materializing the transpose of `self`.
    ///
    /// Accumulates per-block outer products and reduces blocks in index
    /// order, keeping the reduction deterministic under parallelism.
    pub fn transpose_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != other.rows {
            return Err(GlamError::dim(format!(
                "transpose_matmul: {}x{} ^T * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (d, h) = (self.cols, other.cols);
        let n = self.rows;
        let threads = rayon::current_num_threads().max(1);
        let block = n.div_ceil(threads.max(1) * 2).max(1);
        let partials: Vec<Vec<f64>> = (0..n.div_ceil(block))
            .into_par_iter()
            .map(|b| {
                let lo = b * block;
                let hi = (lo + block).min(n);
                let mut acc = vec![0.0f64; d * h];
                for i in lo..hi {
                    let arow = &self.data[i * d..(i + 1) * d];
                    let brow = &other.data[i * h..(i + 1) * h];
                    for (f, &a) in arow.iter().enumerate() {
                        if a == 0.0 {
                            continue;
                        }
                        let orow = &mut acc[f * h..(f + 1) * h];
                        for (o, &bv) in orow.iter_mut().zip(brow) {
                            *o += a * bv;
                        }
                    }
                }
                acc
            })
            .collect();
        let mut out = DenseMatrix::zeros(d, h);
        for p in partials {
            for (o, v) in out.data.iter_mut().zip(p) {
                *o += v;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &DenseMatrix, scale: f64) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(GlamError::dim("add_scaled: shape mismatch".to_string()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(())
    }

    /// Hadamard product in place.
    pub fn mul_elem(&mut self, other: &DenseMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(GlamError::dim("mul_elem: shape mismatch".to_string()));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a *= b;
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Glorot/Xavier uniform initialization.
    pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> DenseMatrix {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let mut m = DenseMatrix::zeros(rows, cols);
        for v in m.values_mut() {
            *v = rng.random::<f64>() * 2.0 * limit - limit;
        }
        m
    }

    /// Per-row argmax; ties resolve to the lowest column index.
    pub fn argmax_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let mut best = 0usize;
                for (j, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }
}
