//! Feature representations, including boosted features.
//!
//! Boosted features are X * N where N is the symmetric degree-normalized
//! feature co-occurrence matrix built from X^T X. The product is kept in
//! factored form so matrix products against weight matrices stay sparse;
//! it is materialized (densely only when dense enough) for kNN search and
//! input dropout.

use crate::numerics::{DenseMatrix, SparseMatrix};
use crate::Result;
use std::sync::OnceLock;

// Materialize boosted features densely only above this fill ratio.
const DENSIFY_THRESHOLD: f64 = 0.25;

/// A realized feature matrix, dense or sparse depending on fill.
#[derive(Debug, Clone)]
pub enum Realized {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
}

impl Realized {
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Realized::Sparse(s) => s.to_dense(),
            Realized::Dense(d) => d.clone(),
        }
    }
}

enum Repr {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
    /// Lazy product X * N with X^T cached; N is symmetric.
    Product {
        x: SparseMatrix,
        x_t: SparseMatrix,
        n_tilde: SparseMatrix,
    },
}

/// Node features behind a uniform matrix-product interface.
pub struct Features {
    repr: Repr,
    realized: OnceLock<Realized>,
}

impl std::fmt::Debug for Features {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.repr {
            Repr::Sparse(_) => "sparse",
            Repr::Dense(_) => "dense",
            Repr::Product { .. } => "boosted-product",
        };
        write!(f, "Features<{kind}, {}x{}>", self.rows(), self.cols())
    }
}

impl Clone for Features {
    fn clone(&self) -> Self {
        let repr = match &self.repr {
            Repr::Sparse(s) => Repr::Sparse(s.clone()),
            Repr::Dense(d) => Repr::Dense(d.clone()),
            Repr::Product { x, x_t, n_tilde } => Repr::Product {
                x: x.clone(),
                x_t: x_t.clone(),
                n_tilde: n_tilde.clone(),
            },
        };
        Features {
            repr,
            realized: OnceLock::new(),
        }
    }
}

impl Features {
    pub fn sparse(x: SparseMatrix) -> Self {
        Features {
            repr: Repr::Sparse(x),
            realized: OnceLock::new(),
        }
    }

    pub fn dense(x: DenseMatrix) -> Self {
        Features {
            repr: Repr::Dense(x),
            realized: OnceLock::new(),
        }
    }

    pub fn rows(&self) -> usize {
        match &self.repr {
            Repr::Sparse(s) => s.rows(),
            Repr::Dense(d) => d.rows(),
            Repr::Product { x, .. } => x.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match &self.repr {
            Repr::Sparse(s) => s.cols(),
            Repr::Dense(d) => d.cols(),
            Repr::Product { n_tilde, .. } => n_tilde.cols(),
        }
    }

    /// `F * w`. For the factored form this is X * (N * w), never touching a
    /// dense n x d matrix.
    pub fn matmul(&self, w: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.repr {
            Repr::Sparse(s) => s.matmul_dense(w),
            Repr::Dense(d) => d.matmul(w),
            Repr::Product { x, n_tilde, .. } => x.matmul_dense(&n_tilde.matmul_dense(w)?),
        }
    }

    /// `F^T * g`, used for weight gradients. For the factored form this is
    /// N * (X^T * g), relying on N's symmetry.
    pub fn transpose_matmul(&self, g: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.repr {
            Repr::Sparse(s) => s.transpose_matmul_dense(g),
            Repr::Dense(d) => d.transpose_matmul(g),
            Repr::Product { x_t, n_tilde, .. } => n_tilde.matmul_dense(&x_t.matmul_dense(g)?),
        }
    }

    /// The realized matrix, cached. Product features densify only when their
    /// fill ratio exceeds the densification threshold.
    pub fn realize(&self) -> &Realized {
        self.realized.get_or_init(|| match &self.repr {
            Repr::Sparse(s) => Realized::Sparse(s.clone()),
            Repr::Dense(d) => Realized::Dense(d.clone()),
            Repr::Product { x, n_tilde, .. } => {
                let product = x
                    .matmul_sparse(n_tilde)
                    .expect("factored shapes are consistent");
                if product.density() > DENSIFY_THRESHOLD {
                    Realized::Dense(product.to_dense())
                } else {
                    Realized::Sparse(product)
                }
            }
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.realize().to_dense()
    }

    pub fn is_factored(&self) -> bool {
        matches!(self.repr, Repr::Product { .. })
    }
}

/// Builds boosted features X * N with N = D^{-1/2} (X^T X) D^{-1/2}, where D
/// holds the row sums of X^T X. Rows of X^T X with zero sum map to zero rows
/// of N. Expects nonnegative X.
pub fn boosted_features(x: &SparseMatrix) -> Features {
    debug_assert!(x.iter().all(|(_, _, v)| v >= 0.0), "features must be nonnegative");
    let x_t = x.transpose();
    let s = x_t
        .matmul_sparse(x)
        .expect("X^T and X dimensions always agree");
    let sums = s.row_sums();
    let inv_sqrt: Vec<f64> = sums
        .iter()
        .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 })
        .collect();
    let mut entries = Vec::with_capacity(s.nnz());
    for (r, c, v) in s.iter() {
        let w = v * inv_sqrt[r] * inv_sqrt[c];
        if w != 0.0 {
            entries.push((r, c, w));
        }
    }
    let n_tilde = SparseMatrix::from_coo(s.rows(), s.cols(), &entries)
        .expect("normalized entries stay unique and in range");
    Features {
        repr: Repr::Product {
            x: x.clone(),
            x_t,
            n_tilde,
        },
        realized: OnceLock::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_boosted(x: &DenseMatrix) -> DenseMatrix {
        let d = x.cols();
        let mut s = DenseMatrix::zeros(d, d);
        for f in 0..d {
            for g in 0..d {
                let mut acc = 0.0;
                for i in 0..x.rows() {
                    acc += x.get(i, f) * x.get(i, g);
                }
                s.set(f, g, acc);
            }
        }
        let mut n = DenseMatrix::zeros(d, d);
        for f in 0..d {
            let sum: f64 = (0..d).map(|g| s.get(f, g)).sum();
            for g in 0..d {
                let gsum: f64 = (0..d).map(|h| s.get(g, h)).sum();
                if sum > 0.0 && gsum > 0.0 {
                    n.set(f, g, s.get(f, g) / (sum.sqrt() * gsum.sqrt()));
                }
            }
        }
        x.matmul(&n).unwrap()
    }

    #[test]
    fn orthogonal_one_hot_columns_are_fixed_points() {
        // Each feature used by exactly one node: X^T X diagonal, N = I.
        let x = SparseMatrix::from_coo(3, 3, &[(0, 0, 2.0), (1, 1, 3.0), (2, 2, 4.0)]).unwrap();
        let boosted = boosted_features(&x);
        let dense = boosted.to_dense();
        assert_eq!(dense, x.to_dense());
    }

    #[test]
    fn zero_matrix_maps_to_zero() {
        let x = SparseMatrix::from_coo(2, 2, &[]).unwrap();
        let boosted = boosted_features(&x);
        assert_eq!(boosted.to_dense(), DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn matches_dense_brute_force() {
        let x = SparseMatrix::from_coo(
            3,
            2,
            &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0), (2, 1, 1.0)],
        )
        .unwrap();
        let expect = brute_force_boosted(&x.to_dense());
        let got = boosted_features(&x).to_dense();
        for (a, b) in got.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn factored_matmul_matches_realized() {
        let x = SparseMatrix::from_coo(
            4,
            3,
            &[
                (0, 0, 1.0),
                (0, 2, 2.0),
                (1, 1, 1.0),
                (2, 0, 3.0),
                (2, 1, 1.0),
                (3, 2, 1.0),
            ],
        )
        .unwrap();
        let boosted = boosted_features(&x);
        let w = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0], vec![0.0, 1.0]]).unwrap();
        let lazy = boosted.matmul(&w).unwrap();
        let realized = boosted.to_dense().matmul(&w).unwrap();
        for (a, b) in lazy.values().iter().zip(realized.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let g = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![0.5], vec![-1.0]]).unwrap();
        let lazy_t = boosted.transpose_matmul(&g).unwrap();
        let realized_t = boosted.to_dense().transpose_matmul(&g).unwrap();
        for (a, b) in lazy_t.values().iter().zip(realized_t.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn boosted_stays_nonnegative_and_same_shape() {
        let x = SparseMatrix::from_coo(
            5,
            4,
            &[
                (0, 0, 1.0),
                (1, 0, 2.0),
                (1, 3, 1.0),
                (2, 1, 1.0),
                (3, 2, 4.0),
                (4, 3, 0.5),
            ],
        )
        .unwrap();
        let boosted = boosted_features(&x);
        assert_eq!((boosted.rows(), boosted.cols()), (5, 4));
        assert!(boosted.to_dense().values().iter().all(|&v| v >= 0.0));
    }
}
