//! Minimal 64-bit linear algebra and optimization kernels.
//!
//! Everything trains in f64. Parallel kernels partition work by output row,
//! so results are bit-identical regardless of thread count.

mod adam;
mod dense;
mod ops;
mod sparse;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dense::DenseMatrix;
pub use ops::{
    cross_entropy_rows, dropout, dropout_with_mask, relu, softmax_row_in_place, softmax_rows,
    EPS_LOG,
};
pub use sparse::{spmm, SparseMatrix};
