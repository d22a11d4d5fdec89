//! Activations, row-softmax, dropout, and masked cross-entropy.

use crate::numerics::DenseMatrix;
use crate::{GlamError, Result};
use rand::Rng;

/// Stability constant added inside every log in cross-entropy.
pub const EPS_LOG: f64 = 1e-12;

/// Row-wise softmax with max-subtraction. Entries of -inf are treated as
/// masked and map to exactly 0; rows that are entirely -inf come out as all
/// zeros rather than NaN.
pub fn softmax_rows(m: &DenseMatrix) -> DenseMatrix {
    let mut out = m.clone();
    for r in 0..out.rows() {
        softmax_row_in_place(out.row_mut(r));
    }
    out
}

/// In-place softmax of one row with max-subtraction; -inf entries map to 0.
pub fn softmax_row_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        row.fill(0.0);
        return;
    }
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Elementwise max(0, x). Normalizes -0.0 to 0.0.
pub fn relu(m: &DenseMatrix) -> DenseMatrix {
    let mut out = m.clone();
    for v in out.values_mut() {
        *v = if *v > 0.0 { *v } else { 0.0 };
    }
    out
}

/// Inverted dropout. With `training` unset this is the identity map.
pub fn dropout(
    m: &DenseMatrix,
    rate: f64,
    rng: &mut impl Rng,
    training: bool,
) -> Result<DenseMatrix> {
    Ok(dropout_with_mask(m, rate, rng, training)?.0)
}

/// Dropout that also returns the multiplier mask (entries 0 or 1/(1-rate))
/// needed to replay the same drop pattern in a backward pass. The mask is
/// `None` when nothing was dropped.
pub fn dropout_with_mask(
    m: &DenseMatrix,
    rate: f64,
    rng: &mut impl Rng,
    training: bool,
) -> Result<(DenseMatrix, Option<DenseMatrix>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(GlamError::param(format!("dropout rate {rate} not in [0,1)")));
    }
    if !training || rate == 0.0 {
        return Ok((m.clone(), None));
    }
    let scale = 1.0 / (1.0 - rate);
    let mut out = m.clone();
    let mut mask = DenseMatrix::zeros(m.rows(), m.cols());
    for (v, mv) in out.values_mut().iter_mut().zip(mask.values_mut()) {
        if rng.random::<f64>() < rate {
            *v = 0.0;
        } else {
            *v *= scale;
            *mv = scale;
        }
    }
    Ok((out, Some(mask)))
}

/// Masked row cross-entropy: -sum over masked rows of target . ln(pred+eps).
///
/// Rows whose target sums to zero contribute exactly 0. The log argument is
/// clamped to 1 so the result is never negative.
pub fn cross_entropy_rows(pred: &DenseMatrix, target: &DenseMatrix, rows: &[usize]) -> Result<f64> {
    if pred.rows() != target.rows() || pred.cols() != target.cols() {
        return Err(GlamError::dim(format!(
            "cross_entropy: {}x{} vs {}x{}",
            pred.rows(),
            pred.cols(),
            target.rows(),
            target.cols()
        )));
    }
    let mut total = 0.0;
    for &r in rows {
        if r >= pred.rows() {
            return Err(GlamError::dim(format!("cross_entropy: row {r} out of range")));
        }
        let (p, t) = (pred.row(r), target.row(r));
        for (&pv, &tv) in p.iter().zip(t) {
            if tv != 0.0 {
                total -= tv * (pv + EPS_LOG).min(1.0).ln();
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn softmax_uniform_on_zeros() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 0.0, 0.0]]).unwrap();
        let s = softmax_rows(&m);
        for &v in s.row(0) {
            assert_close(v, 1.0 / 3.0, 1e-15);
        }
    }

    #[test]
    fn softmax_no_overflow_on_large_logits() {
        let m = DenseMatrix::from_rows(&[vec![1000.0, 0.0]]).unwrap();
        let s = softmax_rows(&m);
        assert!(s.is_finite());
        assert_close(s.get(0, 0), 1.0, 1e-12);
        assert_close(s.get(0, 1), 0.0, 1e-12);
    }

    #[test]
    fn softmax_of_logs_recovers_ratios() {
        let m = DenseMatrix::from_rows(&[vec![1.0f64.ln(), 2.0f64.ln(), 3.0f64.ln()]]).unwrap();
        let s = softmax_rows(&m);
        assert_close(s.get(0, 0), 1.0 / 6.0, 1e-12);
        assert_close(s.get(0, 1), 2.0 / 6.0, 1e-12);
        assert_close(s.get(0, 2), 3.0 / 6.0, 1e-12);
    }

    #[test]
    fn relu_clamps_and_normalizes_signed_zero() {
        let m = DenseMatrix::from_rows(&[vec![-1.0, 2.0], vec![-0.0, 0.0]]).unwrap();
        let r = relu(&m);
        assert_eq!(r.row(0), &[0.0, 2.0]);
        assert!(r.get(1, 0).is_sign_positive());
    }

    #[test]
    fn dropout_rate_zero_is_identity() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(dropout(&m, 0.0, &mut rng, true).unwrap(), m);
    }

    #[test]
    fn dropout_eval_mode_is_identity_bit_for_bit() {
        let m = DenseMatrix::from_rows(&[vec![1.5, -2.5, 0.125]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = dropout(&m, 0.9, &mut rng, false).unwrap();
        assert_eq!(out.values(), m.values());
    }

    #[test]
    fn dropout_rate_one_rejected() {
        let m = DenseMatrix::zeros(1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(dropout(&m, 1.0, &mut rng, true).is_err());
    }

    #[test]
    fn dropout_preserves_mean_at_scale() {
        let m = DenseMatrix::from_vec(100, 1000, vec![1.0; 100_000]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let out = dropout(&m, 0.5, &mut rng, true).unwrap();
        let mean = out.values().iter().sum::<f64>() / 100_000.0;
        assert_close(mean, 1.0, 0.02);
    }

    #[test]
    fn cross_entropy_matching_one_hot_is_near_zero() {
        let pred = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let target = DenseMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let ce = cross_entropy_rows(&pred, &target, &[0]).unwrap();
        assert!(ce.abs() < 1e-9);
        assert!(ce >= 0.0);
    }

    #[test]
    fn cross_entropy_uniform_over_four_classes() {
        let pred = DenseMatrix::from_rows(&[vec![0.25; 4]]).unwrap();
        let target = DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.0, 0.0]]).unwrap();
        let ce = cross_entropy_rows(&pred, &target, &[0]).unwrap();
        assert_close(ce, 4.0f64.ln(), 1e-9);
    }

    #[test]
    fn cross_entropy_zero_target_row_contributes_nothing() {
        let pred = DenseMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let target = DenseMatrix::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(cross_entropy_rows(&pred, &target, &[0]).unwrap(), 0.0);
    }
}
