//! Adam with bias correction and per-matrix L2 weight decay.

use crate::numerics::DenseMatrix;
use crate::{GlamError, Result};
use serde::{Deserialize, Serialize};

/// Adam moment coefficients. The source protocol does not pin these, so the
/// conventional defaults are used and surfaced as configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second-moment accumulators for a list of parameter matrices.
#[derive(Debug, Clone)]
pub struct AdamState {
    step: usize,
    config: AdamConfig,
    first: Vec<DenseMatrix>,
    second: Vec<DenseMatrix>,
}

impl AdamState {
    pub fn new(params: &[&DenseMatrix], config: AdamConfig) -> Self {
        let zeros = |m: &&DenseMatrix| DenseMatrix::zeros(m.rows(), m.cols());
        AdamState {
            step: 0,
            config,
            first: params.iter().map(zeros).collect(),
            second: params.iter().map(zeros).collect(),
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }
}

/// One Adam update over a parameter list.
///
/// `weight_decay[i]` is the L2 coefficient for parameter `i`; the penalty
/// gradient `2 * alpha * w` is added to the raw gradient before the moment
/// updates, realizing the squared-Frobenius regularization terms.
pub fn adam_step(
    params: &mut [&mut DenseMatrix],
    grads: &[&DenseMatrix],
    state: &mut AdamState,
    lr: f64,
    weight_decay: &[f64],
) -> Result<()> {
    if params.len() != grads.len()
        || params.len() != weight_decay.len()
        || params.len() != state.first.len()
    {
        return Err(GlamError::dim("adam_step: parameter list length mismatch"));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.first) {
        if p.rows() != g.rows()
            || p.cols() != g.cols()
            || p.rows() != m.rows()
            || p.cols() != m.cols()
        {
            return Err(GlamError::dim("adam_step: shape mismatch"));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let AdamConfig {
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);
    for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let alpha = weight_decay[i];
        let m = state.first[i].values_mut();
        let v = state.second[i].values_mut();
        for ((pv, &gv), (mv, vv)) in p
            .values_mut()
            .iter_mut()
            .zip(g.values())
            .zip(m.iter_mut().zip(v.iter_mut()))
        {
            let grad = gv + 2.0 * alpha * *pv;
            *mv = beta1 * *mv + (1.0 - beta1) * grad;
            *vv = beta2 * *vv + (1.0 - beta2) * grad * grad;
            let m_hat = *mv / bc1;
            let v_hat = *vv / bc2;
            *pv -= lr * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}
