use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const ADAGRAD_EPSILON: f64 = 1e-8;

/// One Adagrad coordinate update. Returns the new `(param, accumulator)`.
///
/// `accumulator += grad²; param -= lr · grad / (sqrt(accumulator) + ε)`
#[inline]
pub fn adagrad_step(param: f64, grad: f64, accumulator: f64, lr: f64) -> Result<(f64, f64)> {
    if !grad.is_finite() {
        return Err(Error::NonFinite("gradient"));
    }
    let acc = accumulator + grad * grad;
    Ok((param - lr * grad / (libm::sqrt(acc) + ADAGRAD_EPSILON), acc))
}

/// Per-parameter sums of squared gradients for a dense parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdagradState {
    accumulators: Vec<f64>,
    pub epsilon: f64,
}

impl AdagradState {
    pub fn new(len: usize) -> Self {
        AdagradState {
            accumulators: vec![0.0; len],
            epsilon: ADAGRAD_EPSILON,
        }
    }

    pub fn accumulators(&self) -> &[f64] {
        &self.accumulators
    }

    /// Applies one step to every coordinate. Nothing is modified when any
    /// gradient is non-finite.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.accumulators.len() || grads.len() != params.len() {
            return Err(Error::ShapeMismatch {
                expected: self.accumulators.len(),
                found: grads.len(),
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        for ((p, &g), acc) in params.iter_mut().zip(grads).zip(&mut self.accumulators) {
            *acc += g * g;
            *p -= lr * g / (libm::sqrt(*acc) + self.epsilon);
        }
        Ok(())
    }
}
