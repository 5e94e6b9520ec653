//! Shared parameter tables.
//!
//! Values are `f32` stored in relaxed atomics so several workers may update
//! rows concurrently without locks. Interleaved updates of the same row can
//! lose writes; that is the accepted behavior of parallel training. A single
//! worker sees ordinary sequential semantics.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU32, Ordering};

use rand::Rng;

use super::adagrad::adagrad_step;
use crate::error::Result;

#[derive(Debug, Default)]
#[repr(transparent)]
pub struct AtomicF32(AtomicU32);

impl AtomicF32 {
    pub fn new(v: f32) -> Self {
        AtomicF32(AtomicU32::new(v.to_bits()))
    }

    #[inline]
    pub fn load(&self) -> f32 {
        f32::from_bits(self.0.load(Ordering::Relaxed))
    }

    #[inline]
    pub fn store(&self, v: f32) {
        self.0.store(v.to_bits(), Ordering::Relaxed)
    }
}

/// `rows × width` parameters with one Adagrad accumulator per entry.
#[derive(Debug)]
pub struct ParamTable {
    rows: usize,
    width: usize,
    values: Vec<AtomicF32>,
    accumulators: Vec<AtomicF32>,
}

impl ParamTable {
    pub fn from_values(rows: usize, width: usize, values: Vec<f32>) -> Self {
        assert_eq!(values.len(), rows * width);
        ParamTable {
            rows,
            width,
            values: values.into_iter().map(AtomicF32::new).collect(),
            accumulators: (0..rows * width).map(|_| AtomicF32::new(0.0)).collect(),
        }
    }

    pub fn uniform<R: Rng + ?Sized>(rows: usize, width: usize, half_range: f32, rng: &mut R) -> Self {
        let values = (0..rows * width)
            .map(|_| (rng.random::<f32>() * 2.0 - 1.0) * half_range)
            .collect();
        Self::from_values(rows, width, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn read_row(&self, row: usize, out: &mut [f64]) {
        let start = row * self.width;
        for (o, v) in out.iter_mut().zip(&self.values[start..start + self.width]) {
            *o = v.load() as f64;
        }
    }

    /// Adagrad step on one row. The row is left untouched if any gradient
    /// component is non-finite.
    pub fn apply_adagrad(&self, row: usize, grad: &[f64], lr: f64) -> Result<()> {
        let start = row * self.width;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(crate::Error::NonFinite("gradient"));
        }
        let values = &self.values[start..start + self.width];
        let accs = &self.accumulators[start..start + self.width];
        for ((v, a), &g) in values.iter().zip(accs).zip(grad) {
            if g == 0.0 {
                continue;
            }
            let (p, acc) = adagrad_step(v.load() as f64, g, a.load() as f64, lr)?;
            v.store(p as f32);
            a.store(acc as f32);
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<f32> {
        self.values.iter().map(AtomicF32::load).collect()
    }

    pub fn accumulators(&self) -> Vec<f32> {
        self.accumulators.iter().map(AtomicF32::load).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulators_never_decrease() {
        let t = ParamTable::from_values(1, 3, alloc::vec![0.0; 3]);
        let mut prev = t.accumulators();
        for g in [[0.1, -0.2, 0.0], [0.0, 0.5, -1.0], [3.0, 0.0, 0.0]] {
            t.apply_adagrad(0, &g, 0.025).unwrap();
            let now = t.accumulators();
            assert!(now.iter().zip(&prev).all(|(n, p)| n >= p));
            prev = now;
        }
    }

    #[test]
    fn non_finite_gradient_leaves_row_untouched() {
        let t = ParamTable::from_values(1, 2, alloc::vec![1.0, 2.0]);
        assert!(t.apply_adagrad(0, &[0.1, f64::NAN], 0.1).is_err());
        assert_eq!(t.to_vec(), [1.0, 2.0]);
    }
}
