//! Negative-sampling loss for one training tuple and its analytic gradients.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, log_sigmoid, mat_t_vec, mat_vec, sigmoid};

/// Bilinear score `v_t · T · v_c` with `T` row-major.
pub fn dm_score(target: &[f64], matrix: &[f64], context: &[f64]) -> Result<f64> {
    let dim = target.len();
    if context.len() != dim {
        return Err(Error::ShapeMismatch {
            expected: dim,
            found: context.len(),
        });
    }
    if matrix.len() != dim * dim {
        return Err(Error::ShapeMismatch {
            expected: dim * dim,
            found: matrix.len(),
        });
    }
    Ok(matrix
        .chunks_exact(dim)
        .zip(target)
        .map(|(row, &t)| t * dot(row, context))
        .sum())
}

/// Parameters touched by one tuple. Without a matrix the score is `e_t · o_c`.
#[derive(Debug, Clone, Copy)]
pub struct TupleParams<'a> {
    pub target: &'a [f64],
    pub context: &'a [f64],
    /// `k` negative context vectors, concatenated.
    pub negatives: &'a [f64],
    pub matrix: Option<&'a [f64]>,
}

/// Loss `−ln σ(u⁺) − Σ ln σ(−u⁻)` and its gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleGrads {
    pub loss: f64,
    pub target: Vec<f64>,
    pub context: Vec<f64>,
    /// Gradients of the negatives, concatenated like the input.
    pub negatives: Vec<f64>,
    pub matrix: Option<Vec<f64>>,
    // Σ g_i · c_i, reused for the target and matrix gradients.
    weighted: Vec<f64>,
    projected: Vec<f64>,
}

impl TupleGrads {
    pub fn zeros(dim: usize, negatives: usize, with_matrix: bool) -> Self {
        TupleGrads {
            loss: 0.0,
            target: vec![0.0; dim],
            context: vec![0.0; dim],
            negatives: vec![0.0; dim * negatives],
            matrix: with_matrix.then(|| vec![0.0; dim * dim]),
            weighted: vec![0.0; dim],
            projected: vec![0.0; dim],
        }
    }
}

pub fn tuple_loss_and_grads(params: &TupleParams<'_>) -> Result<TupleGrads> {
    let dim = params.target.len();
    let k = params.negatives.len().checked_div(dim).unwrap_or(0);
    let mut out = TupleGrads::zeros(dim, k, params.matrix.is_some());
    tuple_loss_and_grads_into(params, &mut out)?;
    Ok(out)
}

/// In-place variant reusing the buffers of `out`, which must have been
/// created with matching shapes.
pub fn tuple_loss_and_grads_into(params: &TupleParams<'_>, out: &mut TupleGrads) -> Result<()> {
    let dim = params.target.len();
    let check = |len: usize, expected: usize| {
        if len == expected {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected,
                found: len,
            })
        }
    };
    if dim == 0 {
        return Err(Error::Domain("dimensionality must be at least 1"));
    }
    check(params.context.len(), dim)?;
    if !params.negatives.len().is_multiple_of(dim) {
        return Err(Error::ShapeMismatch {
            expected: dim,
            found: params.negatives.len() % dim,
        });
    }
    if let Some(m) = params.matrix {
        check(m.len(), dim * dim)?;
    }
    check(out.target.len(), dim)?;
    check(out.negatives.len(), params.negatives.len())?;
    if out.matrix.is_some() != params.matrix.is_some() {
        return Err(Error::InvalidConfig("gradient buffer matrix presence".into()));
    }

    // Every score is `probe · c` where probe = Tᵀ·v_t (or v_t itself).
    let probe: &[f64] = match params.matrix {
        Some(m) => {
            mat_t_vec(m, params.target, &mut out.projected);
            &out.projected
        }
        None => params.target,
    };

    let u_pos = dot(probe, params.context);
    let g_pos = sigmoid(u_pos) - 1.0;
    let mut loss = -log_sigmoid(u_pos);
    out.weighted.iter_mut().for_each(|w| *w = 0.0);
    axpy(g_pos, params.context, &mut out.weighted);
    for (c, g) in out.context.iter_mut().zip(probe) {
        *c = g_pos * g;
    }
    for (neg, grad) in params
        .negatives
        .chunks_exact(dim)
        .zip(out.negatives.chunks_exact_mut(dim))
    {
        let u = dot(probe, neg);
        let g = sigmoid(u);
        loss -= log_sigmoid(-u);
        axpy(g, neg, &mut out.weighted);
        for (gi, pi) in grad.iter_mut().zip(probe) {
            *gi = g * pi;
        }
    }
    out.loss = loss;

    match (params.matrix, out.matrix.as_mut()) {
        (Some(m), Some(gm)) => {
            mat_vec(m, &out.weighted, &mut out.target);
            for (row, &t) in gm.chunks_exact_mut(dim).zip(params.target) {
                for (x, &w) in row.iter_mut().zip(&out.weighted) {
                    *x = t * w;
                }
            }
        }
        _ => out.target.copy_from_slice(&out.weighted),
    }
    Ok(())
}
