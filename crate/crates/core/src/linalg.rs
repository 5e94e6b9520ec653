//! Small dense vector helpers. Matrices are row-major `dim * dim` slices.

/// Widening view over the two float widths stored and computed in this crate.
pub trait Scalar: Copy {
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

#[inline]
pub fn dot<A: Scalar, B: Scalar>(u: &[A], v: &[B]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.to_f64() * b.to_f64()).sum()
}

#[inline]
pub fn norm<A: Scalar>(u: &[A]) -> f64 {
    libm::sqrt(dot(u, u))
}

/// `out = m · v` for a row-major square matrix.
pub fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let dim = v.len();
    debug_assert_eq!(m.len(), dim * dim);
    for (row, o) in m.chunks_exact(dim).zip(out.iter_mut()) {
        *o = dot(row, v);
    }
}

/// `out = mᵀ · v` for a row-major square matrix.
pub fn mat_t_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let dim = v.len();
    debug_assert_eq!(m.len(), dim * dim);
    out.iter_mut().for_each(|o| *o = 0.0);
    for (row, &vi) in m.chunks_exact(dim).zip(v) {
        for (o, &mij) in out.iter_mut().zip(row) {
            *o += vi * mij;
        }
    }
}

/// `y += a · x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Numerically stable `ln σ(x)`.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -libm::log1p(libm::exp(-x))
    } else {
        x - libm::log1p(libm::exp(x))
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}
