//! Small numerical helpers shared across modules.

use crate::{Matrix, Vector};

/// Per-component central-difference step: `rel * max(1, |x|)`.
#[inline]
pub(crate) fn fd_step(rel: f64, x: f64) -> f64 {
    rel * x.abs().max(1.0)
}

/// Central-difference gradient of a scalar function.
pub(crate) fn central_gradient<F>(x: &Vector, rel: f64, f: F) -> Vector
where
    F: Fn(&Vector) -> f64,
{
    let mut g = Vector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let s = fd_step(rel, x[i]);
        xp[i] = x[i] + s;
        let fp = f(&xp);
        xp[i] = x[i] - s;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * s);
    }
    g
}

/// Central-difference Jacobian of a vector function, `rows x x.len()`.
pub(crate) fn central_jacobian<F>(x: &Vector, rows: usize, rel: f64, f: F) -> Matrix
where
    F: Fn(&Vector) -> Vector,
{
    let mut jac = Matrix::zeros(rows, x.len());
    let mut xp = x.clone();
    for j in 0..x.len() {
        let s = fd_step(rel, x[j]);
        xp[j] = x[j] + s;
        let fp = f(&xp);
        xp[j] = x[j] - s;
        let fm = f(&xp);
        xp[j] = x[j];
        jac.set_column(j, &((fp - fm) / (2.0 * s)));
    }
    jac
}

/// Error-free transform of `a + b` into `(sum, err)` with `sum + err == a + b` exactly.
#[inline]
pub(crate) fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Compensated dot product: error-free products via fused multiply-add and
/// two-sum accumulation of the rounding errors.
pub(crate) fn dot2<I>(terms: I) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut s = 0.0;
    let mut c = 0.0;
    for (a, b) in terms {
        let p = a * b;
        let pe = a.mul_add(b, -p);
        let (t, se) = two_sum(s, p);
        s = t;
        c += pe + se;
    }
    s + c
}

/// Max-norm of a vector. Zero for empty vectors.
#[inline]
pub(crate) fn max_abs(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Singular values sorted in descending order.
pub(crate) fn sorted_singular_values(a: &Matrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    s
}
