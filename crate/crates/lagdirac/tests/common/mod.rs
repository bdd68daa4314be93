#![allow(dead_code)]

use lagdirac::Vector;

pub fn max_diff(a: &Vector, b: &Vector) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

#[track_caller]
pub fn assert_vec_close(a: &Vector, b: &Vector, tol: f64) {
    let d = max_diff(a, b);
    assert!(d <= tol, "vectors differ by {d:e} (tol {tol:e}):\n  {:?}\n  {:?}", a.as_slice(), b.as_slice());
}

#[track_caller]
pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!((a - b).abs() <= tol, "{a} vs {b} differ by {:e} (tol {tol:e})", (a - b).abs());
}

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}
pub mod props;
