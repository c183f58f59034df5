//! Small numeric helpers for per-point checks.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::expr::EvalPoint;
use crate::geometry::TensorField;

/// Cutoff below which a normal-equation denominator is treated as zero.
pub(crate) const PINV_CUTOFF: f64 = 1e-12;

pub(crate) fn matrix_at(t: &TensorField, p: &EvalPoint) -> Result<DMatrix<f64>> {
    debug_assert_eq!(t.rank(), 2);
    let d = t.dim();
    Ok(DMatrix::from_row_slice(d, d, &t.eval(p)?))
}

pub(crate) fn vector_at(t: &TensorField, p: &EvalPoint) -> Result<DVector<f64>> {
    debug_assert_eq!(t.rank(), 1);
    Ok(DVector::from_vec(t.eval(p)?))
}

/// The `c` minimising `|w − c v|`, or `None` if `v` is numerically zero.
pub(crate) fn ls_scalar(v: &DVector<f64>, w: &DVector<f64>) -> Option<f64> {
    let vv = v.dot(v);
    (vv > PINV_CUTOFF).then(|| v.dot(w) / vv)
}

/// Least-squares `σ` in `A ≈ σ B` (Frobenius), or `None` if `B` vanishes.
pub(crate) fn ls_matrix_scalar(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    let bb = b.dot(b);
    (bb > PINV_CUTOFF).then(|| b.dot(a) / bb)
}

/// Orthonormal (Euclidean) basis of the column space of `m`.
pub(crate) fn column_space(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let cutoff = PINV_CUTOFF * smax.max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(i, _)| u.column(i).into_owned())
        .collect()
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

pub(crate) fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_scalars() {
        let v = DVector::from_vec(vec![1.0, 2.0]);
        let w = DVector::from_vec(vec![3.0, 6.0]);
        assert_eq!(ls_scalar(&v, &w), Some(3.0));
        assert_eq!(ls_scalar(&DVector::zeros(2), &w), None);
        let b = DMatrix::identity(2, 2);
        assert_eq!(ls_matrix_scalar(&(b.clone() * 2.5), &b), Some(2.5));
    }

    #[test]
    fn column_space_rank() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let basis = column_space(&m);
        assert_eq!(basis.len(), 1);
        assert!((basis[0][1].abs() - 1.0).abs() < 1e-14);
        assert!(column_space(&DMatrix::zeros(3, 3)).is_empty());
    }
}
