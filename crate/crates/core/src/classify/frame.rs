//! Pointwise adapted frames.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qe::{CRITICAL_GRADIENT, ISOTROPIC_TOLERANCE};

/// `{U, V, E_1..E_n}` with `g(U,V) = 1`, `U, V` null, `E_i` orthonormal and
/// orthogonal to both.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub e: Vec<DVector<f64>>,
}

fn ip(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a.transpose() * g * b)[(0, 0)]
}

impl Frame {
    /// Max deviation of the Gram matrix from the null-frame pairings.
    pub fn gram_residual(&self, g: &DMatrix<f64>) -> f64 {
        let mut worst = (ip(g, &self.u, &self.v) - 1.0)
            .abs()
            .max(ip(g, &self.u, &self.u).abs())
            .max(ip(g, &self.v, &self.v).abs());
        for (i, ei) in self.e.iter().enumerate() {
            worst = worst.max(ip(g, ei, &self.u).abs()).max(ip(g, ei, &self.v).abs());
            for (j, ej) in self.e.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip(g, ei, ej) - target).abs());
            }
        }
        worst
    }
}

/// Null frame with `V = ∇f` (not rescaled), given the metric matrix and
/// the gradient vector at a point.
pub fn build_null_frame(g: &DMatrix<f64>, grad: &DVector<f64>) -> Result<Frame> {
    let d = g.nrows();
    if grad.amax() <= CRITICAL_GRADIENT {
        return Err(Error::CriticalPotential);
    }
    let vv = ip(g, grad, grad);
    if vv.abs() > ISOTROPIC_TOLERANCE {
        return Err(Error::Precondition(format!("gradient is not null: g(grad f, grad f) = {vv:e}")));
    }
    let v = grad.clone();
    let basis = |k: usize| DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 });
    // Coordinate vector pairing most strongly with V.
    let k = (0..d)
        .max_by(|&a, &b| ip(g, &v, &basis(a)).abs().total_cmp(&ip(g, &v, &basis(b)).abs()))
        .expect("d >= 3");
    let w = basis(k) / ip(g, &v, &basis(k));
    let u = &w - 0.5 * ip(g, &w, &w) * &v;
    let mut e: Vec<DVector<f64>> = Vec::new();
    for k in 0..d {
        if e.len() == d - 2 {
            break;
        }
        let x = basis(k);
        let mut y = &x - ip(g, &x, &v) * &u - ip(g, &x, &u) * &v;
        for ej in &e {
            y -= ip(g, &y, ej) * ej;
        }
        let norm = ip(g, &y, &y);
        if norm > 1e-10 {
            e.push(y / norm.sqrt());
        }
    }
    if e.len() != d - 2 {
        return Err(Error::Precondition("could not complete the null frame".into()));
    }
    Ok(Frame { u, v, e })
}

/// `{∇f/‖∇f‖, E_1..E_{n+1}}` with `g(E_i,E_j) = ±δ_ij`; returns the unit
/// normal and the completion of its orthogonal complement.
pub fn build_orthonormal_frame(g: &DMatrix<f64>, grad: &DVector<f64>) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
    let d = g.nrows();
    let nn = ip(g, grad, grad);
    if nn.abs() <= ISOTROPIC_TOLERANCE {
        return Err(Error::Precondition("gradient is null; no unit normal".into()));
    }
    let eps = nn.signum();
    let v = grad / nn.abs().sqrt();
    let mut e: Vec<(DVector<f64>, f64)> = Vec::new();
    for k in 0..d {
        if e.len() == d - 1 {
            break;
        }
        let x = DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 });
        let mut y = &x - eps * ip(g, &x, &v) * &v;
        for (ej, sj) in &e {
            y -= *sj * ip(g, &y, ej) * ej;
        }
        let norm = ip(g, &y, &y);
        if norm.abs() > 1e-10 {
            e.push((y / norm.abs().sqrt(), norm.signum()));
        }
    }
    if e.len() != d - 1 {
        return Err(Error::Precondition("could not complete the orthonormal frame".into()));
    }
    Ok((v, e.into_iter().map(|(x, _)| x).collect()))
}
