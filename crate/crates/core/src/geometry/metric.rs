use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use super::chart::CoordinateChart;
use super::tensor::{TensorField, Variance};
use crate::error::{Error, Result};
use crate::expr::{EvalPoint, Expr};

/// Symmetric `d×d` metric components with a symbolic inverse.
#[derive(Clone, Debug)]
pub struct MetricField {
    chart: Arc<CoordinateChart>,
    g: Vec<Expr>,
    inv: Vec<Expr>,
    det: Expr,
    pub(crate) cache: CurvatureCache,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct CurvatureCache {
    pub christoffel: OnceLock<TensorField>,
    pub riemann_operator: OnceLock<TensorField>,
    pub riemann: OnceLock<TensorField>,
    pub ricci: OnceLock<TensorField>,
    pub scalar: OnceLock<Expr>,
}

impl MetricField {
    /// Builds a metric from full rows; component `(i, j)` must structurally equal `(j, i)`.
    pub fn new(chart: CoordinateChart, rows: Vec<Vec<Expr>>) -> Result<Self> {
        let d = chart.dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(Error::Metric(format!("expected a {d}x{d} component matrix")));
        }
        for i in 0..d {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::Metric(format!(
                        "components ({}, {}) and ({}, {}) differ: `{}` vs `{}`",
                        chart.coord(i),
                        chart.coord(j),
                        chart.coord(j),
                        chart.coord(i),
                        rows[i][j],
                        rows[j][i]
                    )));
                }
            }
        }
        let g: Vec<Expr> = rows.into_iter().flatten().collect();
        let (det, inv) = symbolic_inverse(&g, d);
        if det.is_zero() {
            return Err(Error::Metric("determinant vanishes identically".into()));
        }
        Ok(MetricField { chart: Arc::new(chart), g, inv, det, cache: CurvatureCache::default() })
    }

    /// Diagonal metric `diag(entries)`.
    pub fn diagonal(chart: CoordinateChart, entries: Vec<Expr>) -> Result<Self> {
        let d = entries.len();
        let rows = (0..d)
            .map(|i| (0..d).map(|j| if i == j { entries[i].clone() } else { Expr::zero() }).collect())
            .collect();
        MetricField::new(chart, rows)
    }

    /// `factor · g` on the same chart.
    pub fn scaled(&self, factor: &Expr) -> Result<Self> {
        let d = self.dim();
        let rows = (0..d).map(|i| (0..d).map(|j| factor * self.component(i, j)).collect()).collect();
        MetricField::new((*self.chart).clone(), rows)
    }

    /// Same components with empty curvature caches.
    pub fn clone_uncached(&self) -> Self {
        MetricField { cache: CurvatureCache::default(), ..self.clone() }
    }

    pub fn chart(&self) -> &Arc<CoordinateChart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn n(&self) -> usize {
        self.chart.n()
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.g[i * self.dim() + j]
    }

    pub fn inverse(&self, i: usize, j: usize) -> &Expr {
        &self.inv[i * self.dim() + j]
    }

    pub fn determinant(&self) -> &Expr {
        &self.det
    }

    pub fn as_tensor(&self) -> TensorField {
        TensorField::new(self.chart.clone(), vec![Variance::Lower; 2], self.g.clone()).with_symmetry(0, 1)
    }

    pub fn inverse_tensor(&self) -> TensorField {
        TensorField::new(self.chart.clone(), vec![Variance::Upper; 2], self.inv.clone()).with_symmetry(0, 1)
    }

    /// Every component expression, metric first then inverse.
    pub fn expressions(&self) -> impl Iterator<Item = &Expr> {
        self.g.iter().chain(self.inv.iter())
    }

    pub fn matrix_at(&self, p: &EvalPoint) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let vals: Vec<f64> = self.g.iter().map(|e| e.eval(p)).collect::<Result<_, _>>()?;
        Ok(DMatrix::from_row_slice(d, d, &vals))
    }

    pub fn inverse_at(&self, p: &EvalPoint) -> Result<DMatrix<f64>> {
        let d = self.dim();
        let vals: Vec<f64> = self.inv.iter().map(|e| e.eval(p)).collect::<Result<_, _>>()?;
        Ok(DMatrix::from_row_slice(d, d, &vals))
    }

    /// Counts of (negative, near-zero, positive) eigenvalues at `p`.
    pub fn signature_at(&self, p: &EvalPoint) -> Result<(usize, usize, usize)> {
        let m = self.matrix_at(p)?;
        let eig = m.symmetric_eigen();
        let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let mut sig = (0, 0, 0);
        for &v in eig.eigenvalues.iter() {
            if v.abs() <= 1e-12 * scale {
                sig.1 += 1;
            } else if v < 0.0 {
                sig.0 += 1;
            } else {
                sig.2 += 1;
            }
        }
        Ok(sig)
    }
}

/// Determinant and inverse by cofactor expansion, skipping structural zeros.
fn symbolic_inverse(g: &[Expr], d: usize) -> (Expr, Vec<Expr>) {
    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || g[i * d + j].is_zero()));
    if diagonal {
        let det = Expr::product((0..d).map(|i| g[i * d + i].clone()));
        let inv = (0..d * d)
            .map(|k| if k / d == k % d { g[k].clone().recip() } else { Expr::zero() })
            .collect();
        return (det, inv);
    }
    let mut memo = HashMap::new();
    let all = (1u32 << d) - 1;
    let det = minor_det(g, d, all, all, &mut memo);
    let inv_det = det.clone().recip();
    let mut inv = vec![Expr::zero(); d * d];
    for i in 0..d {
        for j in i..d {
            // inv[i][j] = cofactor(j, i) / det
            let m = minor_det(g, d, all & !(1 << j), all & !(1 << i), &mut memo);
            if m.is_zero() {
                continue;
            }
            let sign = if (i + j) % 2 == 0 { Expr::one() } else { Expr::int(-1) };
            let e = Expr::product([sign, m, inv_det.clone()]);
            inv[i * d + j] = e.clone();
            inv[j * d + i] = e;
        }
    }
    (det, inv)
}

/// Determinant of the submatrix on the given row and column bitmasks.
fn minor_det(g: &[Expr], d: usize, rows: u32, cols: u32, memo: &mut HashMap<(u32, u32), Expr>) -> Expr {
    if rows == 0 {
        return Expr::one();
    }
    if let Some(e) = memo.get(&(rows, cols)) {
        return e.clone();
    }
    let r = rows.trailing_zeros() as usize;
    let mut terms = Vec::new();
    let mut position = 0;
    for c in 0..d {
        if cols & (1 << c) == 0 {
            continue;
        }
        let entry = &g[r * d + c];
        if !entry.is_zero() {
            let sub = minor_det(g, d, rows & !(1 << r), cols & !(1 << c), memo);
            if !sub.is_zero() {
                let sign = if position % 2 == 0 { Expr::one() } else { Expr::int(-1) };
                terms.push(Expr::product([sign, entry.clone(), sub]));
            }
        }
        position += 1;
    }
    let det = Expr::sum(terms);
    memo.insert((rows, cols), det.clone());
    det
}
