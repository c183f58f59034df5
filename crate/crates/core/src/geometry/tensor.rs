use std::sync::Arc;

use super::chart::CoordinateChart;
use crate::error::Result;
use crate::expr::{EvalPoint, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Upper,
    Lower,
}

/// Components of a rank-`r` tensor field, stored row-major over `d^r` slots.
#[derive(Clone, Debug)]
pub struct TensorField {
    chart: Arc<CoordinateChart>,
    variance: Vec<Variance>,
    comps: Vec<Expr>,
    symmetries: Vec<(usize, usize)>,
}

impl TensorField {
    pub fn new(chart: Arc<CoordinateChart>, variance: Vec<Variance>, comps: Vec<Expr>) -> Self {
        assert_eq!(comps.len(), chart.dim().pow(variance.len() as u32), "component count does not match rank");
        TensorField { chart, variance, comps, symmetries: Vec::new() }
    }

    pub fn from_fn(chart: Arc<CoordinateChart>, variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let d = chart.dim();
        let rank = variance.len();
        let total = d.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut comps = Vec::with_capacity(total);
        for flat in 0..total {
            unflatten(flat, d, &mut idx);
            comps.push(f(&idx));
        }
        TensorField::new(chart, variance, comps)
    }

    pub fn scalar(chart: Arc<CoordinateChart>, value: Expr) -> Self {
        TensorField::new(chart, Vec::new(), vec![value])
    }

    /// Declares that slots `a` and `b` are symmetric; see [`Self::symmetry_defect`].
    pub fn with_symmetry(mut self, a: usize, b: usize) -> Self {
        self.symmetries.push((a, b));
        self
    }

    pub fn chart(&self) -> &Arc<CoordinateChart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim() + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.comps[self.flat_index(idx)]
    }

    pub fn is_identically_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField {
            chart: self.chart.clone(),
            variance: self.variance.clone(),
            comps: self.comps.iter().map(f).collect(),
            symmetries: self.symmetries.clone(),
        }
    }

    /// Componentwise `self - other`; shapes must agree.
    pub fn sub(&self, other: &TensorField) -> TensorField {
        assert_eq!(self.variance, other.variance, "tensor shapes differ");
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect();
        TensorField::new(self.chart.clone(), self.variance.clone(), comps)
    }

    pub fn eval(&self, p: &EvalPoint) -> Result<Vec<f64>> {
        self.comps.iter().map(|c| c.eval(p).map_err(Into::into)).collect()
    }

    /// Largest absolute component over all points.
    pub fn max_abs(&self, points: &[EvalPoint]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in points {
            for c in &self.comps {
                if c.is_zero() {
                    continue;
                }
                worst = worst.max(c.eval(p)?.abs());
            }
        }
        Ok(worst)
    }

    /// Largest violation of the declared slot symmetries over `points`.
    pub fn symmetry_defect(&self, points: &[EvalPoint]) -> Result<f64> {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        let mut idx = vec![0usize; self.rank()];
        for p in points {
            let vals = self.eval(p)?;
            for &(a, b) in &self.symmetries {
                for flat in 0..vals.len() {
                    unflatten(flat, d, &mut idx);
                    idx.swap(a, b);
                    let other = self.flat_index(&idx);
                    worst = worst.max((vals[flat] - vals[other]).abs());
                }
            }
        }
        Ok(worst)
    }
}

pub(crate) fn unflatten(mut flat: usize, d: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % d;
        flat /= d;
    }
}
