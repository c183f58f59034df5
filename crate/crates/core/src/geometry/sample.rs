use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metric::MetricField;
use crate::error::{Error, Result};
use crate::expr::{EvalPoint, Expr};

/// Default seed of every sample plan.
pub const DEFAULT_SEED: u64 = 0x0E17;
pub const DEFAULT_POINT_COUNT: usize = 12;
/// Absolute tolerance on residual components.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_INTERVAL: (f64, f64) = (-2.0, 2.0);
/// Points with `|det g|` below this are resampled.
pub const DEGENERATE_DET: f64 = 1e-12;
pub const MAX_REJECTIONS: usize = 100;

/// Deterministic sample points for numeric certification.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
    /// Per-coordinate sampling intervals; coordinates not listed use the
    /// chart box or [`DEFAULT_INTERVAL`].
    pub intervals: BTreeMap<String, (f64, f64)>,
    pub tolerance: f64,
    /// Values bound to expression parameters at every point.
    pub params: BTreeMap<String, f64>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            count: DEFAULT_POINT_COUNT,
            seed: DEFAULT_SEED,
            intervals: BTreeMap::new(),
            tolerance: DEFAULT_TOLERANCE,
            params: BTreeMap::new(),
        }
    }
}

impl SamplePlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_interval(mut self, coord: &str, lo: f64, hi: f64) -> Self {
        self.intervals.insert(coord.to_string(), (lo, hi));
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    /// Same plan with every listed interval shifted by `delta`.
    pub fn translated(&self, coord: &str, delta: f64) -> Self {
        let mut plan = self.clone();
        let (lo, hi) = plan.intervals.get(coord).copied().unwrap_or(DEFAULT_INTERVAL);
        plan.intervals.insert(coord.to_string(), (lo + delta, hi + delta));
        plan
    }

    fn interval(&self, g: &MetricField, i: usize) -> (f64, f64) {
        let name = g.chart().coord(i);
        let wanted = self.intervals.get(name).copied().unwrap_or_else(|| {
            g.chart().bounds().map(|b| b[i]).unwrap_or(DEFAULT_INTERVAL)
        });
        match g.chart().bounds() {
            Some(b) => (wanted.0.max(b[i].0), wanted.1.min(b[i].1)),
            None => wanted,
        }
    }

    /// Draws `count` points where the metric and every guard expression
    /// evaluate, the metric is non-degenerate and Lorentzian.
    ///
    /// Points failing evaluation or the determinant test are redrawn; more
    /// than [`MAX_REJECTIONS`] redraws is an error. A point with a
    /// non-Lorentzian signature is an error outright.
    pub fn points(&self, g: &MetricField, guards: &[Expr]) -> Result<Vec<EvalPoint>> {
        let d = g.dim();
        let intervals: Vec<(f64, f64)> = (0..d).map(|i| self.interval(g, i)).collect();
        if let Some(((lo, hi), name)) = intervals.iter().zip(g.chart().coords()).find(|((lo, hi), _)| !(lo < hi)) {
            return Err(Error::Sampling(format!("empty sampling interval [{lo}, {hi}] for '{name}'")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut points = Vec::with_capacity(self.count);
        let mut rejections = 0;
        while points.len() < self.count {
            let values: Vec<f64> = intervals.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
            let p = EvalPoint::from_coords(g.chart().coords(), &values).with_params(&self.params);
            match self.accept(g, guards, &p) {
                Ok(true) => points.push(p),
                Ok(false) => {
                    rejections += 1;
                    if rejections > MAX_REJECTIONS {
                        return Err(Error::Sampling(format!(
                            "more than {MAX_REJECTIONS} rejected sample points; last candidate {p}"
                        )));
                    }
                }
                Err(e) => return Err(e),
            }
        }
        Ok(points)
    }

    fn accept(&self, g: &MetricField, guards: &[Expr], p: &EvalPoint) -> Result<bool> {
        let (m, inv) = match (g.matrix_at(p), g.inverse_at(p)) {
            (Ok(m), Ok(inv)) => (m, inv),
            (Err(Error::Expr(crate::error::ExprError::Domain { .. })), _) | (_, Err(Error::Expr(crate::error::ExprError::Domain { .. }))) => {
                return Ok(false)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        for guard in guards {
            match guard.eval(p) {
                Ok(_) => {}
                Err(crate::error::ExprError::Domain { .. }) => return Ok(false),
                Err(e) => return Err(e.into()),
            }
        }
        if m.determinant().abs() < DEGENERATE_DET {
            return Ok(false);
        }
        let d = g.dim();
        let scale = 1.0f64.max(m.abs().max() * inv.abs().max());
        if (&m * &inv - DMatrix::identity(d, d)).abs().max() > 1e-10 * scale {
            return Err(Error::Metric(format!("g * g^-1 differs from the identity at {p}")));
        }
        let (neg, zero, _) = g.signature_at(p)?;
        if neg != 1 || zero != 0 {
            return Err(Error::Metric(format!("signature is not Lorentzian at {p} ({neg} negative eigenvalues)")));
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_with;
    use crate::geometry::CoordinateChart;

    fn minkowski() -> MetricField {
        let chart = CoordinateChart::new(&["t", "x", "y"]).unwrap();
        MetricField::diagonal(chart, vec![Expr::int(-1), Expr::one(), Expr::one()]).unwrap()
    }

    #[test]
    fn points_are_deterministic_and_inside_intervals() {
        let g = minkowski();
        let plan = SamplePlan::new().with_interval("t", 0.5, 1.0);
        let a = plan.points(&g, &[]).unwrap();
        let b = plan.points(&g, &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), DEFAULT_POINT_COUNT);
        for p in &a {
            let t = p.coord("t").unwrap();
            assert!((0.5..1.0).contains(&t));
            assert!((-2.0..2.0).contains(&p.coord("x").unwrap()));
        }
        let other = plan.clone().with_seed(7).points(&g, &[]).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn guards_reject_points_outside_their_domain() {
        let g = minkowski();
        let guard = parse_with("log(x)", &["x"]).unwrap();
        let pts = SamplePlan::new().points(&g, &[guard]).unwrap();
        assert!(pts.iter().all(|p| p.coord("x").unwrap() > 0.0));
    }

    #[test]
    fn gives_up_after_too_many_rejections() {
        let g = minkowski();
        let guard = parse_with("log(x)", &["x"]).unwrap();
        let plan = SamplePlan::new().with_interval("x", -3.0, -1.0);
        assert!(matches!(plan.points(&g, &[guard]), Err(Error::Sampling(_))));
    }

    #[test]
    fn riemannian_metric_is_rejected() {
        let chart = CoordinateChart::new(&["t", "x", "y"]).unwrap();
        let g = MetricField::diagonal(chart, vec![Expr::one(), Expr::one(), Expr::one()]).unwrap();
        assert!(matches!(SamplePlan::new().points(&g, &[]), Err(Error::Metric(_))));
    }
}
