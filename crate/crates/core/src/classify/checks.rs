//! Indicator checks used by the pipeline.

use nalgebra::DMatrix;

use super::frame::{build_null_frame, build_orthonormal_frame};
use crate::error::{Error, Result};
use crate::expr::EvalPoint;
use crate::geometry::{gradient, hessian, ricci, MetricField, SamplePlan};
use crate::linalg::{self, ls_matrix_scalar, ls_scalar};
use crate::qe::{self, Isotropy, PotentialData, CRITICAL_GRADIENT};

#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceCheck {
    /// Max component of `hes_f(∂_j) − ω_j ∇f` over columns and points.
    pub residual: f64,
    /// Max `|ω(U) − (μ − ρ(U,U))|`.
    pub omega_u_deviation: f64,
    /// Per regular point, `[ω(U), ω(V), ω(E_1), …]` in the null frame.
    pub omega_samples: Vec<Vec<f64>>,
}

/// `∇_X ∇f = ω(X) ∇f` with least-squares `ω`; needs a null gradient.
pub fn recurrence_check(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<RecurrenceCheck> {
    let points = qe::sample(g, p, plan)?;
    if let iso @ (Isotropy::NonIsotropic { .. } | Isotropy::Indeterminate { .. }) = qe::isotropy(g, p, &points)? {
        return Err(Error::Precondition(format!("recurrence needs a null gradient; potential is {}", iso.label())));
    }
    recurrence_at(g, p, &points)
}

pub fn recurrence_at(g: &MetricField, p: &PotentialData, points: &[EvalPoint]) -> Result<RecurrenceCheck> {
    let hes = hessian(&p.f, g);
    let grad = gradient(&p.f, g);
    let rho = ricci(g);
    let mut out = RecurrenceCheck { residual: 0.0, omega_u_deviation: 0.0, omega_samples: Vec::new() };
    for pt in points {
        let v = linalg::vector_at(&grad, pt)?;
        if v.amax() <= CRITICAL_GRADIENT {
            continue;
        }
        let gm = g.matrix_at(pt)?;
        let op = g.inverse_at(pt)? * linalg::matrix_at(&hes, pt)?;
        let mut omega = Vec::with_capacity(g.dim());
        for j in 0..g.dim() {
            let col = op.column(j).into_owned();
            let w = ls_scalar(&v, &col).unwrap_or(0.0);
            out.residual = out.residual.max((col - w * &v).amax());
            omega.push(w);
        }
        let frame = build_null_frame(&gm, &v)?;
        let omega_of = |x: &nalgebra::DVector<f64>| x.iter().zip(&omega).map(|(a, b)| a * b).sum::<f64>();
        let rho_m = linalg::matrix_at(&rho, pt)?;
        let rho_uu = (frame.u.transpose() * &rho_m * &frame.u)[(0, 0)];
        let wu = omega_of(&frame.u);
        out.omega_u_deviation = out.omega_u_deviation.max((wu - (p.mu - rho_uu)).abs());
        let mut sample = vec![wu, omega_of(&frame.v)];
        sample.extend(frame.e.iter().map(omega_of));
        out.omega_samples.push(sample);
    }
    Ok(out)
}

/// Max `|Ric ∘ Ric|` with `Ric = g⁻¹ ρ`.
pub fn nilpotency_check(g: &MetricField, plan: &SamplePlan) -> Result<f64> {
    nilpotency_at(g, &plan.points(g, &[])?)
}

pub fn nilpotency_at(g: &MetricField, points: &[EvalPoint]) -> Result<f64> {
    let rho = ricci(g);
    let mut worst: f64 = 0.0;
    for pt in points {
        let ric = g.inverse_at(pt)? * linalg::matrix_at(&rho, pt)?;
        worst = worst.max(linalg::max_abs(&(&ric * &ric)));
    }
    Ok(worst)
}

/// Deviation of `Hes_f` on `∇f^⊥` from a multiple of `g`, per point
/// least squares; needs a non-null gradient.
pub fn umbilicity_check(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<f64> {
    let points = qe::sample(g, p, plan)?;
    if let Isotropy::Isotropic { .. } = qe::isotropy(g, p, &points)? {
        return Err(Error::Precondition("umbilicity needs a non-null gradient".into()));
    }
    umbilicity_at(g, p, &points)
}

pub fn umbilicity_at(g: &MetricField, p: &PotentialData, points: &[EvalPoint]) -> Result<f64> {
    let hes = hessian(&p.f, g);
    let grad = gradient(&p.f, g);
    let mut worst: f64 = 0.0;
    for pt in points {
        let v = linalg::vector_at(&grad, pt)?;
        if v.amax() <= CRITICAL_GRADIENT {
            continue;
        }
        let gm = g.matrix_at(pt)?;
        let (_, e) = build_orthonormal_frame(&gm, &v)?;
        let h = linalg::matrix_at(&hes, pt)?;
        let k = e.len();
        let a = DMatrix::from_fn(k, k, |i, j| (e[i].transpose() * &h * &e[j])[(0, 0)]);
        let b = DMatrix::from_fn(k, k, |i, j| (e[i].transpose() * &gm * &e[j])[(0, 0)]);
        let sigma = ls_matrix_scalar(&a, &b).unwrap_or(0.0);
        worst = worst.max(linalg::max_abs(&(a - sigma * b)));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::expr::{parse_with, Expr};

    #[test]
    fn isotropic_golden_recurrence() {
        let case = corpus::isotropic_ppwave();
        let r = recurrence_check(&case.metric, &case.potential, &case.plan).unwrap();
        assert!(r.residual < 1e-10 && r.omega_u_deviation < 1e-8);
        assert!(r.omega_samples.iter().flatten().all(|w| w.abs() < 1e-12));
        assert!(nilpotency_check(&case.metric, &case.plan).unwrap() < 1e-12);
    }

    #[test]
    fn recurrence_with_nonzero_omega() {
        // f = −log(cosh(u)) solves f'' − f'² + ρ_uu = 0 for ρ_uu = 1.
        let spec = crate::PpWaveSpec::parse(1, "-x1^2").unwrap();
        let f = -parse_with("log(cosh(u))", &["u"]).unwrap();
        let p = PotentialData::new(f, 1.0).with_lambda(0.0);
        let g = spec.metric();
        let r = recurrence_check(&g, &p, &SamplePlan::new()).unwrap();
        assert!(r.residual < 1e-10 && r.omega_u_deviation < 1e-8, "{r:?}");
        assert!(r.omega_samples.iter().any(|w| w[0].abs() > 1e-3));
    }

    #[test]
    fn constant_potential_is_trivially_recurrent() {
        let g = corpus::minkowski(3);
        let p = PotentialData::new(Expr::int(4), 1.0);
        assert_eq!(recurrence_check(&g, &p, &SamplePlan::new()).unwrap().residual, 0.0);
        assert_eq!(umbilicity_check(&g, &p, &SamplePlan::new()).unwrap(), 0.0);
    }

    #[test]
    fn de_sitter_checks() {
        let case = corpus::de_sitter_qe(1, 1.0);
        assert!(matches!(recurrence_check(&case.metric, &case.potential, &case.plan), Err(Error::Precondition(_))));
        assert!(umbilicity_check(&case.metric, &case.potential, &case.plan).unwrap() < 1e-9);
        assert!((nilpotency_check(&case.metric, &case.plan).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn non_umbilical_level_sets() {
        let g = corpus::minkowski(3);
        let f = parse_with("x1^2 + x2", &["x1", "x2"]).unwrap();
        let dev = umbilicity_check(&g, &PotentialData::new(f, 1.0), &SamplePlan::new()).unwrap();
        assert!(dev > 1e-3, "{dev}");
    }
}
