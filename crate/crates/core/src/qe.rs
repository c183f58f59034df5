//! Quasi-Einstein residuals `Q = ρ + Hes_f − μ df⊗df − λ g` and the scalar
//! identities every quasi-Einstein quadruple satisfies.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::expr::{EvalPoint, Expr};
use crate::geometry::{
    differential, grad_norm_sq, gradient, hessian, laplacian, ricci, riemann, scalar_curvature, MetricField,
    SamplePlan, TensorField, Variance,
};
use crate::linalg::{self, ls_scalar};

/// `‖∇f‖²` below this at every point (with `∇f ≠ 0` somewhere) is isotropic.
pub const ISOTROPIC_TOLERANCE: f64 = 1e-10;
/// `|‖∇f‖²|` above this at every point is non-isotropic.
pub const NON_ISOTROPIC_FLOOR: f64 = 1e-6;
/// Max-norm of `df` below which a point is treated as critical.
pub const CRITICAL_GRADIENT: f64 = 1e-12;
/// Allowed mismatch `|μ + 1/m|` when both are given.
pub const BAKRY_EMERY_TOLERANCE: f64 = 1e-12;

/// The potential `f`, the constant `μ`, and optionally `λ` and `m = −1/μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialData {
    pub f: Expr,
    pub mu: f64,
    pub lambda: Option<f64>,
    pub m: Option<f64>,
}

impl PotentialData {
    pub fn new(f: Expr, mu: f64) -> Self {
        PotentialData { f, mu, lambda: None, m: None }
    }

    /// From the Bakry–Emery dimension `m`, so `μ = −1/m`.
    pub fn from_m(f: Expr, m: f64) -> Result<Self> {
        PotentialData::new(f, -1.0 / m).with_m(m)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_m(mut self, m: f64) -> Result<Self> {
        if m == 0.0 || (self.mu + 1.0 / m).abs() > BAKRY_EMERY_TOLERANCE {
            return Err(Error::Precondition(format!("m = {m} is inconsistent with mu = {}", self.mu)));
        }
        self.m = Some(m);
        Ok(self)
    }

    /// Same data with `f + c`.
    pub fn shifted(&self, c: f64) -> Self {
        PotentialData { f: &self.f + Expr::real(c), ..self.clone() }
    }
}

/// `ρ + Hes_f − μ df⊗df − λ g` as a symbolic tensor.
pub fn qe_tensor(g: &MetricField, p: &PotentialData, lambda: f64) -> TensorField {
    let rho = ricci(g);
    let hes = hessian(&p.f, g);
    let df = differential(&p.f, g);
    let mu = Expr::real(p.mu);
    let lam = Expr::real(lambda);
    TensorField::from_fn(g.chart().clone(), vec![Variance::Lower; 2], |idx| {
        let (i, j) = (idx[0], idx[1]);
        Expr::sum([
            rho.get(idx).clone(),
            hes.get(idx).clone(),
            -Expr::product([mu.clone(), df.get(&[i]).clone(), df.get(&[j]).clone()]),
            -(&lam * g.component(i, j)),
        ])
    })
    .with_symmetry(0, 1)
}

/// `Q` and its max component norm over the plan's points; needs `λ`.
pub fn qe_residual(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<(TensorField, f64)> {
    let lambda = p.lambda.ok_or_else(|| Error::Precondition("lambda is required; solve it first".into()))?;
    let points = sample(g, p, plan)?;
    let q = qe_tensor(g, p, lambda);
    let norm = q.max_abs(&points)?;
    Ok((q, norm))
}

/// Points of `plan` on which the metric and the potential evaluate.
pub fn sample(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<Vec<EvalPoint>> {
    plan.points(g, std::slice::from_ref(&p.f))
}

/// Pointwise values of `(τ + Δf − μ‖∇f‖²)/(n+2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaEstimate {
    pub mean: f64,
    /// `max − min` over the samples.
    pub spread: f64,
    pub samples: Vec<f64>,
}

pub fn lambda_expr(g: &MetricField, p: &PotentialData) -> Expr {
    let d = g.dim() as i64;
    Expr::ratio(1, d)
        * Expr::sum([scalar_curvature(g), laplacian(&p.f, g), -(Expr::real(p.mu) * grad_norm_sq(&p.f, g))])
}

pub fn lambda_samples(g: &MetricField, p: &PotentialData, points: &[EvalPoint]) -> Result<LambdaEstimate> {
    let e = lambda_expr(g, p);
    let samples: Vec<f64> = points.iter().map(|pt| e.eval(pt)).collect::<Result<_, _>>()?;
    let mean = samples.iter().sum::<f64>() / samples.len().max(1) as f64;
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let spread = if samples.is_empty() { 0.0 } else { hi - lo };
    Ok(LambdaEstimate { mean, spread, samples })
}

/// `λ` from the trace identity; fails when it is not constant to `plan.tolerance`.
pub fn solve_lambda(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<f64> {
    let est = lambda_samples(g, p, &sample(g, p, plan)?)?;
    if est.spread > plan.tolerance {
        return Err(Error::TraceObstruction { mean: est.mean, spread: est.spread, tolerance: plan.tolerance });
    }
    Ok(est.mean)
}

fn resolve_lambda(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<f64> {
    match p.lambda {
        Some(l) => Ok(l),
        None => solve_lambda(g, p, plan),
    }
}

/// `max |τ + Δf − μ‖∇f‖² − (n+2)λ|`.
pub fn trace_identity_residual(g: &MetricField, p: &PotentialData, lambda: f64, points: &[EvalPoint]) -> Result<f64> {
    let e = lambda_expr(g, p) - Expr::real(lambda);
    let d = g.dim() as f64;
    let mut worst: f64 = 0.0;
    for pt in points {
        worst = worst.max((d * e.eval(pt)?).abs());
    }
    Ok(worst)
}

/// Which right-hand side of the `∇τ` identity to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NablaTauForm {
    /// `2(λ − (n+2)λμ + μ(1−μ)‖∇f‖² + μτ)∇f + (μ−1)∇‖∇f‖²`, the form that
    /// follows from taking the divergence of the equation.
    Derived,
    /// Same with `−μτ` in place of `+μτ`, as sometimes quoted; kept as a
    /// diagnostic only, it fails on de Sitter.
    Printed,
    /// Null-gradient reduction `2(λ − μ((n+2)λ − τ))∇f`.
    Isotropic,
}

/// `dτ − RHS` as a 1-form.
pub fn nabla_tau_defect(g: &MetricField, p: &PotentialData, lambda: f64, form: NablaTauForm) -> TensorField {
    let n2 = Expr::int(g.dim() as i64);
    let tau = scalar_curvature(g);
    let norm = grad_norm_sq(&p.f, g);
    let mu = Expr::real(p.mu);
    let lam = Expr::real(lambda);
    let dtau = differential(&tau, g);
    let df = differential(&p.f, g);
    let dnorm = differential(&norm, g);
    let (coefficient, with_norm) = match form {
        NablaTauForm::Derived | NablaTauForm::Printed => {
            let sign = if form == NablaTauForm::Derived { Expr::one() } else { Expr::int(-1) };
            let c = Expr::sum([
                lam.clone(),
                -Expr::product([n2.clone(), lam.clone(), mu.clone()]),
                Expr::product([mu.clone(), Expr::one() - &mu, norm.clone()]),
                Expr::product([sign, mu.clone(), tau.clone()]),
            ]);
            (c, true)
        }
        NablaTauForm::Isotropic => (&lam - &mu * (&n2 * &lam - &tau), false),
    };
    let coefficient = Expr::int(2) * coefficient;
    TensorField::from_fn(g.chart().clone(), vec![Variance::Lower], |idx| {
        let mut terms = vec![dtau.get(idx).clone(), -(&coefficient * df.get(idx))];
        if with_norm {
            terms.push(-((&mu - Expr::one()) * dnorm.get(idx)));
        }
        Expr::sum(terms)
    })
}

/// Max component of `dτ − RHS` for the derived form of the identity.
pub fn identity_nabla_tau_residual(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<f64> {
    nabla_tau_residual(g, p, plan, NablaTauForm::Derived)
}

pub fn nabla_tau_residual(g: &MetricField, p: &PotentialData, plan: &SamplePlan, form: NablaTauForm) -> Result<f64> {
    let lambda = resolve_lambda(g, p, plan)?;
    nabla_tau_defect(g, p, lambda, form).max_abs(&sample(g, p, plan)?)
}

/// Max over coordinate triples of the deviation in
/// `R(X,Y,Z,∇f) = −X(τ)g(Y,Z)/(2(n+1)) + Y(τ)g(X,Z)/(2(n+1))
///  + μ(Hes_f(X,Z)g(∇f,Y) − Hes_f(Y,Z)g(∇f,X))`,
/// which holds on conformally flat quasi-Einstein manifolds.
pub fn curvature_gradient_relation_residual(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<f64> {
    curvature_gradient_residual_at(g, p, &sample(g, p, plan)?)
}

pub fn curvature_gradient_residual_at(g: &MetricField, p: &PotentialData, points: &[EvalPoint]) -> Result<f64> {
    let d = g.dim();
    let rm = riemann(g);
    let grad = gradient(&p.f, g);
    let df = differential(&p.f, g);
    let hes = hessian(&p.f, g);
    let dtau = differential(&scalar_curvature(g), g);
    let k = 1.0 / (2.0 * (g.n() as f64 + 1.0));
    let mut worst: f64 = 0.0;
    for pt in points {
        let rmv = rm.eval(pt)?;
        let gradv = grad.eval(pt)?;
        let dfv = df.eval(pt)?;
        let dtv = dtau.eval(pt)?;
        let h = linalg::matrix_at(&hes, pt)?;
        let gm = g.matrix_at(pt)?;
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    let base = ((x * d + y) * d + z) * d;
                    let lhs: f64 = (0..d).map(|m| rmv[base + m] * gradv[m]).sum();
                    let rhs = -k * dtv[x] * gm[(y, z)] + k * dtv[y] * gm[(x, z)]
                        + p.mu * (h[(x, z)] * dfv[y] - h[(y, z)] * dfv[x]);
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Causal character of `∇f` over a point set.
#[derive(Clone, Debug, PartialEq)]
pub enum Isotropy {
    /// `|‖∇f‖²| < ISOTROPIC_TOLERANCE` everywhere and `∇f ≠ 0` somewhere.
    Isotropic { max_norm: f64 },
    /// `|‖∇f‖²| > NON_ISOTROPIC_FLOOR` everywhere.
    NonIsotropic { min_abs: f64, timelike: usize, spacelike: usize },
    /// Neither; counts of negative, near-null and positive samples.
    Indeterminate { negative: usize, null: usize, positive: usize },
    /// `∇f` vanishes at every point.
    Critical,
}

impl Isotropy {
    pub fn label(&self) -> &'static str {
        match self {
            Isotropy::Isotropic { .. } => "isotropic",
            Isotropy::NonIsotropic { .. } => "non-isotropic",
            Isotropy::Indeterminate { .. } => "indeterminate",
            Isotropy::Critical => "critical",
        }
    }
}

pub fn isotropy(g: &MetricField, p: &PotentialData, points: &[EvalPoint]) -> Result<Isotropy> {
    let norm = grad_norm_sq(&p.f, g);
    let df = differential(&p.f, g);
    let (mut neg, mut null, mut pos) = (0, 0, 0);
    let (mut max_norm, mut min_abs): (f64, f64) = (0.0, f64::INFINITY);
    let mut any_regular = false;
    for pt in points {
        let v = norm.eval(pt)?;
        let dfv = linalg::vector_at(&df, pt)?;
        any_regular |= linalg::max_abs_vec(&dfv) > CRITICAL_GRADIENT;
        max_norm = max_norm.max(v.abs());
        min_abs = min_abs.min(v.abs());
        if v.abs() <= NON_ISOTROPIC_FLOOR {
            null += 1;
        } else if v < 0.0 {
            neg += 1;
        } else {
            pos += 1;
        }
    }
    Ok(if !any_regular {
        Isotropy::Critical
    } else if max_norm < ISOTROPIC_TOLERANCE {
        Isotropy::Isotropic { max_norm }
    } else if min_abs > NON_ISOTROPIC_FLOOR {
        Isotropy::NonIsotropic { min_abs, timelike: neg, spacelike: pos }
    } else {
        Isotropy::Indeterminate { negative: neg, null, positive: pos }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenvectorCheck {
    pub residual: f64,
    /// Per regular point, the fitted eigenvalue (or `λ` in the null case).
    pub eigenvalues: Vec<f64>,
    /// Points skipped because `∇f = 0` there.
    pub skipped: usize,
    /// Every point was skipped.
    pub critical: bool,
}

/// Tests `Ric(∇f) ∥ ∇f`: least-squares eigenvalue when `∇f` is not null,
/// eigenvalue exactly `λ` when it is.
pub fn ricci_eigenvector_check(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<EigenvectorCheck> {
    let points = sample(g, p, plan)?;
    let iso = isotropy(g, p, &points)?;
    let lambda = match iso {
        Isotropy::Isotropic { .. } => Some(resolve_lambda(g, p, plan)?),
        _ => None,
    };
    eigenvector_check_at(g, p, lambda, &points)
}

/// With `fixed = Some(λ)` the eigenvalue is prescribed, otherwise fitted.
pub fn eigenvector_check_at(
    g: &MetricField,
    p: &PotentialData,
    fixed: Option<f64>,
    points: &[EvalPoint],
) -> Result<EigenvectorCheck> {
    let rho = ricci(g);
    let grad = gradient(&p.f, g);
    let mut out = EigenvectorCheck { residual: 0.0, eigenvalues: Vec::new(), skipped: 0, critical: false };
    for pt in points {
        let v = linalg::vector_at(&grad, pt)?;
        if linalg::max_abs_vec(&v) <= CRITICAL_GRADIENT {
            out.skipped += 1;
            continue;
        }
        let ric = g.inverse_at(pt)? * linalg::matrix_at(&rho, pt)?;
        let w: DVector<f64> = &ric * &v;
        let c = match fixed {
            Some(l) => l,
            None => ls_scalar(&v, &w).unwrap_or(0.0),
        };
        out.residual = out.residual.max(linalg::max_abs_vec(&(w - c * &v)));
        out.eigenvalues.push(c);
    }
    out.critical = out.skipped == points.len();
    Ok(out)
}

/// Everything the `check` pipeline needs from the quasi-Einstein side.
#[derive(Clone, Debug, PartialEq)]
pub struct QeReport {
    pub lambda: f64,
    pub lambda_supplied: bool,
    /// Spread of the pointwise trace estimate of `λ`.
    pub lambda_spread: f64,
    pub qe_residual: f64,
    pub trace_residual: f64,
    pub nabla_tau_residual: f64,
    pub nabla_tau_printed_residual: f64,
    pub nabla_tau_isotropic_residual: Option<f64>,
    pub curvature_gradient_residual: f64,
    pub isotropy: Isotropy,
    pub tau_samples: Vec<f64>,
}

impl QeReport {
    /// Quasi-Einstein to `tolerance`: constant trace estimate and small `Q`.
    pub fn is_qe(&self, tolerance: f64) -> bool {
        (self.lambda_supplied || self.lambda_spread <= tolerance) && self.qe_residual <= tolerance
    }
}

/// Runs every quasi-Einstein check; `λ` is the supplied value or the mean
/// of the trace estimate.
pub fn qe_report(g: &MetricField, p: &PotentialData, plan: &SamplePlan) -> Result<QeReport> {
    let points = sample(g, p, plan)?;
    qe_report_at(g, p, &points)
}

pub fn qe_report_at(g: &MetricField, p: &PotentialData, points: &[EvalPoint]) -> Result<QeReport> {
    let est = lambda_samples(g, p, points)?;
    let lambda = p.lambda.unwrap_or(est.mean);
    let isotropy = isotropy(g, p, points)?;
    let tau = scalar_curvature(g);
    Ok(QeReport {
        lambda,
        lambda_supplied: p.lambda.is_some(),
        lambda_spread: est.spread,
        qe_residual: qe_tensor(g, p, lambda).max_abs(points)?,
        trace_residual: trace_identity_residual(g, p, lambda, points)?,
        nabla_tau_residual: nabla_tau_defect(g, p, lambda, NablaTauForm::Derived).max_abs(points)?,
        nabla_tau_printed_residual: nabla_tau_defect(g, p, lambda, NablaTauForm::Printed).max_abs(points)?,
        nabla_tau_isotropic_residual: match isotropy {
            Isotropy::Isotropic { .. } => {
                Some(nabla_tau_defect(g, p, lambda, NablaTauForm::Isotropic).max_abs(points)?)
            }
            _ => None,
        },
        curvature_gradient_residual: curvature_gradient_residual_at(g, p, points)?,
        isotropy,
        tau_samples: points.iter().map(|pt| tau.eval(pt)).collect::<Result<_, _>>()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn minkowski_with_constant_potential() {
        let g = corpus::minkowski(4);
        let p = PotentialData::new(Expr::zero(), 0.7).with_lambda(0.0);
        let plan = SamplePlan::new();
        assert_eq!(qe_residual(&g, &p, &plan).unwrap().1, 0.0);
        assert_eq!(solve_lambda(&g, &p, &plan).unwrap(), 0.0);
        assert_eq!(identity_nabla_tau_residual(&g, &p, &plan).unwrap(), 0.0);
        assert_eq!(curvature_gradient_relation_residual(&g, &p, &plan).unwrap(), 0.0);
        let ev = ricci_eigenvector_check(&g, &p, &plan).unwrap();
        assert!(ev.critical && ev.residual == 0.0);
    }

    #[test]
    fn lambda_is_required_for_the_residual() {
        let g = corpus::minkowski(3);
        let p = PotentialData::new(Expr::zero(), 1.0);
        assert!(matches!(qe_residual(&g, &p, &SamplePlan::new()), Err(Error::Precondition(_))));
    }

    #[test]
    fn de_sitter_slice_potentials() {
        for (n, mu) in [(1usize, 1.0), (2, 0.5), (1, -2.0), (3, 2.0)] {
            let case = corpus::de_sitter_qe(n, mu);
            let lambda = n as f64 + 1.0 + 1.0 / mu;
            let solved = solve_lambda(&case.metric, &case.potential, &case.plan).unwrap();
            assert!((solved - lambda).abs() < 1e-10, "n={n} mu={mu}: {solved}");
            let (_, r) = qe_residual(&case.metric, &case.with_lambda(), &case.plan).unwrap();
            assert!(r < 1e-9, "n={n} mu={mu}: {r}");
        }
    }

    #[test]
    fn printed_nabla_tau_form_fails_on_de_sitter() {
        let case = corpus::de_sitter_qe(1, 1.0);
        let derived = nabla_tau_residual(&case.metric, &case.potential, &case.plan, NablaTauForm::Derived).unwrap();
        let printed = nabla_tau_residual(&case.metric, &case.potential, &case.plan, NablaTauForm::Printed).unwrap();
        assert!(derived < 1e-8);
        // 2·2μτ·df_t = 2·2·6·1 = 24 exactly.
        assert!((printed - 24.0).abs() < 1e-9, "{printed}");
    }

    #[test]
    fn isotropic_golden_case() {
        let case = corpus::isotropic_ppwave();
        let r = qe_report(&case.metric, &case.potential, &case.plan).unwrap();
        assert!(matches!(r.isotropy, Isotropy::Isotropic { .. }));
        assert!(r.lambda.abs() < 1e-10 && r.qe_residual < 1e-10);
        assert!(r.tau_samples.iter().all(|t| t.abs() < 1e-12));
        assert!(r.nabla_tau_isotropic_residual.unwrap() < 1e-8);
        let ev = ricci_eigenvector_check(&case.metric, &case.potential, &case.plan).unwrap();
        assert_eq!(ev.residual, 0.0);
    }

    #[test]
    fn trace_obstruction_on_non_qe_input() {
        let g = corpus::minkowski(3);
        let f = crate::parse_with("x1^3", &["x1"]).unwrap();
        let err = solve_lambda(&g, &PotentialData::new(f, 1.0), &SamplePlan::new()).unwrap_err();
        assert!(matches!(err, Error::TraceObstruction { spread, .. } if spread > 1.0));
    }

    #[test]
    fn bakry_emery_consistency() {
        assert!(PotentialData::from_m(Expr::zero(), 2.0).is_ok());
        assert!(PotentialData::new(Expr::zero(), 0.5).with_m(2.0).is_err());
    }

    #[test]
    fn isotropy_labels() {
        let g = corpus::minkowski(3);
        let pts = SamplePlan::new().points(&g, &[]).unwrap();
        let p = |s: &str| PotentialData::new(crate::parse_with(s, &["t", "x1", "x2"]).unwrap(), 1.0);
        assert!(matches!(isotropy(&g, &p("t"), &pts).unwrap(), Isotropy::NonIsotropic { timelike: 12, .. }));
        assert!(matches!(isotropy(&g, &p("t + x1"), &pts).unwrap(), Isotropy::Isotropic { .. }));
        assert_eq!(isotropy(&g, &p("3"), &pts).unwrap(), Isotropy::Critical);
        // ‖∇f‖² = x1² − t²: both signs off the light cone, null on it.
        let q = p("t^2/2 + x1^2/2");
        assert!(matches!(
            isotropy(&g, &q, &pts).unwrap(),
            Isotropy::NonIsotropic { timelike, spacelike, .. } if timelike > 0 && spacelike > 0
        ));
        let names = ["t", "x1", "x2"];
        let cone: Vec<_> = [[0.5, 0.5, 0.0], [0.2, 0.9, 0.1], [0.9, 0.1, -0.3]]
            .iter()
            .map(|v| EvalPoint::from_coords(&names, v))
            .collect();
        assert_eq!(
            isotropy(&g, &q, &cone).unwrap(),
            Isotropy::Indeterminate { negative: 1, null: 1, positive: 1 }
        );
    }
}
