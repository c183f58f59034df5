//! The classification pipeline for conformally flat Lorentzian quasi-Einstein
//! data `(g, f, μ)`.
//!
//! The report certifies indicators, not isometries: branch (ii)(a) reports
//! eigenvector and umbilicity residuals, branch (ii)(b) reports the pp-wave
//! indicators, branch (i) a local constant-curvature certificate for the
//! conformal metric.

mod checks;
mod frame;

use std::collections::BTreeMap;
use std::fmt;

pub use checks::{
    nilpotency_at, nilpotency_check, recurrence_at, recurrence_check, umbilicity_at, umbilicity_check,
    RecurrenceCheck,
};
pub use frame::{build_null_frame, build_orthonormal_frame, Frame};

use crate::error::Result;
use crate::expr::{EvalPoint, Expr};
use crate::geometry::{lcf_at, ricci, scalar_curvature, MetricField, SamplePlan};
use crate::ode;
use crate::ppwave::{self, PpWaveSpec};
use crate::qe::{self, Isotropy, NablaTauForm, PotentialData};
use crate::warped;

/// `|μ + 1/n|` below this selects the conformal branch.
pub const CONFORMAL_BRANCH_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Max `|Q|` and trace spread for a quasi-Einstein verdict.
    pub qe: f64,
    /// Weyl / Schouten–Codazzi residual for conformal flatness.
    pub lcf: f64,
    /// Derived identities and indicator checks.
    pub identity: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { qe: 1e-9, lcf: 1e-10, identity: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    NotQe,
    NotLcf,
    /// `μ = −1/n`: conformal to a space form.
    ConformalEinstein,
    /// `‖∇f‖ ≠ 0`: warped-product indicators.
    NonIsotropic,
    /// `‖∇f‖ = 0`: pp-wave indicators.
    Isotropic,
    Indeterminate,
}

impl Branch {
    pub const ALL: [Branch; 6] = [
        Branch::NotQe,
        Branch::NotLcf,
        Branch::ConformalEinstein,
        Branch::NonIsotropic,
        Branch::Isotropic,
        Branch::Indeterminate,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Branch::NotQe => "not-QE",
            Branch::NotLcf => "not-LCF",
            Branch::ConformalEinstein => "conformal-einstein",
            Branch::NonIsotropic => "non-isotropic-warped",
            Branch::Isotropic => "isotropic-pp-wave",
            Branch::Indeterminate => "indeterminate",
        }
    }

    /// Whether the label names one of the classified families.
    pub fn is_classified(self) -> bool {
        matches!(self, Branch::ConformalEinstein | Branch::NonIsotropic | Branch::Isotropic)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationReport {
    pub branch: Branch,
    /// Supplied or trace-solved `λ`; absent only when sampling failed early.
    pub lambda: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
    pub tau_samples: Vec<f64>,
    pub isotropy: Option<Isotropy>,
    /// Every indicator of the reported branch is within its threshold.
    pub indicators_pass: bool,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    /// Classified family with all indicators passing.
    pub fn passed(&self) -> bool {
        self.branch.is_classified() && self.indicators_pass
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).copied()
    }
}

struct Builder {
    report: ClassificationReport,
}

impl Builder {
    fn put(&mut self, name: &str, value: f64) {
        self.report.residuals.insert(name.to_string(), value);
    }

    /// Records an indicator and fails the report if it exceeds `threshold`.
    fn check(&mut self, name: &str, value: f64, threshold: f64) {
        self.put(name, value);
        if !(value <= threshold) {
            self.report.indicators_pass = false;
            self.note(format!("{name} = {value:e} exceeds {threshold:e}"));
        }
    }

    fn note(&mut self, s: String) {
        self.report.notes.push(s);
    }

    fn finish(mut self, branch: Branch) -> ClassificationReport {
        self.report.branch = branch;
        if !branch.is_classified() {
            self.report.indicators_pass = false;
        }
        self.report
    }
}

/// Runs the pipeline on the plan's points.
pub fn classify(g: &MetricField, p: &PotentialData, plan: &SamplePlan, thresholds: &Thresholds) -> Result<ClassificationReport> {
    let points = qe::sample(g, p, plan)?;
    classify_at(g, p, &points, thresholds)
}

pub fn classify_at(
    g: &MetricField,
    p: &PotentialData,
    points: &[EvalPoint],
    th: &Thresholds,
) -> Result<ClassificationReport> {
    let mut b = Builder {
        report: ClassificationReport {
            branch: Branch::Indeterminate,
            lambda: None,
            residuals: BTreeMap::new(),
            tau_samples: Vec::new(),
            isotropy: None,
            indicators_pass: true,
            notes: Vec::new(),
        },
    };
    let tau = scalar_curvature(g);
    b.report.tau_samples = points.iter().map(|pt| tau.eval(pt)).collect::<Result<_, _>>()?;

    // (1) quasi-Einstein
    let est = qe::lambda_samples(g, p, points)?;
    let lambda = p.lambda.unwrap_or(est.mean);
    b.report.lambda = Some(lambda);
    b.put("lambda_spread", est.spread);
    let q = qe::qe_tensor(g, p, lambda).max_abs(points)?;
    b.put("qe", q);
    if p.lambda.is_none() && est.spread > th.qe {
        b.note(format!("trace obstruction: lambda estimate varies by {:e} across sample points", est.spread));
        return Ok(b.finish(Branch::NotQe));
    }
    if q > th.qe {
        b.note(format!("quasi-Einstein residual {q:e} exceeds {:e}", th.qe));
        return Ok(b.finish(Branch::NotQe));
    }

    // (2) conformal flatness
    let lcf = lcf_at(g, points, th.lcf)?;
    b.put("lcf", lcf.residual);
    if !lcf.conformally_flat {
        b.note(format!(
            "quasi-Einstein but not locally conformally flat ({:?} residual {:e}); classification does not apply",
            lcf.criterion, lcf.residual
        ));
        return Ok(b.finish(Branch::NotLcf));
    }

    let trace = qe::trace_identity_residual(g, p, lambda, points)?;
    b.check("trace_identity", trace, th.qe);
    let nt = qe::nabla_tau_defect(g, p, lambda, NablaTauForm::Derived).max_abs(points)?;
    b.check("nabla_tau_identity", nt, th.identity);
    let cg = qe::curvature_gradient_residual_at(g, p, points)?;
    b.check("curvature_gradient", cg, th.identity);

    // (3) conformal branch
    let n = g.n() as f64;
    if (p.mu + 1.0 / n).abs() < CONFORMAL_BRANCH_TOLERANCE {
        let cert = warped::conformal_certificate(g, &p.f, points)?;
        b.check("conformal_einstein", cert.einstein_residual, th.identity);
        b.check("conformal_lcf", cert.lcf_residual, th.identity);
        b.check("conformal_sectional_spread", cert.sectional_spread, th.identity);
        b.put("conformal_curvature", cert.curvature);
        b.put("conformal_riemann_max", cert.riemann_max);
        let formula = warped::conformal_ricci_formula(g, &p.f);
        let gt = warped::conformal_metric(g, &p.f)?;
        b.check("conformal_ricci_formula", ricci(&gt).sub(&formula).max_abs(points)?, th.identity);
        let factor = cert.factor_samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        b.put("conformal_factor_max_abs", factor);
        return Ok(b.finish(Branch::ConformalEinstein));
    }

    // (4) isotropy split
    let iso = qe::isotropy(g, p, points)?;
    b.report.isotropy = Some(iso.clone());
    match iso {
        Isotropy::NonIsotropic { min_abs, timelike, spacelike } => {
            b.put("grad_norm_min_abs", min_abs);
            if timelike > 0 && spacelike > 0 {
                b.note(format!("gradient is timelike at {timelike} points and spacelike at {spacelike}"));
            }
            let ev = qe::eigenvector_check_at(g, p, None, points)?;
            b.check("ricci_eigenvector", ev.residual, th.identity);
            b.check("umbilicity", umbilicity_at(g, p, points)?, th.identity);
            Ok(b.finish(Branch::NonIsotropic))
        }
        Isotropy::Isotropic { max_norm } => {
            b.put("grad_norm_max_abs", max_norm);
            isotropic_indicators(&mut b, g, p, points, lambda, th)?;
            Ok(b.finish(Branch::Isotropic))
        }
        Isotropy::Indeterminate { negative, null, positive } => {
            b.note(format!(
                "|grad f|^2 sign pattern: {negative} negative, {null} near-null, {positive} positive samples"
            ));
            Ok(b.finish(Branch::Indeterminate))
        }
        Isotropy::Critical => {
            b.note("grad f vanishes at every sample point; branch not determined".into());
            Ok(b.finish(Branch::Indeterminate))
        }
    }
}

fn isotropic_indicators(
    b: &mut Builder,
    g: &MetricField,
    p: &PotentialData,
    points: &[EvalPoint],
    lambda: f64,
    th: &Thresholds,
) -> Result<()> {
    let tau_max = b.report.tau_samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    b.check("tau", tau_max, th.identity);
    b.check("lambda_abs", lambda.abs(), th.identity);
    b.check(
        "nabla_tau_isotropic",
        qe::nabla_tau_defect(g, p, lambda, NablaTauForm::Isotropic).max_abs(points)?,
        th.identity,
    );
    b.check("ricci_eigenvector", qe::eigenvector_check_at(g, p, Some(lambda), points)?.residual, th.identity);
    b.check("nilpotency", nilpotency_at(g, points)?, th.identity);
    b.check("ricci_image_isotropy", ppwave::image_isotropy_at(g, points, th.identity)?.residual, th.identity);
    let rec = recurrence_at(g, p, points)?;
    b.check("recurrence", rec.residual, th.identity);
    b.check("omega_u", rec.omega_u_deviation, th.identity);

    let Some(spec) = as_ppwave(g) else {
        b.note("chart is not a pp-wave chart; plane-wave and ODE checks skipped".into());
        return Ok(());
    };
    let plane = spec.is_plane_wave(&SamplePlan::new())?;
    match plane.plane_wave {
        true => b.put("plane_wave_third_derivatives", plane.residual),
        false => {
            b.report.indicators_pass = false;
            b.note(plane.note.unwrap_or_else(|| "H is not quadratic in the transverse coordinates".into()));
        }
    }
    let pde = ppwave_system_at(&spec, p, lambda, points)?;
    for (name, r) in ppwave::PDE_LABELS.iter().zip(pde) {
        b.check(&format!("ppwave_equation_{name}"), r, th.identity);
    }
    let f_of_u = p.f.free_coords().iter().all(|c| &**c == "u");
    let rho_uu = ricci(g).get(&[0, 0]).clone();
    let a_of_u = rho_uu.free_coords().iter().all(|c| &**c == "u");
    if f_of_u && a_of_u {
        let a = Expr::ratio(-1, spec.n() as i64) * rho_uu;
        let residual = ode::theorem_ode_expr(&p.f, &a, spec.n(), p.mu);
        let mut worst: f64 = 0.0;
        for pt in points {
            worst = worst.max(residual.eval(pt)?.abs());
        }
        b.check("theorem_ode", worst, th.identity);
        if residual.is_zero() {
            b.note("potential ODE f'' - mu f'^2 - n a(u) = 0 holds symbolically".into());
        }
    } else {
        b.note("potential is not a function of u alone; ODE check skipped".into());
    }
    Ok(())
}

fn ppwave_system_at(spec: &PpWaveSpec, p: &PotentialData, lambda: f64, points: &[EvalPoint]) -> Result<[f64; 7]> {
    let mut out = [0.0f64; 7];
    for eq in ppwave::pde_system(spec, p, lambda) {
        for pt in points {
            out[eq.family] = out[eq.family].max(eq.residual.eval(pt)?.abs());
        }
    }
    Ok(out)
}

/// Recognises `2 du dv + H du² + Σ dx_i²` on a `(u, v, x1..xn)` chart.
pub fn as_ppwave(g: &MetricField) -> Option<PpWaveSpec> {
    let n = g.n();
    if g.chart().coords() != ppwave::coordinate_names(n).as_slice() {
        return None;
    }
    let d = g.dim();
    for i in 0..d {
        for j in 0..d {
            let c = g.component(i, j);
            let ok = match (i, j) {
                (0, 0) => true,
                (0, 1) | (1, 0) => c.is_one(),
                (a, b) if a == b && a >= 2 => c.is_one(),
                _ => c.is_zero(),
            };
            if !ok {
                return None;
            }
        }
    }
    PpWaveSpec::new(n, g.component(0, 0).clone()).ok()
}
