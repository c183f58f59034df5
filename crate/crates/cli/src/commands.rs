//! The four subcommands.

use qe_core::geometry::lcf_at;
use qe_core::ode::{potential_from_f0, theorem_ode_residual};
use qe_core::qe::{self, Isotropy};
use qe_core::{MetricField, PotentialData};

use crate::problem::{OdeProblem, ProblemFile, Resolved};
use crate::report::{canonical_json, OdeSummary, Report, Verdict};
use crate::InputError;

/// Accepted `f'' − μ f'² − n a` on sampled potentials (fourth-order differences).
pub const ODE_RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Fraction of the way to the first zero of `f₀` over which the sampled
/// potential is checked; `log f₀` degrades the differences near a zero.
const ZERO_MARGIN: f64 = 0.75;

fn core(pointer: &str) -> impl Fn(qe_core::Error) -> InputError + '_ {
    move |e| InputError { pointer: pointer.to_string(), message: e.to_string() }
}

fn needs(r: &Resolved) -> Result<(&MetricField, &PotentialData), InputError> {
    let g = r.metric.as_ref().ok_or_else(|| InputError::new("/metric", "missing metric or construct"))?;
    let p = r.potential.as_ref().ok_or_else(|| InputError::new("/potential", "missing potential"))?;
    Ok((g, p))
}

/// Quasi-Einstein residual, `λ`, the identities and conformal flatness.
/// Passes iff the pair is quasi-Einstein and locally conformally flat.
pub fn check(r: &Resolved) -> Result<Report, InputError> {
    let (g, p) = needs(r)?;
    let th = &r.thresholds;
    let mut out = Report::new(r.seed);
    let points = qe::sample(g, p, &r.plan).map_err(core("/samples"))?;
    let q = qe::qe_report_at(g, p, &points).map_err(core("/potential"))?;
    out.lambda = Some(q.lambda);
    out.tau_samples = q.tau_samples.clone();
    out.residuals.insert("qe".into(), q.qe_residual);
    out.residuals.insert("lambda_spread".into(), q.lambda_spread);
    out.residuals.insert("trace_identity".into(), q.trace_residual);
    out.residuals.insert("nabla_tau_identity".into(), q.nabla_tau_residual);
    out.residuals.insert("curvature_gradient".into(), q.curvature_gradient_residual);
    if let Some(v) = q.nabla_tau_isotropic_residual {
        out.residuals.insert("nabla_tau_isotropic".into(), v);
    }

    if !q.lambda_supplied && q.lambda_spread > th.qe {
        out.verdict = Verdict::Fail;
        out.warnings.push(format!(
            "QE failure: trace obstruction, lambda estimate varies by {:e} (tolerance {:e})",
            q.lambda_spread, th.qe
        ));
    }
    if !(q.qe_residual <= th.qe) {
        out.verdict = Verdict::Fail;
        out.warnings.push(format!("QE failure: residual {:e} exceeds {:e}", q.qe_residual, th.qe));
    } else {
        for (name, v) in [("nabla_tau_identity", q.nabla_tau_residual), ("curvature_gradient", q.curvature_gradient_residual)] {
            if !(v <= th.identity) {
                out.warnings.push(format!("identity {name} = {v:e} exceeds {:e}", th.identity));
            }
        }
    }

    let lcf = lcf_at(g, &points, th.lcf).map_err(core("/metric"))?;
    out.residuals.insert("lcf".into(), lcf.residual);
    if !lcf.conformally_flat {
        out.verdict = Verdict::Fail;
        out.warnings.push(format!(
            "LCF failure: {} residual {:e} exceeds {:e}",
            criterion_name(lcf.criterion),
            lcf.residual,
            th.lcf
        ));
    }
    if let Isotropy::Critical = q.isotropy {
        out.warnings.push("grad f vanishes at every sample point".into());
    }
    Ok(out)
}

fn criterion_name(c: qe_core::geometry::LcfCriterion) -> &'static str {
    match c {
        qe_core::geometry::LcfCriterion::Weyl => "Weyl tensor",
        qe_core::geometry::LcfCriterion::SchoutenCodazzi => "Schouten-Codazzi",
    }
}

/// Branch label and its indicators; passes iff a branch is certified.
pub fn classify(r: &Resolved) -> Result<Report, InputError> {
    let (g, p) = needs(r)?;
    let rep = qe_core::classify(g, p, &r.plan, &r.thresholds).map_err(core("/samples"))?;
    let mut out = Report::new(r.seed);
    out.verdict = if rep.passed() { Verdict::Pass } else { Verdict::Fail };
    out.branch = Some(rep.branch.label().to_string());
    out.residuals = rep.residuals;
    out.lambda = rep.lambda;
    out.tau_samples = rep.tau_samples;
    out.warnings = rep.notes;
    if let Some(ode) = &r.ode {
        let (summary, notes) = run_ode(ode)?;
        out.warnings.extend(notes);
        out.ode = Some(summary);
    }
    Ok(out)
}

/// Integrates `f₀`; passes iff the integration completed and, where a
/// potential exists, it satisfies the theorem ODE.
pub fn ode(r: &Resolved) -> Result<Report, InputError> {
    let ode = r.ode.as_ref().ok_or_else(|| InputError::new("/ode", "missing ode section"))?;
    let (summary, notes) = run_ode(ode)?;
    let mut out = Report::new(r.seed);
    let residual_ok = summary.theorem_residual.map_or(true, |v| v <= ODE_RESIDUAL_TOLERANCE);
    if summary.truncated.is_some() || !residual_ok {
        out.verdict = Verdict::Fail;
    }
    if let Some(v) = summary.theorem_residual {
        out.residuals.insert("theorem_ode".into(), v);
    }
    out.warnings = notes;
    out.ode = Some(summary);
    Ok(out)
}

fn run_ode(ode: &OdeProblem) -> Result<(OdeSummary, Vec<String>), InputError> {
    let sol = ode.integrate().map_err(core("/ode"))?;
    let mut notes = Vec::new();
    let (start, end) = sol.interval;
    let window = match (&sol.truncated, sol.sign_changes.first()) {
        (Some(why), _) => {
            notes.push(format!("integration stopped early: {why}"));
            None
        }
        (None, None) => Some((start, end)),
        (None, Some(&z)) => {
            notes.push(format!(
                "f0 changes sign {} time(s) on [{start}, {end}]; f = -log(f0)/mu exists only between zeros",
                sol.sign_changes.len()
            ));
            Some((start, start + ZERO_MARGIN * (z - start)))
        }
    };
    let mut theorem_residual = None;
    let mut residual_interval = None;
    if let Some(w) = window {
        match potential_from_f0(&sol, ode.mu, Some(w)).and_then(|pot| theorem_ode_residual(&pot, &ode.a, ode.n, ode.mu)) {
            Ok(v) => {
                theorem_residual = Some(v);
                residual_interval = Some(w);
            }
            Err(e) => notes.push(format!("theorem residual not evaluated: {e}")),
        }
    }
    let last = sol.u.len() - 1;
    let summary = OdeSummary {
        h: sol.h,
        interval: sol.interval,
        steps: last,
        f0_end: sol.f0[last],
        df0_end: sol.df0[last],
        sign_changes: sol.sign_changes.clone(),
        truncated: sol.truncated.clone(),
        theorem_residual,
        residual_interval,
    };
    Ok((summary, notes))
}

/// The problem with its `construct` expanded, as canonical JSON.
pub fn construct(problem: &ProblemFile) -> Result<String, InputError> {
    let expanded = problem.expanded()?;
    let value = serde_json::to_value(&expanded).map_err(|e| InputError::new("", e))?;
    Ok(canonical_json(&value))
}
