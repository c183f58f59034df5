//! Reference metrics and closed-form quasi-Einstein data.
//!
//! | case | metric | f | μ | λ | branch |
//! |---|---|---|---|---|---|
//! | `de_sitter_qe(n, μ)` | `−dt² + e^{2t} δ_{n+1}` | `−t/μ` | μ | `n+1+1/μ` | non-isotropic |
//! | `conformal_branch(n)` | same | `n t` | `−1/n` | 1 | conformal |
//! | `isotropic_ppwave()` | pp-wave `H = −x1²` | `−u` | 1 | 0 | isotropic |
//! | `soliton_ppwave(n, a₀)` | pp-wave `H = a₀ Σ x_i²` | `(n a₀/2) u²` | 0 | 0 | isotropic |
//! | `two_symmetric_soliton()` | pp-wave `H = u x1²` | `u³/6` | 0 | 0 | isotropic |
//! | `ricci_flat_non_lcf()` | pp-wave `H = x1² − x2²` | 0 | 1 | 0 | not conformally flat |

use crate::classify::Branch;
use crate::expr::{parse_with, Expr};
use crate::geometry::{CoordinateChart, MetricField, SamplePlan};
use crate::ppwave::PpWaveSpec;
use crate::qe::PotentialData;
use crate::warped::{FiberModel, WarpedSpec};

#[derive(Clone, Debug)]
pub struct GoldenCase {
    pub name: &'static str,
    pub metric: MetricField,
    /// Potential without `λ`, so that pipelines solve it.
    pub potential: PotentialData,
    /// The closed-form `λ`.
    pub lambda: f64,
    pub plan: SamplePlan,
    pub expected: Branch,
    pub ppwave: Option<PpWaveSpec>,
    pub warped: Option<WarpedSpec>,
}

impl GoldenCase {
    /// The potential with the closed-form `λ` attached.
    pub fn with_lambda(&self) -> PotentialData {
        self.potential.clone().with_lambda(self.lambda)
    }

    /// Whether the pair is conformally flat (all but the explicit counterexample).
    pub fn is_lcf(&self) -> bool {
        self.expected != Branch::NotLcf
    }
}

/// `diag(−1, 1, …, 1)` on `t, x1, …, x_{d−1}`.
pub fn minkowski(d: usize) -> MetricField {
    let names: Vec<String> = std::iter::once("t".to_string()).chain((1..d).map(|i| format!("x{i}"))).collect();
    let mut diag = vec![Expr::one(); d];
    diag[0] = Expr::int(-1);
    MetricField::diagonal(CoordinateChart::new(&names).expect("valid names"), diag).expect("nondegenerate")
}

pub fn de_sitter_spec(n: usize) -> WarpedSpec {
    WarpedSpec::new(-1, parse_with("exp(t)", &["t"]).expect("parses"), FiberModel::FlatEuclidean, n + 1)
        .expect("valid warped spec")
}

/// `−dt² + e^{2t} δ_{n+1}`, constant curvature +1.
pub fn de_sitter_slice(n: usize) -> MetricField {
    de_sitter_spec(n).metric().expect("valid metric")
}

/// `f = −t/μ`, `λ = n + 1 + 1/μ`.
pub fn de_sitter_qe(n: usize, mu: f64) -> GoldenCase {
    let spec = de_sitter_spec(n);
    GoldenCase {
        name: "de-sitter-non-isotropic",
        metric: spec.metric().expect("valid metric"),
        potential: PotentialData::new(Expr::real(-1.0 / mu) * Expr::coord("t"), mu),
        lambda: n as f64 + 1.0 + 1.0 / mu,
        plan: SamplePlan::new(),
        expected: if (mu + 1.0 / n as f64).abs() < 1e-12 { Branch::ConformalEinstein } else { Branch::NonIsotropic },
        ppwave: None,
        warped: Some(spec),
    }
}

/// `μ = −1/n`, `f = n t`, `λ = 1`; `e^{−2f/n} g` is flat.
pub fn conformal_branch(n: usize) -> GoldenCase {
    let spec = de_sitter_spec(n);
    GoldenCase {
        name: "de-sitter-conformal",
        metric: spec.metric().expect("valid metric"),
        potential: PotentialData::new(Expr::int(n as i64) * Expr::coord("t"), -1.0 / n as f64),
        lambda: 1.0,
        plan: SamplePlan::new(),
        expected: Branch::ConformalEinstein,
        ppwave: None,
        warped: Some(spec),
    }
}

fn ppwave_case(name: &'static str, spec: PpWaveSpec, f: Expr, mu: f64, expected: Branch) -> GoldenCase {
    GoldenCase {
        name,
        metric: spec.metric(),
        potential: PotentialData::new(f, mu),
        lambda: 0.0,
        plan: SamplePlan::new(),
        expected,
        ppwave: Some(spec),
        warped: None,
    }
}

/// `n = 1`, `H = −x1²` (`a₀ = −1`), `μ = 1`, `f = −log(e^u) = −u`, `λ = 0`.
pub fn isotropic_ppwave() -> GoldenCase {
    let spec = PpWaveSpec::parse(1, "-x1^2").expect("parses");
    let f = -Expr::real(1.0) * Expr::coord("u").exp().log();
    ppwave_case("ppwave-isotropic", spec, f, 1.0, Branch::Isotropic)
}

/// Steady soliton `μ = 0` on `H = a₀ Σ x_i²` with `f = (n a₀/2) u²`.
pub fn soliton_ppwave(n: usize, a0: f64) -> GoldenCase {
    let spec = PpWaveSpec::conformally_flat(n, Expr::real(a0), vec![Expr::zero(); n], Expr::zero()).expect("valid");
    let f = Expr::real(n as f64 * a0 / 2.0) * Expr::coord("u").powi(2);
    ppwave_case("ppwave-soliton", spec, f, 0.0, Branch::Isotropic)
}

/// Two-symmetric `H = u x1²` with the soliton `f = u³/6`.
pub fn two_symmetric_soliton() -> GoldenCase {
    let spec = PpWaveSpec::two_symmetric(&[1.0], &[vec![0.0]]).expect("valid");
    let f = Expr::ratio(1, 6) * Expr::coord("u").powi(3);
    ppwave_case("two-symmetric-soliton", spec, f, 0.0, Branch::Isotropic)
}

/// Ricci-flat, Weyl ≠ 0: trivially quasi-Einstein but not conformally flat.
pub fn ricci_flat_non_lcf() -> GoldenCase {
    let spec = PpWaveSpec::parse(2, "x1^2 - x2^2").expect("parses");
    ppwave_case("ppwave-ricci-flat", spec, Expr::zero(), 1.0, Branch::NotLcf)
}

/// Every closed-form case, conformally flat ones first.
pub fn golden_cases() -> Vec<GoldenCase> {
    vec![
        de_sitter_qe(1, 1.0),
        de_sitter_qe(2, 0.5),
        conformal_branch(1),
        conformal_branch(2),
        isotropic_ppwave(),
        soliton_ppwave(1, -1.0),
        soliton_ppwave(2, 1.5),
        two_symmetric_soliton(),
        ricci_flat_non_lcf(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qe;

    #[test]
    fn golden_cases_are_quasi_einstein() {
        for case in golden_cases() {
            let solved = qe::solve_lambda(&case.metric, &case.potential, &case.plan).unwrap();
            assert!((solved - case.lambda).abs() < 1e-10, "{}: {solved}", case.name);
            let (_, r) = qe::qe_residual(&case.metric, &case.with_lambda(), &case.plan).unwrap();
            assert!(r < 1e-9, "{}: {r}", case.name);
        }
    }

    #[test]
    fn isotropic_potential_simplifies() {
        assert_eq!(isotropic_ppwave().potential.f, -Expr::coord("u"));
    }
}
