//! pp-waves `2 du dv + H(u, x) du² + Σ dx_i²` and their special families.
//!
//! Charts are ordered `(u, v, x1, …, xn)`.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::expr::{parse_with, EvalPoint, Expr, Node};
use crate::geometry::{ricci, CoordinateChart, MetricField, SamplePlan, TensorField, Variance};
use crate::linalg;
use crate::qe::{self, PotentialData};

/// `u, v, x1, …, xn`.
pub fn coordinate_names(n: usize) -> Vec<String> {
    ["u".to_string(), "v".to_string()].into_iter().chain((1..=n).map(|i| format!("x{i}"))).collect()
}

/// Coefficients of `H = a(u) Σ x_i² + Σ b_i(u) x_i + c(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LcfForm {
    pub a: Expr,
    pub b: Vec<Expr>,
    pub c: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PpWaveSpec {
    n: usize,
    h: Expr,
    lcf: Option<LcfForm>,
}

impl PpWaveSpec {
    /// `H` may depend on `u` and `x1..xn` (and parameters), never on `v`.
    pub fn new(n: usize, h: Expr) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("pp-waves need n >= 1 transverse coordinates".into()));
        }
        if h.depends_on("v") {
            return Err(Error::Precondition(format!("H must not depend on v: `{h}`")));
        }
        let names = coordinate_names(n);
        if let Some(bad) = h.free_coords().iter().find(|c| !names.iter().any(|n| n.as_str() == &***c)) {
            return Err(Error::Precondition(format!("H mentions '{bad}', which is not a pp-wave coordinate")));
        }
        Ok(PpWaveSpec { n, h, lcf: None })
    }

    pub fn parse(n: usize, h: &str) -> Result<Self> {
        let names = coordinate_names(n);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        PpWaveSpec::new(n, parse_with(h, &refs)?)
    }

    /// The conformally flat shape `a(u) Σ x_i² + Σ b_i(u) x_i + c(u)`.
    pub fn conformally_flat(n: usize, a: Expr, b: Vec<Expr>, c: Expr) -> Result<Self> {
        if b.len() != n {
            return Err(Error::Precondition(format!("expected {n} linear coefficients, got {}", b.len())));
        }
        for e in std::iter::once(&a).chain(&b).chain(std::iter::once(&c)) {
            if e.free_coords().iter().any(|s| &**s != "u") {
                return Err(Error::Precondition(format!("coefficient `{e}` must depend on u only")));
            }
        }
        let x = |i: usize| Expr::coord(&format!("x{i}"));
        let h = Expr::sum(
            std::iter::once(&a * Expr::sum((1..=n).map(|i| x(i).powi(2))))
                .chain(b.iter().enumerate().map(|(i, bi)| bi * x(i + 1)))
                .chain(std::iter::once(c.clone())),
        );
        let mut spec = PpWaveSpec::new(n, h)?;
        spec.lcf = Some(LcfForm { a, b, c });
        Ok(spec)
    }

    /// Cahen–Wallach: `H = Σ a_i x_i²`.
    pub fn cahen_wallach(a: &[f64]) -> Result<Self> {
        if a.iter().all(|&x| x == 0.0) {
            return Err(Error::Precondition("Cahen-Wallach needs some a_i != 0".into()));
        }
        let h = Expr::sum(a.iter().enumerate().map(|(i, &ai)| Expr::real(ai) * Expr::coord(&format!("x{}", i + 1)).powi(2)));
        PpWaveSpec::new(a.len(), h)
    }

    /// Two-symmetric plane wave `H = Σ (a_ij u + b_ij) x_i x_j` with
    /// `a = diag(a_diag)`, `a_11 ≤ … ≤ a_nn` all nonzero, `b` symmetric.
    pub fn two_symmetric(a_diag: &[f64], b: &[Vec<f64>]) -> Result<Self> {
        let n = a_diag.len();
        if n == 0 || a_diag.iter().any(|&a| a == 0.0) || a_diag.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Precondition("a_diag must be nonzero and ascending".into()));
        }
        if b.len() != n || b.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition(format!("b must be {n}x{n}")));
        }
        if (0..n).any(|i| (0..i).any(|j| b[i][j] != b[j][i])) {
            return Err(Error::Precondition("b must be symmetric".into()));
        }
        let u = Expr::coord("u");
        let x = |i: usize| Expr::coord(&format!("x{}", i + 1));
        let mut terms = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let a_ij = if i == j { a_diag[i] } else { 0.0 };
                let coeff = Expr::real(a_ij) * &u + Expr::real(b[i][j]);
                terms.push(Expr::product([coeff, x(i), x(j)]));
            }
        }
        PpWaveSpec::new(n, Expr::sum(terms))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn lcf_form(&self) -> Option<&LcfForm> {
        self.lcf.as_ref()
    }

    pub fn chart(&self) -> CoordinateChart {
        CoordinateChart::new(&coordinate_names(self.n)).expect("pp-wave coordinate names are valid")
    }

    /// `g_uv = 1`, `g_uu = H`, `g_ii = 1`.
    pub fn metric(&self) -> MetricField {
        let d = self.n + 2;
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| match (i, j) {
                        (0, 0) => self.h.clone(),
                        (0, 1) | (1, 0) => Expr::one(),
                        (a, b) if a == b && a >= 2 => Expr::one(),
                        _ => Expr::zero(),
                    })
                    .collect()
            })
            .collect();
        MetricField::new(self.chart(), rows).expect("pp-wave metrics have determinant -1")
    }

    fn x(&self, i: usize) -> String {
        format!("x{}", i + 1)
    }

    /// Curvature from `R(∂_u,∂_i,∂_u,∂_j) = −½ ∂²_ij H` and its symmetries.
    pub fn analytic_curvature(&self) -> TensorField {
        let half = Expr::ratio(1, 2);
        TensorField::from_fn(std::sync::Arc::new(self.chart()), vec![Variance::Lower; 4], |idx| {
            let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
            // R_{abcd} nonzero only for {a,b} = {u, x_i}, {c,d} = {u, x_j}.
            let split = |p: usize, q: usize| match (p, q) {
                (0, q) if q >= 2 => Some((q - 2, 1)),
                (p, 0) if p >= 2 => Some((p - 2, -1)),
                _ => None,
            };
            match (split(a, b), split(c, d)) {
                (Some((i, s1)), Some((j, s2))) => {
                    let e = -(&half * self.h.diff(&self.x(i)).diff(&self.x(j)));
                    if s1 * s2 > 0 {
                        e
                    } else {
                        -e
                    }
                }
                _ => Expr::zero(),
            }
        })
    }

    /// `ρ(∂_u,∂_u) = −½ Σ ∂²_ii H`.
    pub fn analytic_ricci_uu(&self) -> Expr {
        Expr::ratio(-1, 2) * Expr::sum((0..self.n).map(|i| self.h.diff(&self.x(i)).diff(&self.x(i))))
    }

    /// Plane-wave test: `H` polynomial in `x` with all third `x`-derivatives
    /// zero, symbolically and at the plan's points.
    pub fn is_plane_wave(&self, plan: &SamplePlan) -> Result<PlaneWaveVerdict> {
        let xs: Vec<String> = (0..self.n).map(|i| self.x(i)).collect();
        if !is_polynomial_in(&self.h, &xs) {
            return Ok(PlaneWaveVerdict {
                plane_wave: false,
                residual: f64::NAN,
                note: Some("H is not polynomial in the transverse coordinates".into()),
            });
        }
        let mut thirds = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                for k in j..self.n {
                    thirds.push(self.h.diff(&xs[i]).diff(&xs[j]).diff(&xs[k]));
                }
            }
        }
        let symbolic = thirds.iter().all(Expr::is_zero);
        let points = plan.points(&self.metric(), &[])?;
        let mut residual: f64 = 0.0;
        for p in &points {
            for t in &thirds {
                residual = residual.max(t.eval(p)?.abs());
            }
        }
        let plane_wave = symbolic && residual < 1e-12;
        let note = (!symbolic && residual < 1e-12)
            .then(|| "third derivatives vanish numerically but not symbolically".to_string());
        Ok(PlaneWaveVerdict { plane_wave, residual, note })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneWaveVerdict {
    pub plane_wave: bool,
    /// Max `|∂³H|` over sample points; NaN when not evaluated.
    pub residual: f64,
    pub note: Option<String>,
}

/// Structural polynomial test in the given coordinates.
pub fn is_polynomial_in(e: &Expr, vars: &[String]) -> bool {
    if !vars.iter().any(|v| e.depends_on(v)) {
        return true;
    }
    match e.node() {
        Node::Const(_) | Node::Param(_) | Node::Coord(_) => true,
        Node::Sum(ts) | Node::Product(ts) => ts.iter().all(|t| is_polynomial_in(t, vars)),
        Node::Pow(b, r) => r.is_integer() && *r >= Rational64::from_integer(0) && is_polynomial_in(b, vars),
        Node::Func(..) => false,
    }
}

/// Labels of the seven equations, in order.
pub const PDE_LABELS: [&str; 7] = ["uu", "ui", "ii", "uv", "vv", "vi", "ij"];

/// Per-equation max-norms of the pp-wave form of the quasi-Einstein system.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeResiduals {
    pub lambda: f64,
    pub residuals: [f64; 7],
}

impl PdeResiduals {
    pub fn max(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        PDE_LABELS.iter().copied().zip(self.residuals.iter().copied())
    }
}

/// One equation of the system: its label index, the `Q` component it
/// equals, and the left-hand side minus right-hand side.
pub struct PdeEquation {
    pub family: usize,
    pub component: (usize, usize),
    pub residual: Expr,
}

/// The quasi-Einstein equation written out in pp-wave coordinates:
///
/// ```text
/// ½ Σ H_i f_i + f_uu − ½ H_u f_v + ρ_uu − μ f_u² = λ H
/// f_ui − ½ H_i f_v − μ f_i f_u = 0
/// f_ii − μ f_i² = λ
/// f_uv − μ f_u f_v = λ
/// f_vv − μ f_v² = 0
/// f_vi − μ f_i f_v = 0
/// f_ij − μ f_i f_j = 0            (i ≠ j)
/// ```
pub fn pde_system(spec: &PpWaveSpec, p: &PotentialData, lambda: f64) -> Vec<PdeEquation> {
    let n = spec.n;
    let h = &spec.h;
    let f = &p.f;
    let mu = Expr::real(p.mu);
    let lam = Expr::real(lambda);
    let half = Expr::ratio(1, 2);
    let xs: Vec<String> = (0..n).map(|i| spec.x(i)).collect();
    let (fu, fv) = (f.diff("u"), f.diff("v"));
    let fx: Vec<Expr> = xs.iter().map(|x| f.diff(x)).collect();
    let hx: Vec<Expr> = xs.iter().map(|x| h.diff(x)).collect();
    let mut eqs = Vec::new();
    let mut push = |family: usize, component: (usize, usize), residual: Expr| {
        eqs.push(PdeEquation { family, component, residual })
    };
    push(
        0,
        (0, 0),
        Expr::sum(
            (0..n)
                .map(|i| &half * &hx[i] * &fx[i])
                .chain([
                    fu.diff("u"),
                    -(&half * h.diff("u") * &fv),
                    spec.analytic_ricci_uu(),
                    -(&mu * fu.clone().powi(2)),
                    -(&lam * h),
                ]),
        ),
    );
    for i in 0..n {
        push(1, (0, i + 2), Expr::sum([fu.diff(&xs[i]), -(&half * &hx[i] * &fv), -Expr::product([mu.clone(), fx[i].clone(), fu.clone()])]));
    }
    for i in 0..n {
        push(2, (i + 2, i + 2), Expr::sum([fx[i].diff(&xs[i]), -(&mu * fx[i].clone().powi(2)), -lam.clone()]));
    }
    push(3, (0, 1), Expr::sum([fu.diff("v"), -Expr::product([mu.clone(), fu.clone(), fv.clone()]), -lam.clone()]));
    push(4, (1, 1), fv.diff("v") - &mu * fv.clone().powi(2));
    for i in 0..n {
        push(5, (1, i + 2), fv.diff(&xs[i]) - Expr::product([mu.clone(), fx[i].clone(), fv.clone()]));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            push(6, (i + 2, j + 2), fx[i].diff(&xs[j]) - Expr::product([mu.clone(), fx[i].clone(), fx[j].clone()]));
        }
    }
    eqs
}

fn pde_lambda(spec: &PpWaveSpec, p: &PotentialData, plan: &SamplePlan) -> Result<f64> {
    match p.lambda {
        Some(l) => Ok(l),
        None => qe::solve_lambda(&spec.metric(), p, plan),
    }
}

pub fn pde_residuals(spec: &PpWaveSpec, p: &PotentialData, plan: &SamplePlan) -> Result<PdeResiduals> {
    let lambda = pde_lambda(spec, p, plan)?;
    let points = qe::sample(&spec.metric(), p, plan)?;
    let mut residuals = [0.0f64; 7];
    for eq in pde_system(spec, p, lambda) {
        for pt in &points {
            residuals[eq.family] = residuals[eq.family].max(eq.residual.eval(pt)?.abs());
        }
    }
    Ok(PdeResiduals { lambda, residuals })
}

/// Max deviation between the transcribed system and the generic `Q`
/// components on the same chart.
pub fn pde_consistency(spec: &PpWaveSpec, p: &PotentialData, plan: &SamplePlan) -> Result<f64> {
    let lambda = pde_lambda(spec, p, plan)?;
    let g = spec.metric();
    let q = qe::qe_tensor(&g, p, lambda);
    let points = qe::sample(&g, p, plan)?;
    let mut worst: f64 = 0.0;
    for eq in pde_system(spec, p, lambda) {
        let (i, j) = eq.component;
        for pt in &points {
            worst = worst.max((eq.residual.eval(pt)? - q.get(&[i, j]).eval(pt)?).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageIsotropy {
    pub isotropic: bool,
    /// Max `|g(w_a, w_b)|` over image basis vectors and points.
    pub residual: f64,
    /// Largest image rank seen.
    pub rank: usize,
}

/// Whether the image of the Ricci operator is totally isotropic at every point.
pub fn ricci_image_isotropy(g: &MetricField, plan: &SamplePlan) -> Result<ImageIsotropy> {
    image_isotropy_at(g, &plan.points(g, &[])?, plan.tolerance)
}

pub fn image_isotropy_at(g: &MetricField, points: &[EvalPoint], tolerance: f64) -> Result<ImageIsotropy> {
    let rho = ricci(g);
    let mut out = ImageIsotropy { isotropic: true, residual: 0.0, rank: 0 };
    for pt in points {
        let gm = g.matrix_at(pt)?;
        let ric = g.inverse_at(pt)? * linalg::matrix_at(&rho, pt)?;
        let basis = linalg::column_space(&ric);
        out.rank = out.rank.max(basis.len());
        for a in &basis {
            for b in &basis {
                out.residual = out.residual.max((a.transpose() * &gm * b)[(0, 0)].abs());
            }
        }
    }
    out.isotropic = out.residual <= tolerance;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{riemann, scalar_curvature};

    fn plan() -> SamplePlan {
        SamplePlan::new()
    }

    #[test]
    fn flat_and_simple_cases() {
        let flat = PpWaveSpec::parse(2, "0").unwrap();
        assert!(riemann(&flat.metric()).is_identically_zero());
        let cw = PpWaveSpec::parse(1, "x1^2").unwrap();
        assert_eq!(ricci(&cw.metric()).get(&[0, 0]), &Expr::int(-1));
        let lcf = PpWaveSpec::conformally_flat(2, Expr::int(-1), vec![Expr::zero(), Expr::zero()], Expr::zero()).unwrap();
        assert_eq!(lcf.h().to_string(), "-(x1^2 + x2^2)");
        assert_eq!(ricci(&lcf.metric()).get(&[0, 0]), &Expr::int(2));
    }

    #[test]
    fn rejects_v_dependence() {
        assert!(PpWaveSpec::parse(1, "v*x1").is_err());
        assert!(PpWaveSpec::cahen_wallach(&[0.0]).is_err());
        assert!(PpWaveSpec::two_symmetric(&[2.0, 1.0], &[vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(PpWaveSpec::two_symmetric(&[1.0, 2.0], &[vec![0.0, 1.0], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn analytic_curvature_matches_engine() {
        let spec = PpWaveSpec::parse(2, "x1*x2 + u*x1^3 - x2^2*x1 + 2*u^2*x2").unwrap();
        let a = spec.analytic_curvature();
        assert_eq!(a.get(&[0, 2, 0, 3]), &(Expr::ratio(-1, 2) * spec.h().diff("x1").diff("x2")));
        let e = riemann(&spec.metric());
        let pts = plan().with_count(10).points(&spec.metric(), &[]).unwrap();
        assert!(e.sub(&a).max_abs(&pts).unwrap() < 1e-10);
        assert!(scalar_curvature(&spec.metric()).is_zero());
    }

    #[test]
    fn plane_wave_detection() {
        let lcf = PpWaveSpec::parse(2, "sin(u)*(x1^2 + x2^2) + u*x1 + exp(u)").unwrap();
        assert!(lcf.is_plane_wave(&plan()).unwrap().plane_wave);
        assert!(!PpWaveSpec::parse(1, "x1^4").unwrap().is_plane_wave(&plan()).unwrap().plane_wave);
        assert!(PpWaveSpec::parse(1, "(3*u + 2)*x1^2").unwrap().is_plane_wave(&plan()).unwrap().plane_wave);
        let v = PpWaveSpec::parse(1, "sin(x1)").unwrap().is_plane_wave(&plan()).unwrap();
        assert!(!v.plane_wave && v.note.is_some());
    }

    #[test]
    fn two_symmetric_ricci() {
        let spec = PpWaveSpec::two_symmetric(&[1.0], &[vec![0.0]]).unwrap();
        assert_eq!(spec.h().to_string(), "u*x1^2");
        assert_eq!(ricci(&spec.metric()).get(&[0, 0]), &(-Expr::coord("u")));
        let cw = PpWaveSpec::cahen_wallach(&[-1.0]).unwrap();
        assert_eq!(ricci(&cw.metric()).get(&[0, 0]), &Expr::one());
    }

    #[test]
    fn pde_on_isotropic_golden_case() {
        let spec = PpWaveSpec::parse(1, "-x1^2").unwrap();
        let p = PotentialData::new(-Expr::coord("u"), 1.0).with_lambda(0.0);
        let r = pde_residuals(&spec, &p, &plan()).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
        assert!(pde_consistency(&spec, &p, &plan()).unwrap() < 1e-12);
    }

    #[test]
    fn pde_vv_equation_detects_v_potential() {
        let spec = PpWaveSpec::parse(2, "x1^2 - x2^2").unwrap();
        let mu = 0.75;
        let p = PotentialData::new(Expr::coord("v"), mu).with_lambda(0.0);
        let r = pde_residuals(&spec, &p, &plan()).unwrap();
        assert!((r.residuals[4] - mu).abs() < 1e-15);
        assert!(pde_consistency(&spec, &p, &plan()).unwrap() < 1e-12);
    }

    #[test]
    fn pde_soliton_branch() {
        let (n, a0) = (2usize, -1.5);
        let spec = PpWaveSpec::conformally_flat(n, Expr::real(a0), vec![Expr::zero(); n], Expr::zero()).unwrap();
        let f = Expr::real(n as f64 * a0 / 2.0) * Expr::coord("u").powi(2);
        let p = PotentialData::new(f, 0.0).with_lambda(0.0);
        assert_eq!(pde_residuals(&spec, &p, &plan()).unwrap().max(), 0.0);
    }

    #[test]
    fn image_isotropy() {
        let spec = PpWaveSpec::parse(2, "u*x1^2 - 3*x2^2").unwrap();
        let r = ricci_image_isotropy(&spec.metric(), &plan()).unwrap();
        assert!(r.isotropic && r.rank == 1);
        let flat = PpWaveSpec::parse(1, "u").unwrap();
        let r = ricci_image_isotropy(&flat.metric(), &plan()).unwrap();
        assert!(r.isotropic && r.rank == 0);
    }
}
