//! Warped products `ε dt² + ψ(t)² g_N` over constant-curvature fibers, the
//! conformal change `g̃ = e^{−2f/n} g`, and the correspondence between
//! Einstein warped products and quasi-Einstein bases.

use crate::error::{Error, Result};
use crate::expr::{EvalPoint, Expr};
use crate::geometry::{
    coordinate_sectional_curvature, differential, grad_norm_sq, hessian, laplacian, lcf_at, ricci, riemann,
    scalar_curvature, CoordinateChart, MetricField, SamplePlan, TensorField, Variance, DEFAULT_INTERVAL,
};
use crate::qe::{self, PotentialData, QeReport};

/// Lower edge of the sampling box for coordinates that must stay positive.
const POSITIVE_BOX: (f64, f64) = (0.5, 2.0);

/// Explicit model metrics of constant sectional curvature.
///
/// | model | metric | K |
/// |---|---|---|
/// | `FlatEuclidean` | `Σ dy_i²` | 0 |
/// | `FlatLorentzian` | `−dy_1² + Σ_{i>1} dy_i²` | 0 |
/// | `Sphere` | `4 Σ dy_i² / (1 + |y|²)²` | +1 |
/// | `Hyperbolic` | `Σ dy_i² / y_m²`, `y_m > 0` | −1 |
/// | `DeSitter` | `(−dy_1² + Σ_{i>1} dy_i²) / y_1²`, `y_1 > 0` | +1 |
/// | `AntiDeSitter` | `(−dy_1² + Σ_{i>1} dy_i²) / y_m²`, `y_m > 0` | −1 |
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FiberModel {
    FlatEuclidean,
    FlatLorentzian,
    Sphere,
    Hyperbolic,
    DeSitter,
    AntiDeSitter,
}

impl FiberModel {
    pub const ALL: [FiberModel; 6] = [
        FiberModel::FlatEuclidean,
        FiberModel::FlatLorentzian,
        FiberModel::Sphere,
        FiberModel::Hyperbolic,
        FiberModel::DeSitter,
        FiberModel::AntiDeSitter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FiberModel::FlatEuclidean => "flat",
            FiberModel::FlatLorentzian => "flat_lorentzian",
            FiberModel::Sphere => "sphere",
            FiberModel::Hyperbolic => "hyperbolic",
            FiberModel::DeSitter => "de_sitter",
            FiberModel::AntiDeSitter => "anti_de_sitter",
        }
    }

    pub fn from_name(name: &str) -> Option<FiberModel> {
        FiberModel::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn curvature(self) -> f64 {
        match self {
            FiberModel::FlatEuclidean | FiberModel::FlatLorentzian => 0.0,
            FiberModel::Sphere | FiberModel::DeSitter => 1.0,
            FiberModel::Hyperbolic | FiberModel::AntiDeSitter => -1.0,
        }
    }

    pub fn is_lorentzian(self) -> bool {
        matches!(self, FiberModel::FlatLorentzian | FiberModel::DeSitter | FiberModel::AntiDeSitter)
    }

    /// Index of the coordinate that must stay positive, if any.
    fn positive_coord(self, dim: usize) -> Option<usize> {
        match self {
            FiberModel::Hyperbolic | FiberModel::AntiDeSitter => Some(dim - 1),
            FiberModel::DeSitter => Some(0),
            _ => None,
        }
    }

    /// Components on coordinates `names`; curved models need `dim ≥ 2`.
    pub fn components(self, names: &[String]) -> Result<Vec<Vec<Expr>>> {
        let m = names.len();
        if m == 0 || (self.curvature() != 0.0 && m < 2) || (self.is_lorentzian() && m < 2) {
            return Err(Error::Precondition(format!("fiber model '{}' needs dimension >= 2", self.name())));
        }
        let y = |i: usize| Expr::coord(&names[i]);
        let signs: Vec<Expr> =
            (0..m).map(|i| if i == 0 && self.is_lorentzian() { Expr::int(-1) } else { Expr::one() }).collect();
        let factor = match self {
            FiberModel::FlatEuclidean | FiberModel::FlatLorentzian => Expr::one(),
            FiberModel::Sphere => {
                Expr::int(4) * (Expr::one() + Expr::sum((0..m).map(|i| y(i).powi(2)))).powi(-2)
            }
            FiberModel::Hyperbolic | FiberModel::AntiDeSitter => y(m - 1).powi(-2),
            FiberModel::DeSitter => y(0).powi(-2),
        };
        Ok((0..m)
            .map(|i| (0..m).map(|j| if i == j { &factor * &signs[i] } else { Expr::zero() }).collect())
            .collect())
    }
}

/// `ε dt² + ψ(t)² g_N` with `N` a model of dimension `fiber_dim = n + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedSpec {
    pub epsilon: i8,
    pub psi: Expr,
    pub fiber: FiberModel,
    pub fiber_dim: usize,
}

impl WarpedSpec {
    pub fn new(epsilon: i8, psi: Expr, fiber: FiberModel, fiber_dim: usize) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Precondition(format!("epsilon must be +1 or -1, got {epsilon}")));
        }
        if fiber_dim < 2 {
            return Err(Error::Precondition("fiber dimension must be at least 2".into()));
        }
        if psi.free_coords().iter().any(|c| &**c != "t") {
            return Err(Error::Precondition(format!("warping function `{psi}` must depend on t only")));
        }
        if (epsilon == -1) == fiber.is_lorentzian() {
            return Err(Error::Precondition(format!(
                "epsilon = {epsilon} with a {} fiber is not Lorentzian",
                if fiber.is_lorentzian() { "Lorentzian" } else { "Riemannian" }
            )));
        }
        Ok(WarpedSpec { epsilon, psi, fiber, fiber_dim })
    }

    /// `t, x1, …, x_{n+1}`.
    pub fn coordinate_names(&self) -> Vec<String> {
        std::iter::once("t".to_string()).chain((1..=self.fiber_dim).map(|i| format!("x{i}"))).collect()
    }

    pub fn n(&self) -> usize {
        self.fiber_dim - 1
    }

    pub fn chart(&self) -> CoordinateChart {
        let names = self.coordinate_names();
        let chart = CoordinateChart::new(&names).expect("warped coordinate names are valid");
        match self.fiber.positive_coord(self.fiber_dim) {
            Some(k) => {
                let bounds = (0..names.len()).map(|i| if i == k + 1 { POSITIVE_BOX } else { DEFAULT_INTERVAL }).collect();
                chart.with_bounds(bounds).expect("bounds match the chart")
            }
            None => chart,
        }
    }

    pub fn metric(&self) -> Result<MetricField> {
        let names = self.coordinate_names();
        let fiber = self.fiber.components(&names[1..])?;
        let psi2 = self.psi.clone().powi(2);
        let d = names.len();
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| match (i, j) {
                        (0, 0) => Expr::int(self.epsilon as i64),
                        (0, _) | (_, 0) => Expr::zero(),
                        _ => &psi2 * &fiber[i - 1][j - 1],
                    })
                    .collect()
            })
            .collect();
        MetricField::new(self.chart(), rows)
    }

    /// `ψ > 0` at the plan's points and the fiber curvature
    /// `K_N = ψ² K + ε ψ'²` is the same on every fiber coordinate plane.
    /// Returns the spread of `K_N` over planes and points.
    pub fn validate(&self, plan: &SamplePlan) -> Result<f64> {
        let g = self.metric()?;
        let points = plan.points(&g, &[])?;
        let dpsi = self.psi.diff("t");
        let mut values = Vec::new();
        for p in &points {
            let psi = self.psi.eval(p)?;
            if psi <= 0.0 {
                return Err(Error::Precondition(format!("warping function is not positive at {p}")));
            }
            let eps_dpsi2 = self.epsilon as f64 * dpsi.eval(p)?.powi(2);
            for a in 1..g.dim() {
                for b in (a + 1)..g.dim() {
                    let k = coordinate_sectional_curvature(&g, p, a, b)?;
                    values.push(psi * psi * k + eps_dpsi2);
                }
            }
        }
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        Ok(if values.is_empty() { 0.0 } else { hi - lo })
    }
}

/// `e^{−2f/n} g`.
pub fn conformal_metric(g: &MetricField, f: &Expr) -> Result<MetricField> {
    let n = g.n() as i64;
    g.scaled(&(Expr::ratio(-2, n) * f).exp())
}

/// `ρ_g + Hes_f + (1/n) df⊗df + (1/n)(Δf − ‖∇f‖²) g`, the Ricci tensor of
/// the conformal metric predicted from `g`.
pub fn conformal_ricci_formula(g: &MetricField, f: &Expr) -> TensorField {
    let inv_n = Expr::ratio(1, g.n() as i64);
    let rho = ricci(g);
    let hes = hessian(f, g);
    let df = differential(f, g);
    let scalar = &inv_n * (laplacian(f, g) - grad_norm_sq(f, g));
    TensorField::from_fn(g.chart().clone(), vec![Variance::Lower; 2], |idx| {
        let (i, j) = (idx[0], idx[1]);
        Expr::sum([
            rho.get(idx).clone(),
            hes.get(idx).clone(),
            Expr::product([inv_n.clone(), df.get(&[i]).clone(), df.get(&[j]).clone()]),
            &scalar * g.component(i, j),
        ])
    })
}

/// Max deviation of the engine's `ρ_{g̃}` from [`conformal_ricci_formula`].
pub fn conformal_ricci_check(g: &MetricField, f: &Expr, plan: &SamplePlan) -> Result<f64> {
    let gt = conformal_metric(g, f)?;
    let points = plan.points(g, std::slice::from_ref(f))?;
    ricci(&gt).sub(&conformal_ricci_formula(g, f)).max_abs(&points)
}

/// `ρ − (τ/d) g`.
pub fn einstein_defect(g: &MetricField) -> TensorField {
    let tau = scalar_curvature(g);
    let k = Expr::ratio(1, g.dim() as i64) * tau;
    ricci(g).sub(&g.as_tensor().map(|e| &k * e))
}

/// Local certificate that `g̃ = e^{−2f/n} g` has constant curvature.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalCertificate {
    pub einstein_residual: f64,
    /// Weyl (`d ≥ 4`) or Schouten–Codazzi (`d = 3`) residual of `g̃`.
    pub lcf_residual: f64,
    /// Spread of coordinate sectional curvatures of `g̃`.
    pub sectional_spread: f64,
    /// Mean coordinate sectional curvature of `g̃`.
    pub curvature: f64,
    /// Max component of the curvature tensor of `g̃`.
    pub riemann_max: f64,
    /// Samples of `(1/n)(1/n − 1)‖∇f‖²`.
    pub factor_samples: Vec<f64>,
}

impl ConformalCertificate {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.einstein_residual <= tolerance && self.lcf_residual <= tolerance && self.sectional_spread <= tolerance
    }
}

pub fn conformal_certificate(g: &MetricField, f: &Expr, points: &[EvalPoint]) -> Result<ConformalCertificate> {
    let gt = conformal_metric(g, f)?;
    let einstein_residual = einstein_defect(&gt).max_abs(points)?;
    let lcf_residual = lcf_at(&gt, points, f64::INFINITY)?.residual;
    let mut ks = Vec::new();
    for p in points {
        for a in 0..gt.dim() {
            for b in (a + 1)..gt.dim() {
                ks.push(coordinate_sectional_curvature(&gt, p, a, b)?);
            }
        }
    }
    let (lo, hi) = ks.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let n = g.n() as f64;
    let norm = grad_norm_sq(f, g);
    Ok(ConformalCertificate {
        einstein_residual,
        lcf_residual,
        sectional_spread: if ks.is_empty() { 0.0 } else { hi - lo },
        curvature: ks.iter().sum::<f64>() / ks.len().max(1) as f64,
        riemann_max: riemann(&gt).max_abs(points)?,
        factor_samples: points
            .iter()
            .map(|p| norm.eval(p).map(|v| (1.0 / n) * (1.0 / n - 1.0) * v))
            .collect::<Result<_, _>>()?,
    })
}

/// `g_M ⊕ φ² g_F` on the base coordinates followed by `y1..yk`.
pub fn warped_over(base: &MetricField, phi: &Expr, fiber: FiberModel, fiber_dim: usize) -> Result<MetricField> {
    let fiber_names: Vec<String> = (1..=fiber_dim).map(|i| format!("y{i}")).collect();
    let fib = fiber.components(&fiber_names)?;
    let base_names = base.chart().coords();
    let names: Vec<String> = base_names.iter().cloned().chain(fiber_names.iter().cloned()).collect();
    let db = base.dim();
    let d = names.len();
    let phi2 = phi.clone().powi(2);
    let rows = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| match (i < db, j < db) {
                    (true, true) => base.component(i, j).clone(),
                    (false, false) => &phi2 * &fib[i - db][j - db],
                    _ => Expr::zero(),
                })
                .collect()
        })
        .collect();
    let mut chart = CoordinateChart::new(&names)?;
    let positive = fiber.positive_coord(fiber_dim).map(|k| k + db);
    if base.chart().bounds().is_some() || positive.is_some() {
        let bounds = (0..d)
            .map(|i| match base.chart().bounds() {
                Some(b) if i < db => b[i],
                _ if Some(i) == positive => POSITIVE_BOX,
                _ => DEFAULT_INTERVAL,
            })
            .collect();
        chart = chart.with_bounds(bounds)?;
    }
    MetricField::new(chart, rows)
}

/// If `g_M ⊕ φ² g_F` is Einstein, `(g_M, −k log φ, 1/k)` is quasi-Einstein
/// with `k = dim F`; returns the quasi-Einstein report of the base.
pub fn einstein_warped_to_qe(
    base: &MetricField,
    phi: &Expr,
    fiber: FiberModel,
    fiber_dim: usize,
    plan: &SamplePlan,
) -> Result<QeReport> {
    let total = warped_over(base, phi, fiber, fiber_dim)?;
    let points = plan.points(&total, std::slice::from_ref(phi))?;
    let defect = einstein_defect(&total).max_abs(&points)?;
    if defect > plan.tolerance {
        return Err(Error::Precondition(format!(
            "warped product is not Einstein: max |rho - tau g / d| = {defect:e}"
        )));
    }
    let k = fiber_dim as f64;
    let p = PotentialData::new(Expr::real(-k) * phi.clone().log(), 1.0 / k);
    let lambda = qe::solve_lambda(base, &p, plan)?;
    qe::qe_report(base, &p.with_lambda(lambda), plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::expr::parse_with;

    fn exp_t() -> Expr {
        parse_with("exp(t)", &["t"]).unwrap()
    }

    #[test]
    fn fiber_models_have_their_curvature() {
        for model in FiberModel::ALL {
            let eps = if model.is_lorentzian() { 1 } else { -1 };
            let spec = WarpedSpec::new(eps, Expr::one(), model, 3).unwrap();
            assert!(spec.validate(&SamplePlan::new()).unwrap() < 1e-10, "{model:?}");
            let g = spec.metric().unwrap();
            let p = SamplePlan::new().points(&g, &[]).unwrap()[0].clone();
            let k = coordinate_sectional_curvature(&g, &p, 1, 2).unwrap();
            assert!((k - model.curvature()).abs() < 1e-10, "{model:?}: {k}");
        }
    }

    #[test]
    fn rejects_non_lorentzian_combinations() {
        assert!(WarpedSpec::new(1, Expr::one(), FiberModel::Sphere, 2).is_err());
        assert!(WarpedSpec::new(-1, Expr::one(), FiberModel::DeSitter, 2).is_err());
        assert!(WarpedSpec::new(-1, Expr::coord("x1"), FiberModel::FlatEuclidean, 2).is_err());
    }

    #[test]
    fn warped_products_are_conformally_flat() {
        let psi = parse_with("2 + sin(t)", &["t"]).unwrap();
        for model in [FiberModel::Sphere, FiberModel::FlatEuclidean, FiberModel::Hyperbolic] {
            let g = WarpedSpec::new(-1, psi.clone(), model, 3).unwrap().metric().unwrap();
            let pts = SamplePlan::new().with_count(4).points(&g, &[]).unwrap();
            assert!(lcf_at(&g, &pts, 1e-10).unwrap().conformally_flat, "{model:?}");
        }
    }

    #[test]
    fn conformal_ricci_formula_is_an_identity() {
        let g = corpus::de_sitter_slice(1);
        let f = parse_with("t^2 + x1*x2", &["t", "x1", "x2"]).unwrap();
        assert!(conformal_ricci_check(&g, &f, &SamplePlan::new()).unwrap() < 1e-8);
        assert_eq!(conformal_ricci_check(&g, &Expr::zero(), &SamplePlan::new()).unwrap(), 0.0);
        let pp = crate::PpWaveSpec::parse(2, "u*x1^2 - x2^2").unwrap().metric();
        let f = parse_with("sin(u)", &["u"]).unwrap();
        assert!(conformal_ricci_check(&pp, &f, &SamplePlan::new()).unwrap() < 1e-8);
    }

    #[test]
    fn conformal_branch_image_is_flat() {
        for n in 1..=2 {
            let g = corpus::de_sitter_slice(n);
            let f = Expr::int(n as i64) * Expr::coord("t");
            let pts = SamplePlan::new().points(&g, &[]).unwrap();
            let cert = conformal_certificate(&g, &f, &pts).unwrap();
            assert!(cert.riemann_max < 1e-12 && cert.holds(1e-10), "{cert:?}");
        }
    }

    #[test]
    fn einstein_warped_correspondence() {
        let base = corpus::de_sitter_slice(1);
        let r = einstein_warped_to_qe(&base, &exp_t(), FiberModel::FlatEuclidean, 1, &SamplePlan::new()).unwrap();
        assert!(r.qe_residual < 1e-8 && (r.lambda - 3.0).abs() < 1e-10);
        // A constant warp over a non-flat base leaves the fiber Ricci-flat.
        let err = einstein_warped_to_qe(&base, &Expr::int(2), FiberModel::FlatEuclidean, 1, &SamplePlan::new());
        assert!(matches!(err, Err(Error::Precondition(_))));
        let flat = corpus::minkowski(3);
        let r = einstein_warped_to_qe(&flat, &Expr::int(2), FiberModel::FlatEuclidean, 1, &SamplePlan::new()).unwrap();
        assert_eq!(r.qe_residual, 0.0);
        let err = einstein_warped_to_qe(&flat, &exp_t(), FiberModel::FlatEuclidean, 1, &SamplePlan::new());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }
}
