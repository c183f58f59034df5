//! Levi-Civita connection, curvature and derived tensors in coordinates.
//!
//! Conventions:
//!
//! * `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`.
//! * [`riemann_operator`] stores the `∂_l` component of `R(∂_i,∂_j)∂_k` at
//!   index `(l, k, i, j)`.
//! * [`riemann`] is the 4-tensor `R(X,Y,Z,T) = g(R(X,Y)T, Z)`, which makes
//!   the pp-wave component `R(∂_u,∂_i,∂_u,∂_j)` equal to `−½ ∂²_ij H` and
//!   agrees with the constant-curvature form `K (g(X,Z)g(Y,T) − g(X,T)g(Y,Z))`.
//! * `ρ(Y,Z) = tr(X ↦ R(X,Y)Z)`, so that `ρ(∂_u,∂_u) = −½ Σ ∂²_ii H` on
//!   pp-waves and `ρ = (d−1) K g` on space forms.
//! * Covariant derivatives put the differentiating slot first:
//!   `(∇T)(m, a…) = (∇_{∂_m} T)(a…)`.

use super::metric::MetricField;
use super::sample::SamplePlan;
use super::tensor::{TensorField, Variance};
use crate::error::Result;
use crate::expr::{EvalPoint, Expr};

/// `Γ^k_ij` at index `(k, i, j)`.
pub fn christoffel(g: &MetricField) -> TensorField {
    g.cache
        .christoffel
        .get_or_init(|| {
            let d = g.dim();
            let chart = g.chart().clone();
            // dg[l][i][j] = ∂_l g_ij
            let dg: Vec<Expr> = (0..d * d * d)
                .map(|k| g.component((k / d) % d, k % d).diff(chart.coord(k / (d * d))))
                .collect();
            let dgc = |l: usize, i: usize, j: usize| &dg[(l * d + i) * d + j];
            let first_kind: Vec<Expr> = (0..d * d * d)
                .map(|k| {
                    let (l, i, j) = (k / (d * d), (k / d) % d, k % d);
                    Expr::ratio(1, 2) * Expr::sum([dgc(i, j, l).clone(), dgc(j, i, l).clone(), -dgc(l, i, j)])
                })
                .collect();
            TensorField::from_fn(chart.clone(), vec![Variance::Upper, Variance::Lower, Variance::Lower], |idx| {
                let (k, i, j) = (idx[0], idx[1], idx[2]);
                Expr::sum((0..d).filter_map(|l| {
                    let inv = g.inverse(k, l);
                    let gam = &first_kind[(l * d + i) * d + j];
                    (!inv.is_zero() && !gam.is_zero()).then(|| inv * gam)
                }))
            })
            .with_symmetry(1, 2)
        })
        .clone()
}

/// `∂_l`-component of `R(∂_i,∂_j)∂_k` at index `(l, k, i, j)`.
pub fn riemann_operator(g: &MetricField) -> TensorField {
    g.cache
        .riemann_operator
        .get_or_init(|| {
            let d = g.dim();
            let gamma = christoffel(g);
            let chart = g.chart().clone();
            let gm = |a: usize, b: usize, c: usize| gamma.get(&[a, b, c]);
            let mut comps = vec![Expr::zero(); d.pow(4)];
            let at = |l: usize, k: usize, i: usize, j: usize| ((l * d + k) * d + i) * d + j;
            for l in 0..d {
                for k in 0..d {
                    for i in 0..d {
                        for j in (i + 1)..d {
                            let mut terms = vec![gm(l, j, k).diff(chart.coord(i)), -gm(l, i, k).diff(chart.coord(j))];
                            for m in 0..d {
                                let (a, b) = (gm(l, i, m), gm(m, j, k));
                                if !a.is_zero() && !b.is_zero() {
                                    terms.push(a * b);
                                }
                                let (a, b) = (gm(l, j, m), gm(m, i, k));
                                if !a.is_zero() && !b.is_zero() {
                                    terms.push(-(a * b));
                                }
                            }
                            let e = Expr::sum(terms);
                            comps[at(l, k, j, i)] = -e.clone();
                            comps[at(l, k, i, j)] = e;
                        }
                    }
                }
            }
            TensorField::new(chart, vec![Variance::Upper, Variance::Lower, Variance::Lower, Variance::Lower], comps)
        })
        .clone()
}

/// `R(X,Y,Z,T) = g(R(X,Y)T, Z)` in coordinates.
pub fn riemann(g: &MetricField) -> TensorField {
    g.cache
        .riemann
        .get_or_init(|| {
            let d = g.dim();
            let op = riemann_operator(g);
            TensorField::from_fn(g.chart().clone(), vec![Variance::Lower; 4], |idx| {
                let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
                Expr::sum((0..d).filter_map(|m| {
                    let gk = g.component(k, m);
                    let r = op.get(&[m, l, i, j]);
                    (!gk.is_zero() && !r.is_zero()).then(|| gk * r)
                }))
            })
        })
        .clone()
}

pub fn ricci(g: &MetricField) -> TensorField {
    g.cache
        .ricci
        .get_or_init(|| {
            let d = g.dim();
            let op = riemann_operator(g);
            TensorField::from_fn(g.chart().clone(), vec![Variance::Lower; 2], |idx| {
                let (j, k) = (idx[0], idx[1]);
                Expr::sum((0..d).map(|i| op.get(&[i, k, i, j]).clone()))
            })
            .with_symmetry(0, 1)
        })
        .clone()
}

/// `τ = g^{ij} ρ_ij`.
pub fn scalar_curvature(g: &MetricField) -> Expr {
    g.cache.scalar.get_or_init(|| trace(&ricci(g), g)).clone()
}

/// Metric trace `g^{ij} T_ij` of a covariant 2-tensor.
pub fn trace(t: &TensorField, g: &MetricField) -> Expr {
    let d = g.dim();
    let mut terms = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let (a, b) = (g.inverse(i, j), t.get(&[i, j]));
            if !a.is_zero() && !b.is_zero() {
                terms.push(a * b);
            }
        }
    }
    Expr::sum(terms)
}

/// Levi-Civita covariant derivative; the new slot comes first. A scalar
/// yields its differential.
pub fn covariant_derivative(t: &TensorField, g: &MetricField) -> TensorField {
    let d = g.dim();
    let gamma = christoffel(g);
    let chart = g.chart().clone();
    let rank = t.rank();
    let mut variance = vec![Variance::Lower];
    variance.extend_from_slice(t.variance());
    let slots = t.variance().to_vec();
    TensorField::from_fn(chart.clone(), variance, |idx| {
        let m = idx[0];
        let a = &idx[1..];
        let mut terms = vec![t.get(a).diff(chart.coord(m))];
        let mut b = a.to_vec();
        for s in 0..rank {
            for p in 0..d {
                b[s] = p;
                let comp = t.get(&b);
                if comp.is_zero() {
                    continue;
                }
                match slots[s] {
                    Variance::Upper => {
                        let gam = gamma.get(&[a[s], m, p]);
                        if !gam.is_zero() {
                            terms.push(gam * comp);
                        }
                    }
                    Variance::Lower => {
                        let gam = gamma.get(&[p, m, a[s]]);
                        if !gam.is_zero() {
                            terms.push(-(gam * comp));
                        }
                    }
                }
            }
            b[s] = a[s];
        }
        Expr::sum(terms)
    })
}

/// `div(T)_j = g^{mi} (∇_m T)_{ij}` for a covariant 2-tensor.
pub fn divergence(t: &TensorField, g: &MetricField) -> TensorField {
    let d = g.dim();
    let nabla = covariant_derivative(t, g);
    TensorField::from_fn(g.chart().clone(), vec![Variance::Lower], |idx| {
        let j = idx[0];
        let mut terms = Vec::new();
        for m in 0..d {
            for i in 0..d {
                let (a, b) = (g.inverse(m, i), nabla.get(&[m, i, j]));
                if !a.is_zero() && !b.is_zero() {
                    terms.push(a * b);
                }
            }
        }
        Expr::sum(terms)
    })
}

/// The 1-form `df`.
pub fn differential(f: &Expr, g: &MetricField) -> TensorField {
    let chart = g.chart().clone();
    TensorField::from_fn(chart.clone(), vec![Variance::Lower], |idx| f.diff(chart.coord(idx[0])))
}

/// `∇f = g^{ij} ∂_j f ∂_i`.
pub fn gradient(f: &Expr, g: &MetricField) -> TensorField {
    raise(&differential(f, g), g)
}

/// Raises a 1-form to a vector.
pub fn raise(form: &TensorField, g: &MetricField) -> TensorField {
    let d = g.dim();
    TensorField::from_fn(g.chart().clone(), vec![Variance::Upper], |idx| {
        Expr::sum((0..d).filter_map(|j| {
            let (a, b) = (g.inverse(idx[0], j), form.get(&[j]));
            (!a.is_zero() && !b.is_zero()).then(|| a * b)
        }))
    })
}

/// `Hes_f(i, j) = ∂²_ij f − Γ^k_ij ∂_k f`.
pub fn hessian(f: &Expr, g: &MetricField) -> TensorField {
    covariant_derivative(&differential(f, g), g).with_symmetry(0, 1)
}

/// `Δf = g^{ij} Hes_f(i, j)`.
pub fn laplacian(f: &Expr, g: &MetricField) -> Expr {
    trace(&hessian(f, g), g)
}

/// `‖∇f‖² = g^{ij} ∂_i f ∂_j f`.
pub fn grad_norm_sq(f: &Expr, g: &MetricField) -> Expr {
    let df = differential(f, g);
    let d = g.dim();
    let mut terms = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let (a, b, c) = (g.inverse(i, j), df.get(&[i]), df.get(&[j]));
            if !a.is_zero() && !b.is_zero() && !c.is_zero() {
                terms.push(Expr::product([a.clone(), b.clone(), c.clone()]));
            }
        }
    }
    Expr::sum(terms)
}

/// Schouten tensor `C = (1/n)(ρ − τ g / (2(n+1)))`, `n = d − 2`.
pub fn schouten(g: &MetricField) -> TensorField {
    let n = g.n() as i64;
    let rho = ricci(g);
    let tau = scalar_curvature(g);
    let shift = Expr::ratio(1, 2 * (n + 1)) * tau;
    TensorField::from_fn(g.chart().clone(), vec![Variance::Lower; 2], |idx| {
        Expr::ratio(1, n) * (rho.get(idx) - &shift * g.component(idx[0], idx[1]))
    })
    .with_symmetry(0, 1)
}

/// The part of the curvature tensor built from `ρ`, `τ` and `g` alone; it
/// equals `R` exactly when the Weyl tensor vanishes.
pub fn ricci_part_of_curvature(g: &MetricField) -> TensorField {
    let n = g.n() as i64;
    let rho = ricci(g);
    let tau = scalar_curvature(g);
    let a = Expr::ratio(1, n * (n + 1)) * tau;
    let b = Expr::ratio(1, n);
    let gc = |i: usize, j: usize| g.component(i, j).clone();
    let rc = |i: usize, j: usize| rho.get(&[i, j]).clone();
    TensorField::from_fn(g.chart().clone(), vec![Variance::Lower; 4], |idx| {
        let (x, y, z, t) = (idx[0], idx[1], idx[2], idx[3]);
        let metric_part = gc(x, t) * gc(y, z) - gc(x, z) * gc(y, t);
        let ricci_part = Expr::sum([
            rc(x, z) * gc(y, t),
            rc(y, t) * gc(x, z),
            -(rc(x, t) * gc(y, z)),
            -(rc(y, z) * gc(x, t)),
        ]);
        &a * metric_part + &b * ricci_part
    })
}

pub fn weyl(g: &MetricField) -> TensorField {
    riemann(g).sub(&ricci_part_of_curvature(g))
}

/// `D(X,Y,Z) = (∇_X T)(Y,Z) − (∇_Y T)(X,Z)`.
pub fn codazzi_defect(t: &TensorField, g: &MetricField) -> TensorField {
    let nabla = covariant_derivative(t, g);
    TensorField::from_fn(g.chart().clone(), vec![Variance::Lower; 3], |idx| {
        let (x, y, z) = (idx[0], idx[1], idx[2]);
        nabla.get(&[x, y, z]) - nabla.get(&[y, x, z])
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LcfCriterion {
    /// `d ≥ 4`: the Weyl tensor vanishes.
    Weyl,
    /// `d = 3`: the Schouten tensor is Codazzi.
    SchoutenCodazzi,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LcfVerdict {
    pub conformally_flat: bool,
    pub residual: f64,
    pub criterion: LcfCriterion,
}

pub fn lcf_residual_tensor(g: &MetricField) -> (TensorField, LcfCriterion) {
    if g.dim() >= 4 {
        (weyl(g), LcfCriterion::Weyl)
    } else {
        (codazzi_defect(&schouten(g), g), LcfCriterion::SchoutenCodazzi)
    }
}

/// Local conformal flatness at the plan's points, to `plan.tolerance`.
pub fn is_locally_conformally_flat(g: &MetricField, plan: &SamplePlan) -> Result<LcfVerdict> {
    let points = plan.points(g, &[])?;
    lcf_at(g, &points, plan.tolerance)
}

pub fn lcf_at(g: &MetricField, points: &[EvalPoint], tolerance: f64) -> Result<LcfVerdict> {
    let (t, criterion) = lcf_residual_tensor(g);
    let residual = t.max_abs(points)?;
    Ok(LcfVerdict { conformally_flat: residual <= tolerance, residual, criterion })
}

/// Sectional curvature of the coordinate plane `(∂_a, ∂_b)` at `p`.
pub fn coordinate_sectional_curvature(g: &MetricField, p: &EvalPoint, a: usize, b: usize) -> Result<f64> {
    let r = riemann(g).get(&[a, b, a, b]).eval(p)?;
    let m = g.matrix_at(p)?;
    Ok(r / (m[(a, a)] * m[(b, b)] - m[(a, b)] * m[(a, b)]))
}
