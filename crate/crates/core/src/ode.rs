//! The potential ODEs of the null-gradient branch.
//!
//! A potential `f = −(1/μ) log f₀(u)` on a pp-wave with
//! `ρ(∂_u,∂_u) = −n a(u)` is quasi-Einstein exactly when
//! `f₀'' = −n a(u) μ f₀`, equivalently `f'' − μ f'² − n a(u) = 0`.

use crate::error::{Error, ExprError, Result};
use crate::expr::{EvalPoint, Expr};

/// Fixed-step RK4 solution of `f₀'' = −n a(u) μ f₀` on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSolution {
    pub h: f64,
    pub interval: (f64, f64),
    pub u: Vec<f64>,
    pub f0: Vec<f64>,
    pub df0: Vec<f64>,
    /// Interpolated zeros of `f₀`, strictly increasing.
    pub sign_changes: Vec<f64>,
    /// Set when the integration stopped early on a non-finite state.
    pub truncated: Option<String>,
}

fn eval_u(a: &Expr, u: f64) -> Result<f64> {
    Ok(a.eval(&EvalPoint::new().with("u", u))?)
}

pub fn integrate_f0(a: &Expr, n: usize, mu: f64, init: (f64, f64), interval: (f64, f64), h: f64) -> Result<OdeSolution> {
    if mu == 0.0 {
        return Err(Error::Ode("mu must be nonzero; for mu = 0 use f'' = n a(u) directly".into()));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Ode(format!("step must be positive, got {h}")));
    }
    let (u0, u1) = interval;
    if !(u1 > u0) {
        return Err(Error::Ode(format!("empty interval [{u0}, {u1}]")));
    }
    if let Some(bad) = a.free_coords().iter().find(|c| &***c != "u") {
        return Err(Error::Ode(format!("a(u) mentions '{bad}'")));
    }
    let steps = ((u1 - u0) / h - 1e-9).ceil().max(1.0) as usize;
    let h = (u1 - u0) / steps as f64;
    let k = -(n as f64) * mu;
    let rhs = |u: f64, y: [f64; 2]| -> Result<[f64; 2]> { Ok([y[1], k * eval_u(a, u)? * y[0]]) };

    let mut sol = OdeSolution {
        h,
        interval,
        u: vec![u0],
        f0: vec![init.0],
        df0: vec![init.1],
        sign_changes: Vec::new(),
        truncated: None,
    };
    let mut y = [init.0, init.1];
    for i in 0..steps {
        let u = u0 + i as f64 * h;
        let k1 = rhs(u, y)?;
        let k2 = rhs(u + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]])?;
        let k3 = rhs(u + h / 2.0, [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]])?;
        let k4 = rhs(u + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
        let next = [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        let un = if i + 1 == steps { u1 } else { u0 + (i + 1) as f64 * h };
        if !next.iter().all(|v| v.is_finite()) {
            sol.truncated = Some(format!("non-finite state at u = {un}; solution truncated"));
            break;
        }
        y = next;
        sol.u.push(un);
        sol.f0.push(y[0]);
        sol.df0.push(y[1]);
    }
    sol.sign_changes = count_sign_changes(&sol.u, &sol.f0);
    Ok(sol)
}

/// Zeros of a sampled function where its sign strictly changes, located by
/// linear interpolation between the bracketing nonzero samples.
pub fn count_sign_changes(u: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for i in 0..f.len() {
        if f[i] == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if (f[j] < 0.0) != (f[i] < 0.0) {
                let z = match (j + 1..i).find(|&k| f[k] == 0.0) {
                    Some(k) => u[k],
                    None => u[j] - f[j] * (u[i] - u[j]) / (f[i] - f[j]),
                };
                out.push(z);
            }
        }
        last = Some(i);
    }
    out
}

impl OdeSolution {
    pub fn sign_change_count(&self) -> usize {
        self.sign_changes.len()
    }

    /// `f₀` at the grid node nearest to `u`.
    pub fn value_at(&self, u: f64) -> Option<f64> {
        let i = ((u - self.interval.0) / self.h).round();
        (i >= 0.0 && (i as usize) < self.f0.len()).then(|| self.f0[i as usize])
    }
}

/// `f, f', f''` on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPotential {
    pub h: f64,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub df: Vec<f64>,
    pub ddf: Vec<f64>,
}

/// `f = −(1/μ) log f₀`, `f' = −f₀'/(μ f₀)`, and `f''` by fourth-order
/// differences of `f'`. `within` restricts to a sub-interval.
pub fn potential_from_f0(sol: &OdeSolution, mu: f64, within: Option<(f64, f64)>) -> Result<SampledPotential> {
    if mu == 0.0 {
        return Err(Error::Ode("mu must be nonzero".into()));
    }
    let (lo, hi) = within.unwrap_or(sol.interval);
    let slack = 1e-9 * sol.h;
    let idx: Vec<usize> = (0..sol.u.len()).filter(|&i| sol.u[i] >= lo - slack && sol.u[i] <= hi + slack).collect();
    if idx.len() < 5 {
        return Err(Error::Ode(format!("need at least 5 grid points in [{lo}, {hi}], found {}", idx.len())));
    }
    if let Some(&i) = idx.iter().find(|&&i| sol.f0[i] <= 0.0) {
        return Err(ExprError::Domain {
            subtree: "log(f0(u))".into(),
            point: format!("u = {}", sol.u[i]),
            reason: format!("f0 = {} is not positive", sol.f0[i]),
        }
        .into());
    }
    let u: Vec<f64> = idx.iter().map(|&i| sol.u[i]).collect();
    let f: Vec<f64> = idx.iter().map(|&i| -sol.f0[i].ln() / mu).collect();
    let df: Vec<f64> = idx.iter().map(|&i| -sol.df0[i] / (mu * sol.f0[i])).collect();
    let ddf = derivative4(&df, sol.h);
    Ok(SampledPotential { h: sol.h, u, f, df, ddf })
}

/// Fourth-order finite-difference derivative on a uniform grid (≥ 5 points).
pub fn derivative4(g: &[f64], h: f64) -> Vec<f64> {
    let m = g.len();
    assert!(m >= 5, "need at least 5 samples");
    let c = 12.0 * h;
    (0..m)
        .map(|i| match i {
            0 => (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] - 3.0 * g[4]) / c,
            1 => (-3.0 * g[0] - 10.0 * g[1] + 18.0 * g[2] - 6.0 * g[3] + g[4]) / c,
            i if i == m - 2 => (3.0 * g[m - 1] + 10.0 * g[m - 2] - 18.0 * g[m - 3] + 6.0 * g[m - 4] - g[m - 5]) / c,
            i if i == m - 1 => {
                (25.0 * g[m - 1] - 48.0 * g[m - 2] + 36.0 * g[m - 3] - 16.0 * g[m - 4] + 3.0 * g[m - 5]) / c
            }
            i => (-g[i + 2] + 8.0 * g[i + 1] - 8.0 * g[i - 1] + g[i - 2]) / c,
        })
        .collect()
}

/// `max |f'' − μ f'² − n a(u)|` over the sampled grid.
pub fn theorem_ode_residual(pot: &SampledPotential, a: &Expr, n: usize, mu: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..pot.u.len() {
        let r = pot.ddf[i] - mu * pot.df[i] * pot.df[i] - n as f64 * eval_u(a, pot.u[i])?;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// `f'' − μ f'² − n a(u)` for a closed-form potential `f(u)`.
pub fn theorem_ode_expr(f: &Expr, a: &Expr, n: usize, mu: f64) -> Expr {
    let df = f.diff("u");
    Expr::sum([df.diff("u"), -(Expr::real(mu) * df.powi(2)), -(Expr::int(n as i64) * a)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_with;

    fn a(s: &str) -> Expr {
        parse_with(s, &["u"]).unwrap()
    }

    #[test]
    fn exponential_solution() {
        let sol = integrate_f0(&a("-1"), 1, 1.0, (1.0, 1.0), (0.0, 1.0), 1e-3).unwrap();
        assert_eq!(sol.u.len(), 1001);
        assert!((sol.f0.last().unwrap() - std::f64::consts::E).abs() < 1e-8);
        assert!(sol.sign_changes.is_empty());
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |h: f64| {
            let sol = integrate_f0(&a("-1"), 1, 1.0, (1.0, 1.0), (0.0, 1.0), h).unwrap();
            (sol.f0.last().unwrap() - std::f64::consts::E).abs()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((14.0..=18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn zero_coefficient_keeps_constant() {
        let sol = integrate_f0(&Expr::zero(), 2, 0.5, (1.0, 0.0), (0.0, 3.0), 0.1).unwrap();
        assert!(sol.f0.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn cosine_zeros() {
        let pi = std::f64::consts::PI;
        let sol = integrate_f0(&a("1"), 1, 1.0, (1.0, 0.0), (0.0, 4.0 * pi), 1e-3).unwrap();
        assert_eq!(sol.sign_change_count(), 4);
        for (k, z) in sol.sign_changes.iter().enumerate() {
            assert!((z - (pi / 2.0 + k as f64 * pi)).abs() < 1e-6, "{z}");
        }
    }

    #[test]
    fn airy_type_oscillates_and_log_fails_past_first_zero() {
        let sol = integrate_f0(&a("u"), 1, 1.0, (1.0, 0.0), (0.0, 20.0), 1e-3).unwrap();
        assert!(sol.sign_change_count() >= 2);
        let err = potential_from_f0(&sol, 1.0, None).unwrap_err();
        assert!(matches!(err, Error::Expr(ExprError::Domain { .. })));
        let first = sol.sign_changes[0];
        let pot = potential_from_f0(&sol, 1.0, Some((0.0, first - 0.5))).unwrap();
        assert!(theorem_ode_residual(&pot, &a("u"), 1, 1.0).unwrap() < 1e-6);
    }

    #[test]
    fn log_transform_of_exponential() {
        let sol = integrate_f0(&a("-1"), 1, 1.0, (1.0, 1.0), (0.0, 1.0), 1e-3).unwrap();
        let pot = potential_from_f0(&sol, 1.0, None).unwrap();
        for (u, f) in pot.u.iter().zip(&pot.f) {
            assert!((f + u).abs() < 1e-9);
        }
        assert!(theorem_ode_residual(&pot, &a("-1"), 1, 1.0).unwrap() < 1e-6);
        let sol = integrate_f0(&Expr::zero(), 1, 1.0, (1.0, 0.0), (0.0, 1.0), 0.1).unwrap();
        assert!(potential_from_f0(&sol, 1.0, None).unwrap().f.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn closed_form_residuals() {
        assert!(theorem_ode_expr(&-Expr::coord("u"), &Expr::int(-1), 1, 1.0).is_zero());
        let f = Expr::ratio(-3, 2) * Expr::coord("u").powi(2);
        assert!(theorem_ode_expr(&f, &Expr::int(-1), 3, 0.0).is_zero());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integrate_f0(&a("1"), 1, 0.0, (1.0, 0.0), (0.0, 1.0), 0.1).is_err());
        assert!(integrate_f0(&a("1"), 1, 1.0, (1.0, 0.0), (0.0, 1.0), 0.0).is_err());
        assert!(integrate_f0(&a("1"), 1, 1.0, (1.0, 0.0), (1.0, 0.0), 0.1).is_err());
    }

    #[test]
    fn overflow_truncates() {
        let sol = integrate_f0(&a("-1000"), 1, 1.0, (1.0, 1.0), (0.0, 100.0), 0.01).unwrap();
        assert!(sol.truncated.is_some());
        assert!(sol.f0.iter().all(|v| v.is_finite()));
    }
}
