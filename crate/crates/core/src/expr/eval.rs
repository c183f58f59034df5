use std::collections::BTreeMap;
use std::fmt;

use super::{Expr, Func, Node};
use crate::error::ExprError;

/// Numeric bindings for coordinates and parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalPoint {
    pub coords: BTreeMap<String, f64>,
    pub params: BTreeMap<String, f64>,
}

impl EvalPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_coords<S: AsRef<str>>(names: &[S], values: &[f64]) -> Self {
        EvalPoint {
            coords: names.iter().map(|n| n.as_ref().to_string()).zip(values.iter().copied()).collect(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, coord: &str, value: f64) -> Self {
        self.coords.insert(coord.to_string(), value);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_params(mut self, params: &BTreeMap<String, f64>) -> Self {
        self.params.extend(params.iter().map(|(k, v)| (k.clone(), *v)));
        self
    }

    pub fn coord(&self, name: &str) -> Option<f64> {
        self.coords.get(name).copied()
    }

    /// Copy with one coordinate shifted by `delta`.
    pub fn shifted(&self, coord: &str, delta: f64) -> Self {
        let mut p = self.clone();
        if let Some(v) = p.coords.get_mut(coord) {
            *v += delta;
        }
        p
    }
}

impl fmt::Display for EvalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.coords.iter().chain(self.params.iter()).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")
    }
}

impl Expr {
    /// Evaluates in IEEE double precision.
    pub fn eval(&self, p: &EvalPoint) -> Result<f64, ExprError> {
        let domain = |reason: &str| ExprError::Domain {
            subtree: self.to_string(),
            point: p.to_string(),
            reason: reason.to_string(),
        };
        let value = match self.node() {
            Node::Const(c) => c.to_f64(),
            Node::Coord(s) => p.coords.get(&**s).copied().ok_or_else(|| ExprError::Unbound(s.to_string()))?,
            Node::Param(s) => p.params.get(&**s).copied().ok_or_else(|| ExprError::Unbound(s.to_string()))?,
            Node::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(p)?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval(p)?;
                }
                acc
            }
            Node::Pow(b, r) => {
                let base = b.eval(p)?;
                let (num, den) = (*r.numer(), *r.denom());
                if base == 0.0 && num < 0 {
                    return Err(domain("division by zero"));
                }
                if den == 1 {
                    if let Ok(k) = i32::try_from(num) {
                        base.powi(k)
                    } else {
                        base.powf(num as f64)
                    }
                } else if base < 0.0 {
                    if den % 2 == 0 {
                        return Err(domain("even root of a negative number"));
                    }
                    let mag = (-base).powf(num as f64 / den as f64);
                    if num % 2 == 0 {
                        mag
                    } else {
                        -mag
                    }
                } else {
                    base.powf(num as f64 / den as f64)
                }
            }
            Node::Func(f, a) => {
                let x = a.eval(p)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(domain("logarithm of a non-positive number"));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                }
            }
        };
        if !value.is_finite() {
            return Err(domain("non-finite value"));
        }
        Ok(value)
    }
}

/// Central difference `(e(p + h) - e(p - h)) / 2h` along `coord`.
pub fn fd_derivative(e: &Expr, coord: &str, p: &EvalPoint, h: f64) -> Result<f64, ExprError> {
    let plus = e.eval(&p.shifted(coord, h))?;
    let minus = e.eval(&p.shifted(coord, -h))?;
    Ok((plus - minus) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_with;

    #[test]
    fn evaluates_products() {
        let e = parse_with("2*u*v", &["u", "v"]).unwrap();
        let p = EvalPoint::new().with("u", 1.0).with("v", 3.0);
        assert_eq!(e.eval(&p).unwrap(), 6.0);
    }

    #[test]
    fn log_of_zero_is_a_domain_error() {
        let e = parse_with("log(u)", &["u"]).unwrap();
        let err = e.eval(&EvalPoint::new().with("u", 0.0)).unwrap_err();
        assert!(matches!(err, ExprError::Domain { .. }), "{err}");
        assert!(err.to_string().contains("log(u)"));
    }

    #[test]
    fn division_by_zero_is_a_domain_error() {
        let e = parse_with("1/u", &["u"]).unwrap();
        assert!(matches!(e.eval(&EvalPoint::new().with("u", 0.0)), Err(ExprError::Domain { .. })));
    }

    #[test]
    fn odd_roots_of_negatives_are_real() {
        let e = parse_with("x^(1/3)", &["x"]).unwrap();
        assert!((e.eval(&EvalPoint::new().with("x", -8.0)).unwrap() + 2.0).abs() < 1e-14);
        let even = parse_with("x^(1/2)", &["x"]).unwrap();
        assert!(even.eval(&EvalPoint::new().with("x", -1.0)).is_err());
    }

    #[test]
    fn unbound_symbols_are_reported() {
        let e = parse_with("u + w", &["u", "w"]).unwrap();
        assert_eq!(e.eval(&EvalPoint::new().with("u", 1.0)), Err(ExprError::Unbound("w".into())));
    }

    #[test]
    fn central_differences() {
        let sq = parse_with("x^2", &["x"]).unwrap();
        let d = fd_derivative(&sq, "x", &EvalPoint::new().with("x", 3.0), 1e-5).unwrap();
        assert!((d - 6.0).abs() < 1e-8);
        let sin = parse_with("sin(x)", &["x"]).unwrap();
        let d = fd_derivative(&sin, "x", &EvalPoint::new().with("x", 0.0), 1e-5).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
    }
}
