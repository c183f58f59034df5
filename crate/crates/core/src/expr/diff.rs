use std::collections::HashMap;
use std::sync::Arc;

use num_rational::Rational64;

use super::{Expr, Func, Node};

impl Expr {
    /// Exact partial derivative with respect to a chart coordinate.
    pub fn diff(&self, coord: &str) -> Expr {
        let mut memo = HashMap::new();
        diff_memo(self, coord, &mut memo)
    }

    /// Repeated partial derivative, applied left to right.
    pub fn diff_many(&self, coords: &[&str]) -> Expr {
        coords.iter().fold(self.clone(), |e, c| e.diff(c))
    }
}

fn diff_memo(e: &Expr, var: &str, memo: &mut HashMap<*const (), Expr>) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    let key = Arc::as_ptr(&e.0) as *const ();
    if let Some(d) = memo.get(&key) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::zero(),
        Node::Coord(_) => Expr::one(),
        Node::Sum(ts) => Expr::sum(ts.iter().map(|t| diff_memo(t, var, memo)).collect::<Vec<_>>()),
        Node::Product(fs) => {
            let mut terms = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let df = diff_memo(f, var, memo);
                if df.is_zero() {
                    continue;
                }
                let mut factors: Vec<Expr> = fs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
                factors.push(df);
                terms.push(Expr::product(factors));
            }
            Expr::sum(terms)
        }
        Node::Pow(b, r) => {
            let db = diff_memo(b, var, memo);
            let lowered = Expr::pow(b.clone(), r - Rational64::from_integer(1));
            Expr::product([Expr::constant(super::Number::Rational(*r)), lowered, db])
        }
        Node::Func(f, a) => {
            let da = diff_memo(a, var, memo);
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => a.clone().recip(),
                Func::Sin => a.clone().cos(),
                Func::Cos => -a.clone().sin(),
                Func::Sinh => a.clone().cosh(),
                Func::Cosh => a.clone().sinh(),
            };
            outer * da
        }
    };
    memo.insert(key, d.clone());
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{fd_derivative, parse, parse_with, EvalPoint, SymbolTable};

    #[test]
    fn power_rule() {
        let e = parse_with("x^2", &["x"]).unwrap();
        assert_eq!(e.diff("x"), Expr::int(2) * Expr::coord("x"));
    }

    #[test]
    fn parameters_are_constants() {
        let table = SymbolTable::new(&["x1", "x2"], &["a_const"]);
        let e = parse("a_const * (x1^2 + x2^2)", &table).unwrap();
        let expected = Expr::int(2) * Expr::param("a_const") * Expr::coord("x1");
        let d = e.diff("x1");
        let p = EvalPoint::new().with("x1", 0.7).with("x2", -1.3).with_param("a_const", 2.5);
        assert!((d.eval(&p).unwrap() - expected.eval(&p).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn independent_variables_give_zero() {
        let e = parse_with("sin(u)*exp(u)", &["u", "v"]).unwrap();
        assert!(e.diff("v").is_zero());
    }

    #[test]
    fn log_of_exponential() {
        let table = SymbolTable::new(&["u"], &["k"]);
        let e = parse("log(exp(k*u))", &table).unwrap();
        assert_eq!(e.diff("u"), Expr::param("k"));
        // Same through a form canonicalization does not collapse.
        let e = parse("log(2*exp(k*u))", &table).unwrap();
        let d = e.diff("u");
        for u in [-1.0, -0.3, 0.0, 0.4, 1.2] {
            let p = EvalPoint::new().with("u", u).with_param("k", 1.7);
            let exact = d.eval(&p).unwrap();
            let fd = fd_derivative(&e, "u", &p, 1e-5).unwrap();
            assert!((exact - fd).abs() <= 1e-7 * exact.abs(), "u={u}: {exact} vs {fd}");
        }
    }

    #[test]
    fn derivative_of_exponential_at_half() {
        let e = parse_with("exp(2*t)", &["t"]).unwrap();
        let p = EvalPoint::new().with("t", 0.5);
        let exact = e.diff("t").eval(&p).unwrap();
        let fd = fd_derivative(&e, "t", &p, 1e-6).unwrap();
        assert!((exact - 2.0 * std::f64::consts::E).abs() < 1e-12);
        assert!((exact - fd).abs() / exact < 1e-6);
    }

    #[test]
    fn trig_and_hyperbolic_rules() {
        let e = parse_with("sin(x)*cos(x) + sinh(x)/cosh(x) + x^(3/2)", &["x"]).unwrap();
        let d = e.diff("x");
        for x in [0.2, 0.9, 1.7] {
            let p = EvalPoint::new().with("x", x);
            let fd = fd_derivative(&e, "x", &p, 1e-5).unwrap();
            let exact = d.eval(&p).unwrap();
            assert!((exact - fd).abs() <= 1e-6 * (1.0 + exact.abs()));
        }
    }
}
