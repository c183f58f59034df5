//! Infix printing. The output is valid input for [`super::parse`] and
//! re-parses to a structurally equal tree.

use std::fmt::{self, Write};

use num_rational::Rational64;

use super::{Expr, Node, Number};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                let mut s = String::new();
                write_term(&mut s, t);
                if i == 0 {
                    out.push_str(&s);
                } else if let Some(rest) = s.strip_prefix('-') {
                    out.push_str(" - ");
                    out.push_str(rest);
                } else {
                    out.push_str(" + ");
                    out.push_str(&s);
                }
            }
        }
        _ => write_term(out, e),
    }
}

/// Writes a non-sum expression.
fn write_term(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Const(c) => write_number(out, *c),
        Node::Product(fs) => write_product(out, fs),
        Node::Pow(_, r) if *r.numer() < 0 => write_product(out, std::slice::from_ref(e)),
        Node::Sum(_) => {
            out.push('(');
            write_expr(out, e);
            out.push(')');
        }
        _ => write_factor(out, e),
    }
}

fn write_product(out: &mut String, fs: &[Expr]) {
    let (coeff, factors) = match fs[0].node() {
        Node::Const(c) => (*c, &fs[1..]),
        _ => (Number::ONE, fs),
    };
    let mut num: Vec<Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    for f in factors {
        match f.node() {
            Node::Pow(b, r) if *r.numer() < 0 => den.push(Expr::pow(b.clone(), -*r)),
            _ => num.push(f.clone()),
        }
    }
    let mut body = String::new();
    for (i, f) in num.iter().enumerate() {
        if i > 0 {
            body.push('*');
        }
        write_factor(&mut body, f);
    }
    if coeff == Number::MINUS_ONE && !num.is_empty() {
        out.push('-');
    } else if !coeff.is_one() || num.is_empty() {
        write_number(out, coeff);
        if !num.is_empty() {
            out.push('*');
        }
    }
    out.push_str(&body);
    if !den.is_empty() {
        out.push('/');
        if den.len() == 1 {
            write_factor(out, &den[0]);
        } else {
            out.push('(');
            for (i, f) in den.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                write_factor(out, f);
            }
            out.push(')');
        }
    }
}

/// Writes an operand of `*`, `/` or `^`, parenthesizing when needed.
fn write_factor(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Coord(s) | Node::Param(s) => out.push_str(s),
        Node::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, a);
            out.push(')');
        }
        Node::Pow(b, r) => {
            write_atom(out, b);
            out.push('^');
            write_exponent(out, *r);
        }
        Node::Const(c) if c.as_rational().is_some_and(|r| r.is_integer()) && !c.is_negative() => write_number(out, *c),
        _ => {
            out.push('(');
            write_expr(out, e);
            out.push(')');
        }
    }
}

/// Writes the base of a power: only symbols, calls and non-negative integers go bare.
fn write_atom(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Coord(_) | Node::Param(_) | Node::Func(..) => write_factor(out, e),
        Node::Const(c) if c.as_rational().is_some_and(|r| r.is_integer()) && !c.is_negative() => write_number(out, *c),
        _ => {
            out.push('(');
            write_expr(out, e);
            out.push(')');
        }
    }
}

fn write_exponent(out: &mut String, r: Rational64) {
    if r.is_integer() && *r.numer() >= 0 {
        let _ = write!(out, "{}", r.numer());
    } else {
        let _ = write!(out, "({})", Number::Rational(r));
    }
}

fn write_number(out: &mut String, n: Number) {
    let _ = write!(out, "{n}");
}
