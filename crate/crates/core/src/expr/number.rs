//! Numeric constants carried by expression trees.
//!
//! Constants stay exact rationals while every intermediate fits in `i64`;
//! anything that would overflow degrades to an IEEE double.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Rational64;

#[derive(Clone, Copy, Debug)]
pub enum Number {
    Rational(Rational64),
    Real(f64),
}

impl Number {
    pub const ZERO: Number = Number::Rational(Rational64::new_raw(0, 1));
    pub const ONE: Number = Number::Rational(Rational64::new_raw(1, 1));
    pub const MINUS_ONE: Number = Number::Rational(Rational64::new_raw(-1, 1));

    pub fn int(n: i64) -> Self {
        Number::Rational(Rational64::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Number::Rational(Rational64::new(num, den))
    }

    /// Wraps a double, keeping it exact when it is an integer of moderate size.
    pub fn real(x: f64) -> Self {
        if x.fract() == 0.0 && x.abs() < 1e15 {
            Number::int(x as i64)
        } else {
            Number::Real(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Number::Real(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(r) => *r.numer() == 0,
            Number::Real(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        matches!(self, Number::Rational(r) if *r.numer() == 1 && *r.denom() == 1)
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(r) => *r.numer() < 0,
            Number::Real(x) => x < 0.0,
        }
    }

    pub fn as_rational(self) -> Option<Rational64> {
        match self {
            Number::Rational(r) => Some(r),
            Number::Real(_) => None,
        }
    }

    pub fn add(self, other: Number) -> Number {
        if let (Number::Rational(a), Number::Rational(b)) = (self, other) {
            if let Some(r) = checked_add(a, b) {
                return Number::Rational(r);
            }
        }
        Number::Real(self.to_f64() + other.to_f64())
    }

    pub fn mul(self, other: Number) -> Number {
        if let (Number::Rational(a), Number::Rational(b)) = (self, other) {
            if let Some(r) = checked_mul(a, b) {
                return Number::Rational(r);
            }
        }
        Number::Real(self.to_f64() * other.to_f64())
    }

    pub fn neg(self) -> Number {
        match self {
            Number::Rational(r) => match r.numer().checked_neg() {
                Some(n) => Number::Rational(Rational64::new_raw(n, *r.denom())),
                None => Number::Real(-self.to_f64()),
            },
            Number::Real(x) => Number::Real(-x),
        }
    }

    /// Integer power; `None` for `0^k` with `k < 0`.
    pub fn powi(self, k: i64) -> Option<Number> {
        if self.is_zero() && k < 0 {
            return None;
        }
        if let Number::Rational(r) = self {
            if let Some(p) = checked_powi(r, k) {
                return Some(Number::Rational(p));
            }
        }
        Some(Number::Real(self.to_f64().powi(k as i32)))
    }

    /// Parses a decimal literal such as `12`, `0.25` or `1.5e-3`, exactly when possible.
    pub fn parse_decimal(text: &str) -> Option<Number> {
        let (mantissa, exponent) = match text.find(['e', 'E']) {
            Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
            None => (text, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let scale = exponent - frac_part.len() as i32;
        let exact = digits.parse::<i64>().ok().and_then(|n| {
            let ten = Rational64::from_integer(10);
            checked_powi(ten, scale as i64).and_then(|s| checked_mul(Rational64::from_integer(n), s))
        });
        match exact {
            Some(r) => Some(Number::Rational(r)),
            None => text.parse::<f64>().ok().filter(|x| x.is_finite()).map(Number::Real),
        }
    }
}

fn checked_add(a: Rational64, b: Rational64) -> Option<Rational64> {
    let (an, ad) = (*a.numer() as i128, *a.denom() as i128);
    let (bn, bd) = (*b.numer() as i128, *b.denom() as i128);
    reduce(an * bd + bn * ad, ad * bd)
}

fn checked_mul(a: Rational64, b: Rational64) -> Option<Rational64> {
    let (an, ad) = (*a.numer() as i128, *a.denom() as i128);
    let (bn, bd) = (*b.numer() as i128, *b.denom() as i128);
    reduce(an * bn, ad * bd)
}

fn checked_powi(r: Rational64, k: i64) -> Option<Rational64> {
    if k.unsigned_abs() > 64 {
        return None;
    }
    let base = if k < 0 {
        if *r.numer() == 0 {
            return None;
        }
        r.recip()
    } else {
        r
    };
    let mut acc = Rational64::from_integer(1);
    for _ in 0..k.unsigned_abs() {
        acc = checked_mul(acc, base)?;
    }
    Some(acc)
}

fn reduce(num: i128, den: i128) -> Option<Rational64> {
    fn gcd(mut a: i128, mut b: i128) -> i128 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a.abs()
    }
    let g = gcd(num, den).max(1);
    let (mut n, mut d) = (num / g, den / g);
    if d < 0 {
        n = -n;
        d = -d;
    }
    Some(Rational64::new_raw(i64::try_from(n).ok()?, i64::try_from(d).ok()?))
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Rationals sort before reals; within a kind the order is numeric.
impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a.cmp(b),
            (Number::Real(a), Number::Real(b)) => a.total_cmp(b),
            (Number::Rational(_), Number::Real(_)) => Ordering::Less,
            (Number::Real(_), Number::Rational(_)) => Ordering::Greater,
        }
    }
}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Rational(r) => {
                0u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
            Number::Real(x) => {
                1u8.hash(state);
                x.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Real(x) => write!(f, "{x:?}"),
        }
    }
}
