use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

/// Coefficient and exponent expressions. Constant subtrees are folded on
/// construction, so a fully bound expression is always a single `Num`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn real(x: f64) -> Self {
        Expr::Num(Complex64::new(x, 0.0))
    }

    pub fn imaginary_unit() -> Self {
        Expr::Num(Complex64::new(0.0, 1.0))
    }

    pub fn as_num(&self) -> Option<Complex64> {
        match self {
            Expr::Num(z) => Some(*z),
            _ => None,
        }
    }

    pub fn negated(e: Expr) -> Expr {
        match e {
            Expr::Num(z) => Expr::Num(-z),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn sum(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) => Expr::Num(a + b),
            (l, r) => Expr::Add(Box::new(l), Box::new(r)),
        }
    }

    pub fn difference(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) => Expr::Num(a - b),
            (l, r) => Expr::Sub(Box::new(l), Box::new(r)),
        }
    }

    pub fn product(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) => Expr::Num(a * b),
            (l, r) => Expr::Mul(Box::new(l), Box::new(r)),
        }
    }

    pub fn quotient(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) => Expr::Num(a / b),
            (l, r) => Expr::Div(Box::new(l), Box::new(r)),
        }
    }

    pub fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) => e.collect_params(out),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
        }
    }

    /// Replaces bound parameters by their values and refolds. Unknown names
    /// are left in place.
    pub fn substitute(&self, bindings: &BTreeMap<String, Complex64>) -> Expr {
        match self {
            Expr::Num(z) => Expr::Num(*z),
            Expr::Param(name) => match bindings.get(name) {
                Some(v) => Expr::Num(*v),
                None => Expr::Param(name.clone()),
            },
            Expr::Neg(e) => Expr::negated(e.substitute(bindings)),
            Expr::Add(l, r) => Expr::sum(l.substitute(bindings), r.substitute(bindings)),
            Expr::Sub(l, r) => Expr::difference(l.substitute(bindings), r.substitute(bindings)),
            Expr::Mul(l, r) => Expr::product(l.substitute(bindings), r.substitute(bindings)),
            Expr::Div(l, r) => Expr::quotient(l.substitute(bindings), r.substitute(bindings)),
        }
    }
}

fn fmt_real(x: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        write!(f, "(-{:?})", -x)
    } else {
        write!(f, "{x:?}")
    }
}

/// Canonical form: atoms bare, every compound node parenthesised, so that
/// printing and reparsing reproduces the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(z) => {
                if z.im == 0.0 {
                    fmt_real(z.re, f)
                } else if z.re == 0.0 {
                    f.write_str("(")?;
                    fmt_real(z.im, f)?;
                    f.write_str("*i)")
                } else {
                    f.write_str("(")?;
                    fmt_real(z.re, f)?;
                    f.write_str(" + ")?;
                    fmt_real(z.im, f)?;
                    f.write_str("*i)")
                }
            }
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l}*{r})"),
            Expr::Div(l, r) => write!(f, "({l}/{r})"),
        }
    }
}
