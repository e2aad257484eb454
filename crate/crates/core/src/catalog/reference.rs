//! Table forms written as derivatives in `c`, evaluated with Taylor jets.

use num_complex::Complex64;

use super::{CatalogError, Params};
use crate::jet::{Jet, ORDER};
use crate::special::double_factorial;

fn integer_order(id: &str, n: f64, lo: i64, offset: i64) -> Result<usize, CatalogError> {
    if n.fract() != 0.0 || (n as i64) < lo || (n as i64) - offset > ORDER as i64 {
        return Err(CatalogError::UnsupportedOrder {
            id: id.into(),
            n,
            supported: format!("integer n from {lo} to {}", ORDER as i64 + offset),
        });
    }
    Ok((n as i64 - offset) as usize)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn need(cond: bool, id: &str, condition: &str) -> Result<(), CatalogError> {
    if cond {
        Ok(())
    } else {
        Err(CatalogError::Domain {
            id: id.into(),
            condition: condition.into(),
        })
    }
}

/// `arccot(b/sqrt(D)) / sqrt(D)` with `D = ac - b^2`, as a jet in `c`.
fn arccot_form(a: f64, b: f64, c: Jet) -> Jet {
    let d = c * a - b * b;
    let s = d.sqrt();
    (Jet::constant(b) / s).acot() / s
}

/// `(-1)^(n-1)/(n-1)! d^(n-1)/dc^(n-1) [arccot(b/sqrt(ac-b^2)) / sqrt(ac-b^2)]`
fn entry1(p: &Params) -> Result<f64, CatalogError> {
    let (a, b, c, n) = (p["a"], p["b"], p["c"], p["n"]);
    let k = integer_order("3.252-1", n, 1, 1)?;
    need(a > 0.0 && a * c > b * b, "3.252-1", "a > 0, ac > b^2")?;
    let f = arccot_form(a, b, Jet::variable(c));
    Ok((-1f64).powi(k as i32) / factorial(k) * f.derivative(k))
}

/// `(-2)^n/(2n+1)!! d^n/dc^n [1 / (sqrt(c) (sqrt(ac) + b))]`
fn entry3(p: &Params) -> Result<f64, CatalogError> {
    let (a, b, c, n) = (p["a"], p["b"], p["c"], p["n"]);
    let k = integer_order("3.252-3", n, 0, 0)?;
    need(
        a >= 0.0 && c > 0.0 && b > -(a * c).sqrt(),
        "3.252-3",
        "a >= 0, c > 0, b > -sqrt(ac)",
    )?;
    let cj = Jet::variable(c);
    let f = (cj.sqrt() * ((cj * a).sqrt() + b)).recip();
    let df = double_factorial(2 * k as i64 + 1).expect("small argument") as f64;
    Ok((-2f64).powi(k as i32) / df * f.derivative(k))
}

/// `(-1)^n/(n-1)!! d^(n-2)/dc^(n-2) [...]`, with the cot and log forms either
/// side of `ac = b^2` and the direct value on it. The prefactor is kept as
/// printed in the table.
fn entry4(p: &Params) -> Result<f64, CatalogError> {
    let (a, b, c, n) = (p["a"], p["b"], p["c"], p["n"]);
    let k = integer_order("3.252-4", n, 2, 2)?;
    need(a > 0.0 && c > 0.0, "3.252-4", "a > 0, c > 0")?;
    let (ac, b2) = (a * c, b * b);
    if (ac - b2).abs() <= super::forms::EQUAL_CASE_TOL * ac.max(b2) {
        need(b > 0.0, "3.252-4", "b > 0 when ac = b^2")?;
        return Ok(a.powf(n - 2.0) / (2.0 * (n - 1.0) * (2.0 * n - 1.0) * b.powf(2.0 * n - 2.0)));
    }
    let cj = Jet::variable(c);
    let d = cj * a - b2;
    let f = if ac > b2 {
        (d * 2.0).recip() - Jet::constant(b) / (d.powf(1.5) * 2.0) * (Jet::constant(b) / d.sqrt()).acot()
    } else {
        need(b > 0.0, "3.252-4", "b > 0 when b^2 > ac")?;
        let e = -d;
        let r = e.sqrt();
        let log = ((r + b) / (Jet::constant(b) - r)).ln();
        (d * 2.0).recip() + Jet::constant(b) / (e.powf(1.5) * 4.0) * log
    };
    let df = double_factorial(n as i64 - 1).expect("small argument") as f64;
    Ok((-1f64).powi(n as i32) / df * f.derivative(k))
}

pub(crate) fn has_reference_form(id: &str) -> bool {
    matches!(id, "3.252-1" | "3.252-3" | "3.252-4")
}

pub(crate) fn eval(id: &str, params: &Params) -> Result<Complex64, CatalogError> {
    for name in ["a", "b", "c", "n"] {
        if !params.contains_key(name) {
            return Err(CatalogError::MissingParameter(name.into()));
        }
    }
    let v = match id {
        "3.252-1" => entry1(params)?,
        "3.252-3" => entry3(params)?,
        "3.252-4" => entry4(params)?,
        _ => return Err(CatalogError::NoReferenceForm(id.into())),
    };
    Ok(Complex64::new(v, 0.0))
}
