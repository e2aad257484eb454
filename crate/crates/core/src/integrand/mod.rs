//! Integrands of the form `x^(s-1) * prod (poly)^alpha * prod exp(c x^p)`.

mod expr;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::rational::{rational_from_f64, Rational};

pub use expr::Expr;
pub use parser::parse_integrand;

/// Largest denominator accepted when a bound x-exponent is turned into an
/// exact rational.
pub const MAX_EXPONENT_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrandError {
    #[error("syntax error at byte {offset}: expected one of [{}], found {found}", expected.join(", "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("power base repeats the x-exponent {exponent}")]
    DuplicateMonomialExponent { exponent: String },
    #[error("unbound parameter(s): {}", names.join(", "))]
    UnboundParameter { names: Vec<String> },
    #[error("x-exponent {value} is not a rational with denominator <= {MAX_EXPONENT_DENOMINATOR}")]
    NonRationalExponent { value: f64 },
    #[error("{what} must be real after binding, got {value}")]
    NotReal { what: String, value: Complex64 },
    #[error("{what} is not finite after binding")]
    NonFinite { what: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: Expr,
    /// Power of x.
    pub exponent: Expr,
}

impl Monomial {
    /// Coefficient value of a bound monomial.
    pub fn coefficient_value(&self) -> Result<Complex64, IntegrandError> {
        let z = num_of(&self.coefficient)?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(IntegrandError::NonFinite {
                what: format!("coefficient {}", self.coefficient),
            });
        }
        Ok(z)
    }

    /// Exact x-exponent of a bound monomial.
    pub fn exponent_value(&self) -> Result<Rational, IntegrandError> {
        let x = real_of(&self.exponent, "x-exponent")?;
        rational_from_f64(x, MAX_EXPONENT_DENOMINATOR).ok_or(IntegrandError::NonRationalExponent { value: x })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFactor {
    pub base: Vec<Monomial>,
    pub exponent: Expr,
}

impl PowerFactor {
    pub fn exponent_value(&self) -> Result<f64, IntegrandError> {
        real_of(&self.exponent, "power exponent")
    }
}

/// `exp(c * x^p)`
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFactor {
    pub argument: Monomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    /// The `s - 1` of the `x^(s-1)` prefactor.
    pub prefactor_exponent: Expr,
    pub power_factors: Vec<PowerFactor>,
    pub exp_factors: Vec<ExpFactor>,
    /// Values applied by [`Integrand::bind`].
    pub parameters: BTreeMap<String, Complex64>,
}

fn num_of(e: &Expr) -> Result<Complex64, IntegrandError> {
    match e.as_num() {
        Some(z) => Ok(z),
        None => {
            let mut names = BTreeSet::new();
            e.collect_params(&mut names);
            Err(IntegrandError::UnboundParameter {
                names: names.into_iter().collect(),
            })
        }
    }
}

fn real_of(e: &Expr, what: &str) -> Result<f64, IntegrandError> {
    let z = num_of(e)?;
    if z.im != 0.0 {
        return Err(IntegrandError::NotReal {
            what: what.to_string(),
            value: z,
        });
    }
    if !z.re.is_finite() {
        return Err(IntegrandError::NonFinite { what: what.to_string() });
    }
    Ok(z.re)
}

impl Integrand {
    pub fn empty() -> Self {
        Integrand {
            prefactor_exponent: Expr::real(0.0),
            power_factors: Vec::new(),
            exp_factors: Vec::new(),
            parameters: BTreeMap::new(),
        }
    }

    fn exprs(&self) -> impl Iterator<Item = &Expr> {
        let powers = self.power_factors.iter().flat_map(|p| {
            std::iter::once(&p.exponent).chain(p.base.iter().flat_map(|m| [&m.coefficient, &m.exponent]))
        });
        let exps = self
            .exp_factors
            .iter()
            .flat_map(|e| [&e.argument.coefficient, &e.argument.exponent]);
        std::iter::once(&self.prefactor_exponent).chain(powers).chain(exps)
    }

    /// Names still unresolved anywhere in the integrand.
    pub fn free_parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in self.exprs() {
            e.collect_params(&mut out);
        }
        out
    }

    pub fn is_bound(&self) -> bool {
        self.free_parameters().is_empty()
    }

    pub fn prefactor_exponent_value(&self) -> Result<f64, IntegrandError> {
        real_of(&self.prefactor_exponent, "prefactor exponent")
    }

    /// Substitutes every free parameter. Extra bindings are ignored; missing
    /// ones are reported together.
    pub fn bind(&self, bindings: &BTreeMap<String, Complex64>) -> Result<Integrand, IntegrandError> {
        let missing: Vec<String> = self
            .free_parameters()
            .into_iter()
            .filter(|n| !bindings.contains_key(n))
            .collect();
        if !missing.is_empty() {
            return Err(IntegrandError::UnboundParameter { names: missing });
        }
        let used = self.free_parameters();
        let sub = |m: &Monomial| Monomial {
            coefficient: m.coefficient.substitute(bindings),
            exponent: m.exponent.substitute(bindings),
        };
        let mut parameters = self.parameters.clone();
        for name in used {
            parameters.insert(name.clone(), bindings[&name]);
        }
        let bound = Integrand {
            prefactor_exponent: self.prefactor_exponent.substitute(bindings),
            power_factors: self
                .power_factors
                .iter()
                .map(|p| PowerFactor {
                    base: p.base.iter().map(sub).collect(),
                    exponent: p.exponent.substitute(bindings),
                })
                .collect(),
            exp_factors: self
                .exp_factors
                .iter()
                .map(|e| ExpFactor {
                    argument: sub(&e.argument),
                })
                .collect(),
            parameters,
        };
        bound.check_distinct_exponents()?;
        Ok(bound)
    }

    /// Rejects power bases that repeat a numeric x-exponent.
    pub(crate) fn check_distinct_exponents(&self) -> Result<(), IntegrandError> {
        for p in &self.power_factors {
            let mut seen: Vec<f64> = Vec::new();
            for m in &p.base {
                if let Some(z) = m.exponent.as_num() {
                    if seen.contains(&z.re) && z.im == 0.0 {
                        return Err(IntegrandError::DuplicateMonomialExponent {
                            exponent: format!("{}", m.exponent),
                        });
                    }
                    seen.push(z.re);
                }
            }
        }
        Ok(())
    }

    /// Pointwise value of a bound integrand; principal branch for every
    /// complex power. Power factors are accumulated as logarithms with the
    /// dominant monomial factored out, so large `x` does not overflow.
    pub fn eval_at(&self, x: f64) -> Result<Complex64, IntegrandError> {
        let xc = Complex64::new(x, 0.0);
        let mono = |m: &Monomial| -> Result<Complex64, IntegrandError> {
            Ok(num_of(&m.coefficient)? * xc.powf(real_of(&m.exponent, "x-exponent")?))
        };
        if x <= 0.0 || !x.is_finite() {
            let mut value = Complex64::new(x.powf(self.prefactor_exponent_value()?), 0.0);
            for p in &self.power_factors {
                let mut base = Complex64::new(0.0, 0.0);
                for m in &p.base {
                    base += mono(m)?;
                }
                value *= base.powf(p.exponent_value()?);
            }
            for e in &self.exp_factors {
                value *= mono(&e.argument)?.exp();
            }
            return Ok(value);
        }
        let lx = x.ln();
        let mut log = Complex64::new(self.prefactor_exponent_value()? * lx, 0.0);
        for p in &self.power_factors {
            let terms = p
                .base
                .iter()
                .map(|m| Ok((num_of(&m.coefficient)?, real_of(&m.exponent, "x-exponent")?)))
                .collect::<Result<Vec<_>, IntegrandError>>()?;
            let top = terms.iter().map(|(_, e)| e * lx).fold(f64::NEG_INFINITY, f64::max);
            let scaled: Complex64 = terms.iter().map(|(c, e)| c * (e * lx - top).exp()).sum();
            log += p.exponent_value()? * (scaled.ln() + top);
        }
        for e in &self.exp_factors {
            let c = num_of(&e.argument.coefficient)?;
            let mag = x.powf(real_of(&e.argument.exponent, "x-exponent")?);
            let part = |k: f64| if k == 0.0 { 0.0 } else { k * mag };
            log += Complex64::new(part(c.re), part(c.im));
        }
        Ok(log.exp())
    }

    /// True when every bound coefficient is real, so the integrand is a real
    /// function on the positive half-line.
    pub fn is_real(&self) -> bool {
        self.exprs().all(|e| e.as_num().is_some_and(|z| z.im == 0.0))
    }
}

fn fmt_exponent(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Param(name) => f.write_str(name),
        Expr::Num(z) if z.im == 0.0 => write!(f, "{e}"),
        other => {
            let s = other.to_string();
            if s.starts_with('(') {
                f.write_str(&s)
            } else {
                write!(f, "({s})")
            }
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        if self.exponent != Expr::real(0.0) {
            f.write_str("*x^")?;
            fmt_exponent(&self.exponent, f)?;
        }
        Ok(())
    }
}

/// Canonical text accepted by [`parse_integrand`].
impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<String> = Vec::new();
        if self.prefactor_exponent != Expr::real(0.0) || (self.power_factors.is_empty() && self.exp_factors.is_empty()) {
            let mut s = String::from("x^");
            match &self.prefactor_exponent {
                Expr::Param(name) => s.push_str(name),
                Expr::Num(z) if z.im == 0.0 => s.push_str(&self.prefactor_exponent.to_string()),
                other => {
                    let t = other.to_string();
                    if t.starts_with('(') {
                        s.push_str(&t);
                    } else {
                        s.push_str(&format!("({t})"));
                    }
                }
            }
            terms.push(s);
        }
        for p in &self.power_factors {
            let base: Vec<String> = p.base.iter().map(|m| m.to_string()).collect();
            terms.push(format!("({})^({})", base.join(" + "), p.exponent));
        }
        for e in &self.exp_factors {
            terms.push(format!("exp({})", e.argument));
        }
        f.write_str(&terms.join(" * "))
    }
}
