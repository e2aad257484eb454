//! Closed-form evaluators for every catalog entry, with their parameter
//! domains and region guards.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{CatalogError, Params};
use crate::special::{f10, f21, f21_regularized, gamma_real, SpecialError};

type Form = fn(&Args) -> Result<f64, SpecialError>;

/// Relative width within which `ac = b^2` selects the equal-case branch.
pub const EQUAL_CASE_TOL: f64 = 1e-12;

pub(crate) struct Args<'a> {
    params: &'a Params,
}

impl Args<'_> {
    fn v(&self, name: &str) -> f64 {
        self.params[name]
    }

    /// `b^2 / (ac)`
    fn z(&self) -> f64 {
        self.v("b").powi(2) / (self.v("a") * self.v("c"))
    }

    /// `ac / b^2`
    fn w(&self) -> f64 {
        self.v("a") * self.v("c") / self.v("b").powi(2)
    }
}

fn g(x: f64) -> Result<f64, SpecialError> {
    gamma_real(x)
}

pub(crate) enum Family {
    /// No region split.
    Single,
    /// `|b^2/(ac)| < 1` gives `I2`, `|ac/b^2| < 1` gives `I13`.
    Quadratic { equal_case: bool },
}

pub(crate) struct Evaluator {
    pub id: &'static str,
    pub parameters: &'static [&'static str],
    pub family: Family,
    pub domain: fn(&Args) -> Result<(), String>,
    pub branches: &'static [(&'static str, Form)],
    pub complex: Option<fn(&Args) -> Complex64>,
}

fn positive(args: &Args, names: &[&str]) -> Result<(), String> {
    for n in names {
        if !(args.v(n) > 0.0) {
            return Err(format!("{n} > 0"));
        }
    }
    Ok(())
}

/// `a > 0, c > 0`, and `b > 0` unless `b^2 < ac`.
fn quadratic_domain(args: &Args) -> Result<(), String> {
    positive(args, &["a", "c"])?;
    if args.v("b").powi(2) >= args.v("a") * args.v("c") && !(args.v("b") > 0.0) {
        return Err("b > 0 when b^2 >= ac".into());
    }
    Ok(())
}

fn gaussian(args: &Args) -> Result<f64, SpecialError> {
    let p = args.v("p");
    Ok(g(1.0 / p)? / p)
}

fn feynman(args: &Args) -> Complex64 {
    let (a, b) = (args.v("a"), args.v("b"));
    Complex64::from_polar(1.0, PI / 4.0 + 2.0 * (a * b).sqrt()) * PI.sqrt() / (2.0 * b.sqrt())
}

fn feynman_real(args: &Args) -> Result<f64, SpecialError> {
    Ok(feynman(args).re)
}

fn e1_i2(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"));
    let z = args.z();
    Ok(PI.sqrt() * c.powf(0.5 - n) * g(n - 0.5)? * f10(n - 0.5, z)? / (2.0 * a.sqrt() * g(n)?)
        - b * c.powf(-n) * f21(1.0, n, 1.5, z)? / a)
}

fn e1_i13(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"));
    let w = args.w();
    Ok(a.powf(n - 1.0) * b.powf(1.0 - 2.0 * n) * g(1.0 - n)? * g(n - 0.5)? * f10(n - 0.5, w)? / (2.0 * PI.sqrt())
        + c.powf(1.0 - n) * g(n - 1.0)? * f21(0.5, 1.0, 2.0 - n, w)? / (2.0 * b * g(n)?))
}

fn e3_i2(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"));
    let z = args.z();
    let first = PI.sqrt() * a.powf(1.5) * g(n + 1.0)? * f10(n, z)? / g(n + 1.5)?;
    let second = 2.0 * (b.powi(3) - a * b * c) * f21(1.0, n + 1.5, 1.5, z)? / c.powf(1.5);
    Ok(c.powf(-n) / (2.0 * a * (a * c - b * b)) * (first + second))
}

fn e3_i13(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"));
    let w = args.w();
    let first = a.powf(n + 0.5) * b.powf(-2.0 * n) * g(n + 1.0)? * f10(n, w)? / (PI.sqrt() * (b * b - a * c));
    let second = c.powf(-n - 0.5) * f21_regularized(0.5, 1.0, 0.5 - n, w)? / b;
    Ok(0.5 * g(-n - 0.5)? * (first - second))
}

fn e4_i2(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"));
    let z = args.z();
    Ok(c.powf(1.0 - n) * g(n - 1.0)? * f21(1.0, n - 1.0, 0.5, z)? / (2.0 * a * g(n)?)
        - PI.sqrt() * b * c.powf(0.5 - n) * g(n - 0.5)? * f10(n - 0.5, z)? / (2.0 * a.powf(1.5) * g(n)?))
}

fn e4_i13(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"));
    let w = args.w();
    let inner = 2.0 * a.powf(n - 2.0) * b.powf(4.0 - 2.0 * n) * g(n - 0.5)? * f10(n - 0.5, w)?
        - PI.sqrt() * c.powf(2.0 - n) * f21_regularized(1.0, 1.5, 3.0 - n, w)?;
    Ok(-g(1.0 - n)? * inner / (4.0 * PI.sqrt() * b * b))
}

fn e4_equal(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, n) = (args.v("a"), args.v("b"), args.v("n"));
    Ok(a.powf(n - 2.0) / (2.0 * (n - 1.0) * (2.0 * n - 1.0) * b.powf(2.0 * n - 2.0)))
}

fn qg_i2(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n, m) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"), args.v("m"));
    let z = args.z();
    let first = a.powf(-n / 2.0 - 0.5)
        * g((n + 1.0) / 2.0)?
        * c.powf((n - 2.0 * m) / 2.0 + 0.5)
        * g(m - n / 2.0 - 0.5)?
        * f21(m - n / 2.0 - 0.5, (n + 1.0) / 2.0, 0.5, z)?
        / (2.0 * g(m)?);
    let second = b
        * a.powf(-n / 2.0 - 1.0)
        * g(n / 2.0 + 1.0)?
        * c.powf((n - 2.0 * m) / 2.0)
        * g(m - n / 2.0)?
        * f21(m - n / 2.0, n / 2.0 + 1.0, 1.5, z)?
        / g(m)?;
    Ok(first - second)
}

fn qg_i13(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n, m) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"), args.v("m"));
    let w = args.w();
    let first = 2f64.powf(-2.0 * m + n + 1.0)
        * a.powf(m - n - 1.0)
        * b.powf(-2.0 * m + n + 1.0)
        * g(2.0 * m - n - 1.0)?
        * g(-m + n + 1.0)?
        * f21(m - n / 2.0 - 0.5, m - n / 2.0, m - n, w)?
        / g(m)?;
    let second = 2f64.powf(-n - 1.0)
        * b.powf(-n - 1.0)
        * g(n + 1.0)?
        * c.powf(-m + n + 1.0)
        * g(m - n - 1.0)?
        * f21((n + 1.0) / 2.0, (n + 2.0) / 2.0, -m + n + 2.0, w)?
        / g(m)?;
    Ok(first + second)
}

fn q_i2(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, m) = (args.v("a"), args.v("b"), args.v("c"), args.v("m"));
    let z = args.z();
    Ok(
        g(0.25)? * c.powf(0.25 - m) * g(m - 0.25)? * f21(0.25, m - 0.25, 0.5, z)? / (4.0 * a.powf(0.25) * g(m)?)
            - b * g(0.75)? * c.powf(-m - 0.25) * g(m + 0.25)? * f21(0.75, m + 0.25, 1.5, z)?
                / (2.0 * a.powf(0.75) * g(m)?),
    )
}

fn q_i13(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, m) = (args.v("a"), args.v("b"), args.v("c"), args.v("m"));
    let w = args.w();
    let first = 2f64.powf(-2.0 * m - 0.5)
        * a.powf(m - 0.5)
        * b.powf(0.5 - 2.0 * m)
        * g((1.0 - 2.0 * m) / 2.0)?
        * g((4.0 * m - 1.0) / 2.0)?
        * f21(m - 0.25, m + 0.25, m + 0.5, w)?
        / g(m)?;
    let second = (PI / 2.0).sqrt() * c.powf(0.5 - m) * g((2.0 * m - 1.0) / 2.0)? * f21(0.25, 0.75, 1.5 - m, w)?
        / (2.0 * b.sqrt() * g(m)?);
    Ok(first + second)
}

fn qq_i2(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n, m) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"), args.v("m"));
    let z = args.z();
    let first = a.sqrt()
        * c.sqrt()
        * g(0.25 - n / 4.0)?
        * g(m + n / 4.0 - 0.25)?
        * f21((1.0 - n) / 4.0, (4.0 * m + n - 1.0) / 4.0, 0.5, z)?
        / (4.0 * g(m)?);
    let second = b * g(0.75 - n / 4.0)? * g(m + n / 4.0 + 0.25)? * f21(0.75 - n / 4.0, m + n / 4.0 + 0.25, 1.5, z)?
        / (2.0 * g(m)?);
    Ok(a.powf((n - 3.0) / 4.0) * c.powf((-4.0 * m - n - 1.0) / 4.0) * (first - second))
}

fn qq_i13(args: &Args) -> Result<f64, SpecialError> {
    let (a, b, c, n, m) = (args.v("a"), args.v("b"), args.v("c"), args.v("n"), args.v("m"));
    let w = args.w();
    let first = 2f64.powf(1.0 - 2.0 * m)
        * b.powf(1.0 - 2.0 * m)
        * a.powf((2.0 * m + n - 1.0) / 2.0)
        * g((1.0 - 2.0 * m - n) / 2.0)?
        * g((4.0 * m + n - 1.0) / 2.0)?
        / g(m)?
        * f21(m + n / 4.0 - 0.25, m + n / 4.0 + 0.25, m + n / 2.0 + 0.5, w)?;
    let second = 2f64.powf(n)
        * b.powf(n)
        * g((1.0 - n) / 2.0)?
        * c.powf((1.0 - 2.0 * m - n) / 2.0)
        * g((2.0 * m + n - 1.0) / 2.0)?
        * f21(0.25 - n / 4.0, 0.75 - n / 4.0, 1.5 - m - n / 2.0, w)?
        / g(m)?;
    Ok(2f64.powf(-n / 2.0 - 1.5) * b.powf(-n / 2.0 - 0.5) * (first + second))
}

const QUAD: Family = Family::Quadratic { equal_case: false };

pub(crate) static EVALUATORS: &[Evaluator] = &[
    Evaluator {
        id: "gaussian",
        parameters: &["p"],
        family: Family::Single,
        domain: |a| positive(a, &["p"]),
        branches: &[("closed", gaussian)],
        complex: None,
    },
    Evaluator {
        id: "feynman-hibbs",
        parameters: &["a", "b"],
        family: Family::Single,
        domain: |a| positive(a, &["a", "b"]),
        branches: &[("closed", feynman_real)],
        complex: Some(feynman),
    },
    Evaluator {
        id: "3.252-1",
        parameters: &["a", "b", "c", "n"],
        family: QUAD,
        domain: |a| {
            quadratic_domain(a)?;
            (a.v("n") > 0.5).then_some(()).ok_or_else(|| "n > 1/2".into())
        },
        branches: &[("I2", e1_i2), ("I13", e1_i13)],
        complex: None,
    },
    Evaluator {
        id: "3.252-3",
        parameters: &["a", "b", "c", "n"],
        family: QUAD,
        domain: |a| {
            quadratic_domain(a)?;
            (a.v("n") > -1.0).then_some(()).ok_or_else(|| "n > -1".into())
        },
        branches: &[("I2", e3_i2), ("I13", e3_i13)],
        complex: None,
    },
    Evaluator {
        id: "3.252-4",
        parameters: &["a", "b", "c", "n"],
        family: Family::Quadratic { equal_case: true },
        domain: |a| {
            quadratic_domain(a)?;
            (a.v("n") > 1.0).then_some(()).ok_or_else(|| "n > 1".into())
        },
        branches: &[("I2", e4_i2), ("I13", e4_i13), ("equal-case", e4_equal)],
        complex: None,
    },
    Evaluator {
        id: "quad-general",
        parameters: &["a", "b", "c", "n", "m"],
        family: QUAD,
        domain: |a| {
            quadratic_domain(a)?;
            if !(a.v("n") > -1.0) {
                return Err("n > -1".into());
            }
            (2.0 * a.v("m") - a.v("n") > 1.0).then_some(()).ok_or_else(|| "2m - n > 1".into())
        },
        branches: &[("I2", qg_i2), ("I13", qg_i13)],
        complex: None,
    },
    Evaluator {
        id: "quartic",
        parameters: &["a", "b", "c", "m"],
        family: QUAD,
        domain: |a| {
            quadratic_domain(a)?;
            (a.v("m") > 0.25).then_some(()).ok_or_else(|| "m > 1/4".into())
        },
        branches: &[("I2", q_i2), ("I13", q_i13)],
        complex: None,
    },
    Evaluator {
        id: "quartic-general",
        parameters: &["a", "b", "c", "n", "m"],
        family: QUAD,
        domain: |a| {
            quadratic_domain(a)?;
            if !(a.v("n") < 1.0) {
                return Err("n < 1".into());
            }
            (4.0 * a.v("m") + a.v("n") > 1.0).then_some(()).ok_or_else(|| "4m + n > 1".into())
        },
        branches: &[("I2", qq_i2), ("I13", qq_i13)],
        complex: None,
    },
];

pub(crate) fn evaluator(id: &str) -> Option<&'static Evaluator> {
    EVALUATORS.iter().find(|e| e.id == id)
}

impl Evaluator {
    pub fn branch_ids(&self) -> Vec<&'static str> {
        self.branches.iter().map(|(b, _)| *b).collect()
    }

    pub(crate) fn args<'a>(&self, params: &'a Params) -> Result<Args<'a>, CatalogError> {
        for p in self.parameters {
            match params.get(*p) {
                None => return Err(CatalogError::MissingParameter((*p).to_string())),
                Some(v) if !v.is_finite() => {
                    return Err(CatalogError::Domain {
                        id: self.id.into(),
                        condition: format!("{p} finite"),
                    })
                }
                _ => {}
            }
        }
        Ok(Args { params })
    }

    pub fn check_domain(&self, params: &Params) -> Result<(), CatalogError> {
        let args = self.args(params)?;
        (self.domain)(&args).map_err(|condition| CatalogError::Domain {
            id: self.id.into(),
            condition,
        })
    }

    /// Branch whose region guard holds at `params`.
    pub fn select_branch(&self, params: &Params) -> Result<&'static str, CatalogError> {
        let args = self.args(params)?;
        match self.family {
            Family::Single => Ok(self.branches[0].0),
            Family::Quadratic { equal_case } => {
                let (a, b, c) = (args.v("a"), args.v("b"), args.v("c"));
                let (ac, b2) = (a * c, b * b);
                if equal_case && (ac - b2).abs() <= EQUAL_CASE_TOL * ac.abs().max(b2) {
                    return Ok("equal-case");
                }
                let z = b2 / ac;
                if z.abs() < 1.0 {
                    Ok("I2")
                } else if (1.0 / z).abs() < 1.0 {
                    Ok("I13")
                } else {
                    Err(CatalogError::Region {
                        id: self.id.into(),
                        detail: format!("b^2/(ac) = {z} satisfies neither |b^2/(ac)| < 1 nor |ac/b^2| < 1"),
                    })
                }
            }
        }
    }

    /// Evaluates `branch` (or the active one) after the domain check.
    pub fn eval(&self, params: &Params, branch: Option<&str>) -> Result<(&'static str, Complex64), CatalogError> {
        self.check_domain(params)?;
        let branch = match branch {
            Some(b) => self
                .branches
                .iter()
                .map(|(id, _)| *id)
                .find(|id| *id == b)
                .ok_or_else(|| CatalogError::UnknownBranch {
                    id: self.id.into(),
                    branch: b.into(),
                })?,
            None => self.select_branch(params)?,
        };
        let args = self.args(params)?;
        if let Some(f) = self.complex {
            return Ok((branch, f(&args)));
        }
        let form = self.branches.iter().find(|(id, _)| *id == branch).expect("branch exists").1;
        let v = form(&args).map_err(|e| match e {
            SpecialError::Domain(detail) => CatalogError::Region {
                id: self.id.into(),
                detail,
            },
            other => CatalogError::Validity {
                id: self.id.into(),
                branch: branch.into(),
                detail: other.to_string(),
            },
        })?;
        if !v.is_finite() {
            return Err(CatalogError::Validity {
                id: self.id.into(),
                branch: branch.into(),
                detail: "closed form is not finite".into(),
            });
        }
        Ok((branch, Complex64::new(v, 0.0)))
    }
}
