//! Bracket series of an integrand and the enumeration of its solutions.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::integrand::{Integrand, IntegrandError};
use crate::rational::{
    solve_affine_system, AffineIndexMap, IndexId, LinearRow, Rational, SolveError,
};
use crate::special::{is_nonpositive_integer, POLE_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BracketError {
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
    #[error("integrand has unbound parameters: {0:?}")]
    Unbound(Vec<String>),
    #[error("power factor {factor} has exponent {alpha}; Gamma({gamma}) is a pole, expand it as a finite sum instead")]
    GammaNormalizerPole { factor: usize, alpha: f64, gamma: f64 },
    #[error("bracket {0} has no index dependence")]
    DegenerateBracket(String),
    #[error("{brackets} brackets but only {indices} indices")]
    TooManyBrackets { brackets: usize, indices: usize },
    #[error("series has no brackets")]
    NoBrackets,
}

/// `<sum_i c_i n_i + constant>`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearForm {
    #[serde(serialize_with = "ser_coefficients")]
    pub coefficients: BTreeMap<IndexId, Rational>,
    pub constant: f64,
}

fn ser_coefficients<S: serde::Serializer>(m: &BTreeMap<IndexId, Rational>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k.to_string(), v.to_string())))
}

impl LinearForm {
    pub fn is_degenerate(&self) -> bool {
        self.coefficients.values().all(|c| c.is_zero())
    }

    pub fn coefficient(&self, id: IndexId) -> Rational {
        self.coefficients.get(&id).cloned().unwrap_or_else(Rational::zero)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let map = AffineIndexMap {
            constant: self.constant,
            coefficients: self.coefficients.clone(),
        };
        write!(f, "<{map}>")
    }
}

/// One summation index: its base factor `base^n` and where it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesIndex {
    pub id: IndexId,
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub base: Complex64,
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketSeries {
    pub indices: Vec<SeriesIndex>,
    /// Each normalizer contributes `1 / Gamma(gamma)`.
    pub gamma_normalizers: Vec<f64>,
    pub brackets: Vec<LinearForm>,
    /// Constant factor from `exp(c)` terms with no x dependence.
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub scale: Complex64,
}

/// Builds the bracket series: one index per monomial of each power factor and
/// per exponential factor, one bracket per power factor, and the final bracket
/// from integrating the collected power of x.
pub fn build_bracket_series(integrand: &Integrand) -> Result<BracketSeries, BracketError> {
    let unbound = integrand.free_parameters();
    if !unbound.is_empty() {
        return Err(BracketError::Unbound(unbound.into_iter().collect()));
    }
    let mut indices = Vec::new();
    let mut gamma_normalizers = Vec::new();
    let mut brackets = Vec::new();
    let mut final_form = LinearForm {
        coefficients: BTreeMap::new(),
        constant: integrand.prefactor_exponent_value()? + 1.0,
    };
    let mut scale = Complex64::new(1.0, 0.0);

    for (j, factor) in integrand.power_factors.iter().enumerate() {
        let alpha = factor.exponent_value()?;
        let gamma = -alpha;
        if is_nonpositive_integer(gamma, POLE_TOL) {
            return Err(BracketError::GammaNormalizerPole { factor: j, alpha, gamma });
        }
        gamma_normalizers.push(gamma);
        let mut form = LinearForm {
            coefficients: BTreeMap::new(),
            constant: gamma,
        };
        for (i, mono) in factor.base.iter().enumerate() {
            let id = IndexId(indices.len());
            indices.push(SeriesIndex {
                id,
                base: mono.coefficient_value()?,
                origin: format!("power factor {} term {}", j + 1, i + 1),
            });
            form.coefficients.insert(id, Rational::one());
            let e = mono.exponent_value()?;
            if !e.is_zero() {
                final_form.coefficients.insert(id, e);
            }
        }
        brackets.push(form);
    }

    for (j, factor) in integrand.exp_factors.iter().enumerate() {
        let c = factor.argument.coefficient_value()?;
        let p = factor.argument.exponent_value()?;
        if p.is_zero() {
            scale *= c.exp();
            continue;
        }
        let id = IndexId(indices.len());
        indices.push(SeriesIndex {
            id,
            base: -c,
            origin: format!("exp factor {}", j + 1),
        });
        final_form.coefficients.insert(id, p);
    }

    if final_form.is_degenerate() {
        return Err(BracketError::DegenerateBracket(final_form.to_string()));
    }
    brackets.push(final_form);
    if brackets.len() > indices.len() {
        return Err(BracketError::TooManyBrackets {
            brackets: brackets.len(),
            indices: indices.len(),
        });
    }
    Ok(BracketSeries {
        indices,
        gamma_normalizers,
        brackets,
        scale,
    })
}

/// One choice of free indices with the remaining ones solved from the
/// brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub free_ids: Vec<IndexId>,
    pub solved_maps: BTreeMap<IndexId, AffineIndexMap>,
    /// `1 / |det A|`
    pub det_factor: Rational,
    pub bases: Vec<Complex64>,
    pub gamma_normalizers: Vec<f64>,
    pub scale: Complex64,
}

impl SeriesSolution {
    /// Paper-style label: `I2` for free index n2, `I1,3` style for several,
    /// `I` for a solution with no free index.
    pub fn label(&self) -> String {
        let ids = self.free_ids.iter().map(|id| (id.0 + 1).to_string()).join(",");
        format!("I{ids}")
    }

    pub fn index_count(&self) -> usize {
        self.bases.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCandidate {
    pub free_ids: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub solutions: Vec<SeriesSolution>,
    pub skipped: Vec<SkippedCandidate>,
}

/// Solves the brackets for every subset of free indices of size
/// `indices - brackets`, in lexicographic order.
pub fn enumerate_solutions(series: &BracketSeries) -> Result<Enumeration, BracketError> {
    if series.brackets.is_empty() {
        return Err(BracketError::NoBrackets);
    }
    let all: Vec<IndexId> = series.indices.iter().map(|i| i.id).collect();
    let free_count = all.len() - series.brackets.len();
    let bases: Vec<Complex64> = series.indices.iter().map(|i| i.base).collect();
    let mut out = Enumeration {
        solutions: Vec::new(),
        skipped: Vec::new(),
    };
    for free in all.iter().copied().combinations(free_count) {
        let solved: Vec<IndexId> = all.iter().copied().filter(|id| !free.contains(id)).collect();
        let rows: Vec<LinearRow> = series
            .brackets
            .iter()
            .map(|form| {
                let coefficients = solved
                    .iter()
                    .map(|id| (*id, form.coefficient(*id)))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                let mut rhs = AffineIndexMap::constant(-form.constant);
                for id in &free {
                    let c = form.coefficient(*id);
                    if !c.is_zero() {
                        rhs = rhs.add_scaled(&AffineIndexMap::index(*id), &-c);
                    }
                }
                LinearRow { coefficients, rhs }
            })
            .collect();
        match solve_affine_system(&rows, &solved) {
            Ok(sol) => out.solutions.push(SeriesSolution {
                free_ids: free,
                solved_maps: sol.solutions,
                det_factor: sol.abs_det.recip(),
                bases: bases.clone(),
                gamma_normalizers: series.gamma_normalizers.clone(),
                scale: series.scale,
            }),
            Err(SolveError::SingularMatrix) => out.skipped.push(SkippedCandidate {
                free_ids: free.iter().map(|id| id.to_string()).collect(),
                reason: "singular matrix".into(),
            }),
            Err(e) => unreachable!("square system by construction: {e:?}"),
        }
    }
    Ok(out)
}

/// Number of free-index subsets that [`enumerate_solutions`] considers.
pub fn candidate_count(series: &BracketSeries) -> usize {
    let n = series.indices.len();
    let k = n - series.brackets.len();
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
fn det_factor_f64(r: &Rational) -> f64 {
    use num_traits::Signed;
    crate::rational::rational_to_f64(&r.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::parse_integrand;
    use crate::special::gamma_real;

    fn bind(text: &str, params: &[(&str, f64)]) -> Integrand {
        let b = params.iter().map(|(k, v)| (k.to_string(), Complex64::new(*v, 0.0))).collect();
        parse_integrand(text).unwrap().bind(&b).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// Value of a zero-free solution from its defining formula.
    fn single_term(sol: &SeriesSolution) -> f64 {
        let mut v = det_factor_f64(&sol.det_factor);
        for (id, map) in &sol.solved_maps {
            let n = map.constant;
            v *= gamma_real(-n).unwrap() * sol.bases[id.0].re.powf(n);
        }
        for g in &sol.gamma_normalizers {
            v /= gamma_real(*g).unwrap();
        }
        v
    }

    #[test]
    fn quadratic_brackets() {
        let s = build_bracket_series(&bind(
            "(a*x^2 + 2*b*x + c)^(-n)",
            &[("a", 1.0), ("b", 0.5), ("c", 1.0), ("n", 1.5)],
        ))
        .unwrap();
        assert_eq!(s.indices.len(), 3);
        assert_eq!(s.gamma_normalizers, vec![1.5]);
        assert_eq!(s.brackets[0].to_string(), "<n1 + n2 + n3 + 1.5>");
        assert_eq!(s.brackets[1].to_string(), "<2*n1 + n2 + 1>");
        assert_eq!(s.indices[1].base, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn quadratic_solutions() {
        let s = build_bracket_series(&bind(
            "(a*x^2 + 2*b*x + c)^(-n)",
            &[("a", 1.0), ("b", 0.5), ("c", 1.0), ("n", 1.0)],
        ))
        .unwrap();
        let e = enumerate_solutions(&s).unwrap();
        assert!(e.skipped.is_empty());
        let labels: Vec<_> = e.solutions.iter().map(|s| s.label()).collect();
        assert_eq!(labels, vec!["I1", "I2", "I3"]);
        let i2 = &e.solutions[1];
        assert_eq!(i2.det_factor, q(1, 2));
        let n1 = &i2.solved_maps[&IndexId(0)];
        assert_eq!(n1.coefficient(IndexId(1)), q(-1, 2));
        assert!((n1.constant + 0.5).abs() < 1e-15);
        let n3 = &i2.solved_maps[&IndexId(2)];
        assert_eq!(n3.coefficient(IndexId(1)), q(-1, 2));
        assert!((n3.constant + 0.5).abs() < 1e-15);
    }

    #[test]
    fn generalized_quartic_brackets() {
        let s = build_bracket_series(&bind(
            "x^(-n) * (a*x^4 + 2*b*x^2 + c)^(-m)",
            &[("a", 1.0), ("b", 0.5), ("c", 1.0), ("n", 0.5), ("m", 1.0)],
        ))
        .unwrap();
        assert_eq!(s.brackets[0].to_string(), "<n1 + n2 + n3 + 1>");
        assert_eq!(s.brackets[1].to_string(), "<4*n1 + 2*n2 + 0.5>");
    }

    #[test]
    fn gaussian_single_term() {
        for p in [1.0, 2.0, 3.0, 4.5] {
            let s = build_bracket_series(&bind("exp(-x^p)", &[("p", p)])).unwrap();
            assert_eq!(s.indices[0].base, Complex64::new(1.0, 0.0));
            let e = enumerate_solutions(&s).unwrap();
            assert_eq!(e.solutions.len(), 1);
            let sol = &e.solutions[0];
            assert!(sol.free_ids.is_empty());
            assert!((sol.solved_maps[&IndexId(0)].constant + 1.0 / p).abs() < 1e-15);
            let want = gamma_real(1.0 / p).unwrap() / p;
            let got = single_term(sol);
            assert!((got - want).abs() < 1e-12 * want, "p = {p}: {got} vs {want}");
        }
    }

    #[test]
    fn master_theorem_one_index() {
        for s_val in [0.5, 1.0, 2.5] {
            let ig = bind("x^(s-1) * exp(-x)", &[("s", s_val)]);
            let series = build_bracket_series(&ig).unwrap();
            let sol = &enumerate_solutions(&series).unwrap().solutions[0];
            let want = gamma_real(s_val).unwrap();
            assert!((single_term(sol) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn feynman_bases_and_solution() {
        let b = [("a", Complex64::new(1.0, 0.0)), ("b", Complex64::new(1.0, 0.0))]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let ig = parse_integrand("exp(i*a*x^-2 + i*b*x^2)").unwrap().bind(&b).unwrap();
        let s = build_bracket_series(&ig).unwrap();
        assert_eq!(s.indices[0].base, Complex64::new(0.0, -1.0));
        let e = enumerate_solutions(&s).unwrap();
        assert_eq!(e.solutions.len(), 2);
        let first = &e.solutions[0];
        assert_eq!(first.det_factor, q(1, 2));
        let n2 = &first.solved_maps[&IndexId(1)];
        assert_eq!(n2.coefficient(IndexId(0)), q(1, 1));
        assert!((n2.constant + 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_brackets_are_skipped() {
        let first = LinearForm {
            coefficients: [(IndexId(0), q(1, 1)), (IndexId(1), q(1, 1)), (IndexId(2), q(1, 1))].into(),
            constant: 1.0,
        };
        let second = LinearForm {
            coefficients: [(IndexId(0), q(2, 1)), (IndexId(1), q(2, 1))].into(),
            constant: 1.0,
        };
        let series = BracketSeries {
            indices: (0..3)
                .map(|i| SeriesIndex {
                    id: IndexId(i),
                    base: Complex64::new(1.0, 0.0),
                    origin: String::new(),
                })
                .collect(),
            gamma_normalizers: vec![],
            brackets: vec![first, second],
            scale: Complex64::new(1.0, 0.0),
        };
        let e = enumerate_solutions(&series).unwrap();
        assert_eq!(e.skipped.len(), 1);
        assert_eq!(e.skipped[0].free_ids, vec!["n3"]);
        assert_eq!(e.solutions.len() + e.skipped.len(), candidate_count(&series));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            build_bracket_series(&bind("(x + 1)^(2)", &[])),
            Err(BracketError::GammaNormalizerPole { .. })
        ));
        assert!(matches!(
            build_bracket_series(&bind("x^0", &[])),
            Err(BracketError::DegenerateBracket(_))
        ));
        assert!(matches!(
            build_bracket_series(&parse_integrand("exp(-x^2*a)").unwrap()),
            Err(BracketError::Unbound(_))
        ));
        let empty = BracketSeries {
            indices: vec![],
            gamma_normalizers: vec![],
            brackets: vec![],
            scale: Complex64::new(1.0, 0.0),
        };
        assert_eq!(enumerate_solutions(&empty), Err(BracketError::NoBrackets));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::integrand::parse_integrand;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn enumeration_is_exhaustive_and_deterministic(
            exps in proptest::collection::btree_set(-3i32..6, 1..4),
            nexp in 0usize..3,
            alpha in -3.0f64..-0.1,
        ) {
            let mono: Vec<String> = exps.iter().map(|e| format!("2*x^{e}")).collect();
            let mut text = format!("({})^({alpha})", mono.join(" + "));
            for j in 0..nexp {
                text.push_str(&format!(" * exp(-x^{})", j + 7));
            }
            let ig = parse_integrand(&text).unwrap();
            let series = match build_bracket_series(&ig) {
                Ok(s) => s,
                Err(_) => return Ok(()),
            };
            let a = enumerate_solutions(&series).unwrap();
            let b = enumerate_solutions(&series).unwrap();
            prop_assert_eq!(a.solutions.len() + a.skipped.len(), candidate_count(&series));
            prop_assert_eq!(&a, &b);
            for sol in &a.solutions {
                prop_assert!(sol.det_factor > Rational::zero());
                prop_assert_eq!(sol.free_ids.len() + sol.solved_maps.len(), series.indices.len());
            }
        }
    }
}
