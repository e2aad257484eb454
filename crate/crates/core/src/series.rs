//! Numerical evaluation of bracket-series solutions: term generation,
//! convergence classification, summation and combination.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::brackets::SeriesSolution;
use crate::rational::{rational_to_f64, IndexId, Rational};
use crate::special::{is_nonpositive_integer, ln_gamma_signed, POLE_TOL};

/// Width of the band around ratio 1 that is reported as inconclusive.
pub const RATIO_EPSILON: f64 = 1e-3;
/// Distance to an integer under which a k-independent gamma argument counts
/// as a pole.
pub const STATIC_POLE_TOL: f64 = 1e-9;
pub const DEFAULT_PROBE_DEPTH: usize = 48;
pub const DEFAULT_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_TERMS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermError {
    #[error("Gamma pole at argument {argument} (index {index})")]
    GammaPole { index: String, argument: f64 },
    #[error("zero base raised to negative power {exponent} (index {index})")]
    ZeroBasePole { index: String, exponent: f64 },
    #[error("normalizer Gamma({gamma}) is a pole")]
    NormalizerPole { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesError {
    #[error("term at k = {k:?} hits a pole: {source}")]
    GammaPoleAtTerm { k: Vec<u64>, source: TermError },
    #[error("no convergence after {} terms", partial.terms_used)]
    MaxTermsExceeded { partial: SeriesValue },
    #[error("no solution converges at this parameter point")]
    EmptyContribution,
}

/// A term in factored form: `sign * exp(log_mag + i phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TermValue {
    Zero,
    NonZero { log_mag: f64, sign: f64, phase: f64 },
}

impl TermValue {
    pub fn log_abs(&self) -> f64 {
        match self {
            TermValue::Zero => f64::NEG_INFINITY,
            TermValue::NonZero { log_mag, .. } => *log_mag,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            TermValue::Zero => Complex64::zero(),
            TermValue::NonZero { log_mag, sign, phase } => {
                let m = sign * log_mag.exp();
                if phase == 0.0 {
                    Complex64::new(m, 0.0)
                } else {
                    Complex64::from_polar(m, phase)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
struct SolvedIndex {
    id: IndexId,
    constant: f64,
    /// `(numerator, denominator)` of the coefficient of each free index.
    coefficients: Vec<(f64, f64)>,
}

impl SolvedIndex {
    fn value(&self, k: &[u64]) -> f64 {
        self.coefficients
            .iter()
            .zip(k)
            .fold(self.constant, |acc, ((p, q), kj)| acc + p * (*kj as f64) / q)
    }
}

/// Terms of one solution as a function of the free indices:
/// `det * prod Gamma(-n_i) * prod base_i^n_i * prod (-1)^k/k! / prod Gamma(gamma)`.
#[derive(Debug, Clone)]
pub struct TermGenerator {
    free_ids: Vec<IndexId>,
    solved: Vec<SolvedIndex>,
    bases: Vec<Complex64>,
    prefix_log: f64,
    prefix_sign: f64,
    scale: Complex64,
    period: u64,
}

impl TermGenerator {
    pub fn new(sol: &SeriesSolution) -> Result<Self, TermError> {
        let mut prefix_log = rational_to_f64(&sol.det_factor).ln();
        let mut prefix_sign = 1.0;
        for g in &sol.gamma_normalizers {
            let (lg, s) = ln_gamma_signed(*g).map_err(|_| TermError::NormalizerPole { gamma: *g })?;
            prefix_log -= lg;
            prefix_sign *= s;
        }
        let mut period = 1u64;
        let solved = sol
            .solved_maps
            .iter()
            .map(|(id, map)| SolvedIndex {
                id: *id,
                constant: map.constant,
                coefficients: sol
                    .free_ids
                    .iter()
                    .map(|f| {
                        let c = map.coefficient(*f);
                        let den = c.denom().to_u64().unwrap_or(1);
                        period = period.lcm(&den);
                        (rational_to_f64(&Rational::from_integer(c.numer().clone())), den as f64)
                    })
                    .collect(),
            })
            .collect();
        Ok(TermGenerator {
            free_ids: sol.free_ids.clone(),
            solved,
            bases: sol.bases.clone(),
            prefix_log,
            prefix_sign,
            scale: sol.scale,
            period,
        })
    }

    pub fn free_count(&self) -> usize {
        self.free_ids.len()
    }

    /// Least common denominator of the free-index coefficients: the lattice
    /// step after which every solved index moves by an integer.
    pub fn period(&self) -> u64 {
        self.period
    }

    /// Values of all indices at the given free-index point.
    pub fn index_values(&self, k: &[u64]) -> BTreeMap<IndexId, f64> {
        let mut out: BTreeMap<IndexId, f64> = self.free_ids.iter().zip(k).map(|(id, kj)| (*id, *kj as f64)).collect();
        for s in &self.solved {
            out.insert(s.id, s.value(k));
        }
        out
    }

    pub fn term_value(&self, k: &[u64]) -> Result<TermValue, TermError> {
        let mut log_mag = self.prefix_log;
        let mut sign = self.prefix_sign;
        let mut phase = 0.0;
        for s in &self.solved {
            let n = s.value(k);
            let (lg, sg) = ln_gamma_signed(-n).map_err(|_| TermError::GammaPole {
                index: s.id.to_string(),
                argument: -n,
            })?;
            log_mag += lg;
            sign *= sg;
        }
        for (kj, _) in k.iter().zip(&self.free_ids) {
            if kj % 2 == 1 {
                sign = -sign;
            }
            log_mag -= ln_gamma_signed(*kj as f64 + 1.0).expect("positive argument").0;
        }
        let values = self.index_values(k);
        for (id, n) in values {
            let b = self.bases[id.0];
            if b == Complex64::zero() {
                if n.abs() <= POLE_TOL {
                    continue;
                }
                if n > 0.0 {
                    return Ok(TermValue::Zero);
                }
                return Err(TermError::ZeroBasePole {
                    index: id.to_string(),
                    exponent: n,
                });
            }
            if n == 0.0 {
                continue;
            }
            log_mag += n * b.norm().ln();
            if b.im == 0.0 {
                if b.re < 0.0 {
                    if n.fract() == 0.0 {
                        if n.rem_euclid(2.0) == 1.0 {
                            sign = -sign;
                        }
                    } else {
                        phase += n * std::f64::consts::PI;
                    }
                }
            } else {
                phase += n * b.arg();
            }
        }
        if self.scale != Complex64::new(1.0, 0.0) {
            log_mag += self.scale.norm().ln();
            phase += self.scale.arg();
        }
        Ok(TermValue::NonZero { log_mag, sign, phase })
    }

    pub fn term(&self, k: &[u64]) -> Result<Complex64, TermError> {
        self.term_value(k).map(TermValue::to_complex)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Terminating,
    Convergent { ratio_limit: f64 },
    Divergent { ratio_limit: f64 },
    PrefactorPole { reason: String },
    Inconclusive { ratio_limit: Option<f64> },
}

impl Classification {
    pub fn contributes(&self) -> bool {
        matches!(self, Classification::Terminating | Classification::Convergent { .. })
    }

    pub fn ratio_limit(&self) -> Option<f64> {
        match self {
            Classification::Convergent { ratio_limit } | Classification::Divergent { ratio_limit } => Some(*ratio_limit),
            Classification::Inconclusive { ratio_limit } => *ratio_limit,
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Classification::Terminating => "terminating",
            Classification::Convergent { .. } => "convergent",
            Classification::Divergent { .. } => "divergent",
            Classification::PrefactorPole { .. } => "prefactor_pole",
            Classification::Inconclusive { .. } => "inconclusive",
        }
    }
}

fn near_integer(x: f64, tol: f64) -> bool {
    (x - x.round()).abs() <= tol
}

/// Last k with a possibly nonzero term when a zero base cuts the series off.
fn structural_checks(sol: &SeriesSolution) -> Result<Option<u64>, Classification> {
    let single = sol.free_ids.len() == 1;
    let mut last: Option<u64> = None;
    let mut cut = |k: u64| last = Some(last.map_or(k, |l| l.min(k)));
    for (id, map) in &sol.solved_maps {
        let zero_base = sol.bases[id.0] == Complex64::zero();
        if map.is_constant() {
            let n = map.constant;
            if is_nonpositive_integer(-n, STATIC_POLE_TOL) {
                return Err(Classification::PrefactorPole {
                    reason: format!("Gamma({}) from {id} is a pole for every k", -n),
                });
            }
            if zero_base && n < -POLE_TOL {
                return Err(Classification::PrefactorPole {
                    reason: format!("zero base of {id} raised to {n}"),
                });
            }
            if zero_base && n > POLE_TOL {
                cut(0);
            }
            continue;
        }
        if !single {
            continue;
        }
        let s: Rational = map.coefficient(sol.free_ids[0]);
        let s_f = rational_to_f64(&s);
        if s.is_positive() {
            let den = s.denom().to_u64().unwrap_or(1);
            for k0 in 0..den {
                if near_integer(map.constant + s_f * k0 as f64, STATIC_POLE_TOL) {
                    return Err(Classification::PrefactorPole {
                        reason: format!("Gamma(-({map})) from {id} hits poles for infinitely many k"),
                    });
                }
            }
        }
        if zero_base {
            if s.is_negative() {
                return Err(Classification::PrefactorPole {
                    reason: format!("zero base of {id} raised to {map}"),
                });
            }
            let k_end = (-map.constant / s_f + POLE_TOL).floor().max(0.0) as u64;
            cut(k_end);
        }
    }
    if single && sol.bases[sol.free_ids[0].0] == Complex64::zero() {
        cut(0);
    }
    Ok(last)
}

/// Polynomial extrapolation of `(x_i, y_i)` to `x = 0`.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i] * p[i + 1] - xs[i + m] * p[i]) / (xs[i] - xs[i + m]);
        }
    }
    p[0]
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.filter(|x| *x > f64::NEG_INFINITY).collect();
    let Some(m) = v.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// All free-index vectors with `sum k = d`.
fn shell(dim: usize, d: u64) -> Vec<Vec<u64>> {
    if dim == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    if dim == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in 0..=d {
        for mut rest in shell(dim - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn log_shell_magnitude(gen: &TermGenerator, d: u64) -> Result<f64, TermError> {
    let mut logs = Vec::new();
    for k in shell(gen.free_count(), d) {
        logs.push(gen.term_value(&k)?.log_abs());
    }
    Ok(log_sum_exp(logs.into_iter()))
}

/// Estimated `lim |t_{k+q} / t_k|` for the lattice period `q`, from four
/// same-residue ratios ending at `probe_depth`, extrapolated in `1/k`.
fn probe_ratio(gen: &TermGenerator, probe_depth: usize) -> Option<f64> {
    let q = gen.period();
    let d = (probe_depth as u64).max(5 * q);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in (1..=4).rev() {
        let k = d - j * q;
        let a = log_shell_magnitude(gen, k).ok()?;
        let b = log_shell_magnitude(gen, k + q).ok()?;
        if !a.is_finite() || !b.is_finite() {
            return None;
        }
        xs.push(1.0 / k as f64);
        ys.push((b - a).exp());
    }
    let rho = neville_at_zero(&xs, &ys).max(0.0);
    rho.is_finite().then_some(rho)
}

/// Convergence class of a solution at its bound parameters.
pub fn classify(sol: &SeriesSolution, probe_depth: usize) -> Classification {
    let gen = match TermGenerator::new(sol) {
        Ok(g) => g,
        Err(e) => {
            return Classification::PrefactorPole { reason: e.to_string() };
        }
    };
    match structural_checks(sol) {
        Err(c) => return c,
        Ok(Some(_)) => return Classification::Terminating,
        Ok(None) => {}
    }
    if sol.free_ids.is_empty() {
        return match gen.term_value(&[]) {
            Ok(_) => Classification::Terminating,
            Err(e) => Classification::PrefactorPole { reason: e.to_string() },
        };
    }
    match probe_ratio(&gen, probe_depth) {
        None => Classification::Inconclusive { ratio_limit: None },
        Some(rho) if rho < 1.0 - RATIO_EPSILON => Classification::Convergent { ratio_limit: rho },
        Some(rho) if rho > 1.0 + RATIO_EPSILON => Classification::Divergent { ratio_limit: rho },
        Some(rho) => Classification::Inconclusive { ratio_limit: Some(rho) },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesValue {
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub value: Complex64,
    pub terms_used: usize,
    pub est_error: f64,
    pub converged: bool,
}

/// Sums a solution's terms by diagonal shells until `tol * |S|` bounds the
/// shell magnitude for enough consecutive shells, or the series terminates.
pub fn evaluate_series(sol: &SeriesSolution, tol: f64, max_terms: usize) -> Result<SeriesValue, SeriesError> {
    let gen = TermGenerator::new(sol).map_err(|source| SeriesError::GammaPoleAtTerm { k: vec![], source })?;
    let last = structural_checks(sol).ok().flatten();
    let ratio = match classify(sol, DEFAULT_PROBE_DEPTH).ratio_limit() {
        Some(r) if r < 1.0 => Some(r.powf(1.0 / gen.period() as f64)),
        _ => None,
    };
    let needed = 3usize.max(2 * gen.period() as usize);
    let mut sum = Complex64::zero();
    let mut terms = 0usize;
    let mut small_run = 0usize;
    let mut last_mag = 0.0;
    let mut d = 0u64;
    loop {
        let mut shell_mag = 0.0;
        for k in shell(gen.free_count(), d) {
            let t = gen
                .term(&k)
                .map_err(|source| SeriesError::GammaPoleAtTerm { k: k.clone(), source })?;
            sum += t;
            shell_mag += t.norm();
            terms += 1;
        }
        last_mag = if shell_mag > 0.0 { shell_mag } else { last_mag };
        if gen.free_count() == 0 || last.is_some_and(|l| d >= l) {
            return Ok(SeriesValue {
                value: sum,
                terms_used: terms,
                est_error: 0.0,
                converged: true,
            });
        }
        if shell_mag <= tol * sum.norm() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        let est_error = match ratio {
            Some(r) => last_mag / (1.0 - r),
            None => last_mag,
        };
        if small_run >= needed {
            return Ok(SeriesValue {
                value: sum,
                terms_used: terms,
                est_error,
                converged: true,
            });
        }
        if terms >= max_terms {
            return Err(SeriesError::MaxTermsExceeded {
                partial: SeriesValue {
                    value: sum,
                    terms_used: terms,
                    est_error,
                    converged: false,
                },
            });
        }
        d += 1;
    }
}

/// Per-solution outcome fed to [`combine`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionOutcome {
    pub label: String,
    pub classification: Classification,
    pub evaluation: Option<Result<SeriesValue, SeriesError>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exclusion {
    pub label: String,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedValue {
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub value: Complex64,
    pub contributing: Vec<String>,
    pub excluded: Vec<Exclusion>,
    /// Some solution could not be classified; the value needs independent
    /// confirmation.
    pub inconclusive: bool,
    pub converged: bool,
    pub est_error: f64,
}

/// Classifies and, where convergent or terminating, evaluates one solution.
pub fn evaluate_solution(sol: &SeriesSolution, tol: f64, max_terms: usize, probe_depth: usize) -> SolutionOutcome {
    let classification = classify(sol, probe_depth);
    let evaluation = classification
        .contributes()
        .then(|| evaluate_series(sol, tol, max_terms));
    SolutionOutcome {
        label: sol.label(),
        classification,
        evaluation,
    }
}

/// Adds the contributions of every convergent or terminating solution.
pub fn combine(outcomes: &[SolutionOutcome]) -> Result<CombinedValue, SeriesError> {
    let mut out = CombinedValue {
        value: Complex64::zero(),
        contributing: Vec::new(),
        excluded: Vec::new(),
        inconclusive: false,
        converged: true,
        est_error: 0.0,
    };
    for o in outcomes {
        if !o.classification.contributes() {
            if matches!(o.classification, Classification::Inconclusive { .. }) {
                out.inconclusive = true;
            }
            out.excluded.push(Exclusion {
                label: o.label.clone(),
                classification: o.classification.clone(),
            });
            continue;
        }
        let v = match &o.evaluation {
            Some(Ok(v)) => v,
            Some(Err(SeriesError::MaxTermsExceeded { partial })) => {
                out.converged = false;
                partial
            }
            Some(Err(e)) => return Err(e.clone()),
            None => continue,
        };
        out.value += v.value;
        out.est_error += v.est_error;
        out.contributing.push(o.label.clone());
    }
    if out.contributing.is_empty() {
        return Err(SeriesError::EmptyContribution);
    }
    Ok(out)
}

/// `t_r * pFq(numerator; denominator; z)` summing the terms `k = q j + r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypergeometricPiece {
    pub residue: u64,
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub leading_term: Complex64,
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
    #[serde(serialize_with = "crate::report::ser_complex")]
    pub z: Complex64,
}

impl HypergeometricPiece {
    pub fn p(&self) -> usize {
        self.numerator.len()
    }

    pub fn q(&self) -> usize {
        self.denominator.len()
    }

    /// Compact notation such as `2F1(1, 1.5; 1.5; z)`.
    pub fn notation(&self) -> String {
        let j = |v: &[f64]| v.iter().map(|x| format!("{}", crate::report::round_sig(*x))).collect::<Vec<_>>().join(", ");
        format!("{}F{}({}; {}; z)", self.p(), self.q(), j(&self.numerator), j(&self.denominator))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypergeometricSignature {
    pub period: u64,
    pub pieces: Vec<HypergeometricPiece>,
}

const SHIFT_TOL: f64 = 1e-12;

fn remove_close(v: &mut Vec<f64>, x: f64) -> bool {
    match v.iter().position(|y| (y - x).abs() <= SHIFT_TOL) {
        Some(i) => {
            v.remove(i);
            true
        }
        None => false,
    }
}

fn cpowi(b: Complex64, e: i64) -> Complex64 {
    if e >= 0 {
        b.powi(e as i32)
    } else {
        b.inv().powi((-e) as i32)
    }
}

/// Reads the term ratio of each residue class as a hypergeometric one and
/// checks it against sampled terms. `None` for several free indices, for
/// pole-struck leading terms, or when the sampled ratios disagree.
pub fn hypergeometric_signature(sol: &SeriesSolution) -> Option<HypergeometricSignature> {
    let gen = TermGenerator::new(sol).ok()?;
    if sol.free_ids.is_empty() {
        return Some(HypergeometricSignature {
            period: 1,
            pieces: vec![HypergeometricPiece {
                residue: 0,
                leading_term: gen.term(&[]).ok()?,
                numerator: vec![],
                denominator: vec![],
                z: Complex64::zero(),
            }],
        });
    }
    if sol.free_ids.len() != 1 {
        return None;
    }
    let f = sol.free_ids[0];
    let q = gen.period();
    let qi = q as i64;
    let mut pieces = Vec::new();
    for r in 0..q {
        let mut num = Vec::new();
        let mut den = Vec::new();
        let mut z = Complex64::new(1.0, 0.0);
        for (id, map) in &sol.solved_maps {
            let s = map.coefficient(f);
            let a = -(map.constant + rational_to_f64(&s) * r as f64);
            let step = -(s.clone() * Rational::from_integer(qi.into())).to_integer().to_i64()?;
            if step > 0 {
                for l in 0..step {
                    num.push((a + l as f64) / step as f64);
                }
                z *= (step as f64).powi(step as i32);
            } else if step < 0 {
                let t = -step;
                for l in 1..=t {
                    den.push((l as f64 - a) / t as f64);
                }
                z *= (-(t as f64)).powi(-(t as i32));
            }
            z *= cpowi(sol.bases[id.0], -step);
        }
        for l in 1..=q {
            den.push((r + l) as f64 / q as f64);
        }
        z *= (-1.0f64).powi(q as i32) * (q as f64).powi(-(q as i32));
        z *= cpowi(sol.bases[f.0], qi);
        if !remove_close(&mut den, 1.0) {
            num.push(1.0);
        }
        let mut i = 0;
        while i < num.len() {
            if remove_close(&mut den, num[i]) {
                num.remove(i);
            } else {
                i += 1;
            }
        }
        let leading = gen.term(&[r]).ok()?;
        let mut prev = leading;
        for j in 0..4u64 {
            let next = gen.term(&[q * (j + 1) + r]).ok()?;
            let jf = j as f64;
            let predicted = z * num.iter().map(|a| jf + a).product::<f64>()
                / (den.iter().map(|b| jf + b).product::<f64>() * (jf + 1.0));
            let sampled = next / prev;
            if (sampled - predicted).norm() > 1e-8 * predicted.norm().max(1e-300) {
                return None;
            }
            prev = next;
        }
        num.sort_by(|a, b| a.total_cmp(b));
        den.sort_by(|a, b| a.total_cmp(b));
        pieces.push(HypergeometricPiece {
            residue: r,
            leading_term: leading,
            numerator: num,
            denominator: den,
            z,
        });
    }
    Some(HypergeometricSignature { period: q, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{build_bracket_series, enumerate_solutions};
    use crate::integrand::parse_integrand;
    use crate::special::{gamma_real, hyp1f0, hyp2f1, DEFAULT_HYP_TOL};
    use std::f64::consts::PI;

    fn solutions(text: &str, params: &[(&str, f64)]) -> Vec<SeriesSolution> {
        let b = params.iter().map(|(k, v)| (k.to_string(), Complex64::new(*v, 0.0))).collect();
        let ig = parse_integrand(text).unwrap().bind(&b).unwrap();
        enumerate_solutions(&build_bracket_series(&ig).unwrap()).unwrap().solutions
    }

    const QUAD: &str = "(a*x^2 + 2*b*x + c)^(-n)";

    fn quad(a: f64, b: f64, c: f64, n: f64) -> Vec<SeriesSolution> {
        solutions(QUAD, &[("a", a), ("b", b), ("c", c), ("n", n)])
    }

    fn combined(sols: &[SeriesSolution]) -> Result<CombinedValue, SeriesError> {
        let outcomes: Vec<_> = sols
            .iter()
            .map(|s| evaluate_solution(s, DEFAULT_TOL, DEFAULT_MAX_TERMS, DEFAULT_PROBE_DEPTH))
            .collect();
        combine(&outcomes)
    }

    #[test]
    fn quadratic_classification_below_diagonal() {
        let sols = quad(1.0, 0.5, 1.0, 1.5);
        let c: Vec<_> = sols.iter().map(|s| classify(s, 48)).collect();
        match &c[1] {
            Classification::Convergent { ratio_limit } => assert!((ratio_limit - 0.25).abs() < 1e-4, "{ratio_limit}"),
            other => panic!("{other:?}"),
        }
        for i in [0, 2] {
            match &c[i] {
                Classification::Divergent { ratio_limit } => assert!((ratio_limit - 4.0).abs() < 1e-4 * 4.0),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn quadratic_ratio_above_diagonal() {
        let sols = quad(1.0, 3.0, 1.5, 0.75);
        for i in [0, 2] {
            let rho = classify(&sols[i], 40).ratio_limit().unwrap();
            assert!((rho - 1.5 / 9.0).abs() < 1e-4, "{rho}");
        }
        let rho = classify(&sols[1], 40).ratio_limit().unwrap();
        assert!((rho - 6.0).abs() < 1e-4 * 6.0, "{rho}");
    }

    #[test]
    fn integer_n_is_prefactor_pole_on_outer_solutions() {
        let sols = quad(1.0, 0.5, 1.0, 1.0);
        for i in [0, 2] {
            assert!(matches!(classify(&sols[i], 48), Classification::PrefactorPole { .. }));
        }
    }

    #[test]
    fn quadratic_value() {
        let v = combined(&quad(1.0, 0.5, 1.0, 1.0)).unwrap();
        assert_eq!(v.contributing, vec!["I2"]);
        let want = 2.0 * PI / (3.0 * 3f64.sqrt());
        assert!((v.value.re - want).abs() < 1e-13 * want, "{}", v.value);
    }

    #[test]
    fn quadratic_value_above_diagonal_sums_two_solutions() {
        // mpmath quad of 1/(x^2+6x+1.5)^0.75 on [0, inf)
        let v = combined(&quad(1.0, 3.0, 1.5, 0.75)).unwrap();
        assert_eq!(v.contributing, vec!["I1", "I3"]);
        assert!((v.value.re - 1.44749041083693).abs() < 1e-12, "{}", v.value);
    }

    #[test]
    fn boundary_is_empty() {
        assert_eq!(combined(&quad(1.0, 1.0, 1.0, 1.5)), Err(SeriesError::EmptyContribution));
    }

    #[test]
    fn gaussian() {
        let sol = &solutions("exp(-x^2)", &[])[0];
        assert_eq!(classify(sol, 48), Classification::Terminating);
        let v = evaluate_series(sol, 1e-15, 100).unwrap();
        assert!((v.value.re - PI.sqrt() / 2.0).abs() < 1e-14);
        assert_eq!(v.terms_used, 1);
    }

    #[test]
    fn master_theorem_path() {
        let sol = &solutions("x^-0.5 * exp(-x)", &[])[0];
        let v = evaluate_series(sol, 1e-15, 100).unwrap();
        assert!((v.value.re - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn feynman_hibbs() {
        let b = [("a", 1.0), ("b", 1.0)].iter().map(|(k, v)| (k.to_string(), Complex64::new(*v, 0.0))).collect();
        let ig = parse_integrand("exp(i*a*x^-2 + i*b*x^2)").unwrap().bind(&b).unwrap();
        let sols = enumerate_solutions(&build_bracket_series(&ig).unwrap()).unwrap().solutions;
        let v = combined(&sols).unwrap();
        assert_eq!(v.contributing.len(), 2);
        // mpmath: exp(i pi/4) exp(2i) sqrt(pi)/2
        assert!((v.value - Complex64::new(-0.830599016754445, 0.309036303310789)).norm() < 1e-12, "{}", v.value);
    }

    #[test]
    fn zero_middle_coefficient_terminates() {
        let sols = quad(1.0, 0.0, 1.0, 1.0);
        assert_eq!(classify(&sols[1], 48), Classification::Terminating);
        let v = combined(&sols).unwrap();
        assert!((v.value.re - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn isolated_pole_aborts() {
        // 3.252-3 template at half-integer n: Gamma(2n+2k+2) poles only at small k on I3.
        let sols = solutions(
            "x^0 * (a*x^2 + 2*b*x + c)^(-n-3/2)",
            &[("a", 1.0), ("b", 3.0), ("c", 1.5), ("n", -0.5)],
        );
        assert!(matches!(classify(&sols[0], 48), Classification::PrefactorPole { .. }));
    }

    #[test]
    fn max_terms_returns_partial() {
        let sols = quad(1.0, 0.99, 1.0, 1.5);
        match evaluate_series(&sols[1], 1e-15, 10) {
            Err(SeriesError::MaxTermsExceeded { partial }) => {
                assert!(!partial.converged);
                assert_eq!(partial.terms_used, 10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn longer_budget_changes_less_than_error_estimate() {
        let sols = quad(1.0, 0.5, 1.0, 2.3);
        let a = evaluate_series(&sols[1], 1e-15, 1000).unwrap();
        let b = evaluate_series(&sols[1], 1e-15, 1050).unwrap();
        assert!((a.value - b.value).norm() <= a.est_error.max(f64::EPSILON * a.value.norm()));
    }

    #[test]
    fn signature_of_quadratic_i2() {
        let (a, b, c, n) = (1.0, 0.5, 1.0, 1.0);
        let sols = quad(a, b, c, n);
        let sig = hypergeometric_signature(&sols[1]).unwrap();
        assert_eq!(sig.period, 2);
        let z = b * b / (a * c);
        let even = &sig.pieces[0];
        assert_eq!((even.numerator.clone(), even.denominator.clone()), (vec![0.5], vec![]));
        let odd = &sig.pieces[1];
        assert_eq!((odd.numerator.clone(), odd.denominator.clone()), (vec![1.0, 1.0], vec![1.5]));
        assert_eq!(odd.notation(), "2F1(1, 1; 1.5; z)");
        for p in &sig.pieces {
            assert!((p.z.re - z).abs() < 1e-15 && p.z.im == 0.0);
        }
        let total = even.leading_term * hyp1f0(0.5, even.z, DEFAULT_HYP_TOL).unwrap().value
            + odd.leading_term * hyp2f1(1.0, 1.0, 1.5, odd.z, DEFAULT_HYP_TOL).unwrap().value;
        let want = evaluate_series(&sols[1], 1e-15, 1000).unwrap().value;
        assert!((total - want).norm() < 1e-13);
    }

    #[test]
    fn signature_of_quartic_i2() {
        let sols = solutions(
            "(a*x^4 + 2*b*x^2 + c)^(-m)",
            &[("a", 1.0), ("b", 0.5), ("c", 1.0), ("m", 1.0)],
        );
        let sig = hypergeometric_signature(&sols[1]).unwrap();
        let first = &sig.pieces[0];
        assert_eq!(first.numerator, vec![0.25, 0.75]);
        assert_eq!(first.denominator, vec![0.5]);
        assert!((first.z.re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn signature_of_single_term() {
        let sol = &solutions("exp(-x^3)", &[])[0];
        let sig = hypergeometric_signature(sol).unwrap();
        assert_eq!(sig.pieces.len(), 1);
        assert!(sig.pieces[0].numerator.is_empty());
        let want = gamma_real(1.0 / 3.0).unwrap() / 3.0;
        assert!((sig.pieces[0].leading_term.re - want).abs() < 1e-14);
    }

    #[test]
    fn two_free_indices() {
        let sols = solutions("x^0.5 * exp(-x) * exp(-2*x) * exp(-4*x)", &[]);
        assert_eq!(sols.len(), 3);
        assert!(sols.iter().all(|s| s.free_ids.len() == 2));
        let classes: Vec<_> = sols.iter().map(|s| classify(s, 48).name()).collect();
        assert_eq!(classes, vec!["convergent", "divergent", "divergent"]);
        let v = combined(&sols).unwrap();
        let want = gamma_real(1.5).unwrap() / 7f64.powf(1.5);
        assert!((v.value.re - want).abs() < 1e-13 * want, "{} vs {want}", v.value);
    }

    #[test]
    fn neville_recovers_polynomial() {
        let xs = [0.1, 0.2, 0.3, 0.4];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 3.0 * x - x * x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shells_enumerate_compositions() {
        assert_eq!(shell(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(shell(0, 0), vec![Vec::<u64>::new()]);
        assert_eq!(shell(3, 3).len(), 10);
    }
}
