//! Exact rational arithmetic over the summation-index lattice.
//!
//! Index coefficients are kept as exact rationals while the constant
//! offsets of a linear form are plain `f64`, since they come from
//! numerically bound parameters such as `n + 3/2`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rational = num_rational::BigRational;

/// Identifier of a summation index `n_i`. Displayed one-based (`n1`, `n2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexId(pub usize);

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0 + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("coefficient matrix is singular")]
    SingularMatrix,
    #[error("system is not square: {rows} rows for {unknowns} unknowns")]
    NotSquare { rows: usize, unknowns: usize },
    #[error("row references {0} which is not among the solved indices")]
    UnknownIndex(IndexId),
}

pub fn rational_from_i64(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite `f64` to a rational whose value is the
/// nearest "simple" fraction: continued-fraction convergents are taken until
/// the approximation error drops below a few ulps of `max(1, |x|)` or the
/// denominator exceeds `max_den`.
pub fn rational_from_f64(x: f64, max_den: u64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let tol = 8.0 * f64::EPSILON * x.abs().max(1.0);
    let sign = if x < 0.0 { -1i64 } else { 1 };
    let mut rem = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    for _ in 0..64 {
        let a = rem.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let p2 = ai * p1 + p0;
        let q2 = ai * q1 + q0;
        if q2 as u128 > max_den as u128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let approx = p1 as f64 / q1 as f64;
        if (approx - x.abs()).abs() <= tol {
            let num = BigInt::from(p1) * BigInt::from(sign);
            return Some(Rational::new(num, BigInt::from(q1)));
        }
        let frac = rem - a;
        if frac == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    None
}

/// An affine function of the free summation indices:
/// `constant + sum_j coefficients[j] * k_j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineIndexMap {
    pub constant: f64,
    #[serde(with = "rational_map")]
    pub coefficients: BTreeMap<IndexId, Rational>,
}

impl AffineIndexMap {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            coefficients: BTreeMap::new(),
        }
    }

    pub fn index(id: IndexId) -> Self {
        let mut coefficients = BTreeMap::new();
        coefficients.insert(id, Rational::one());
        Self {
            constant: 0.0,
            coefficients,
        }
    }

    pub fn coefficient(&self, id: IndexId) -> Rational {
        self.coefficients.get(&id).cloned().unwrap_or_else(Rational::zero)
    }

    /// True when every coefficient is zero (the constant is ignored).
    pub fn is_constant(&self) -> bool {
        self.coefficients.values().all(Zero::is_zero)
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        let f = rational_to_f64(factor);
        let mut out = Self::constant(self.constant * f);
        for (id, c) in &self.coefficients {
            let v = c * factor;
            if !v.is_zero() {
                out.coefficients.insert(*id, v);
            }
        }
        out
    }

    /// `self + factor * other`
    pub fn add_scaled(&self, other: &Self, factor: &Rational) -> Self {
        let f = rational_to_f64(factor);
        let mut out = self.clone();
        out.constant += other.constant * f;
        for (id, c) in &other.coefficients {
            let entry = out.coefficients.entry(*id).or_insert_with(Rational::zero);
            *entry += c * factor;
        }
        out.coefficients.retain(|_, v| !v.is_zero());
        out
    }

    /// Evaluates at integer (or real) values of the free indices. Missing
    /// indices count as zero.
    pub fn eval(&self, values: &BTreeMap<IndexId, f64>) -> f64 {
        self.coefficients.iter().fold(self.constant, |acc, (id, c)| {
            acc + rational_to_f64(c) * values.get(id).copied().unwrap_or(0.0)
        })
    }

    /// Exact zero test on the rational part, `1e-12` absolute on the constant.
    pub fn is_zero(&self) -> bool {
        self.is_constant() && self.constant.abs() <= 1e-12
    }
}

impl fmt::Display for AffineIndexMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (id, c) in &self.coefficients {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if wrote { "+" } else { "" };
            let mag = c.abs();
            if wrote {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            if mag.is_one() {
                write!(f, "{id}")?;
            } else {
                write!(f, "{mag}*{id}")?;
            }
            wrote = true;
        }
        if !wrote {
            return write!(f, "{}", self.constant);
        }
        if self.constant != 0.0 {
            let sign = if self.constant < 0.0 { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.abs())?;
        }
        Ok(())
    }
}

/// One equation `sum_i coefficients[i] * n_i = rhs` where the `n_i` are the
/// indices being solved for and `rhs` is affine in the remaining free ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub coefficients: BTreeMap<IndexId, Rational>,
    pub rhs: AffineIndexMap,
}

/// Solution of a square system: each solved index as an affine map of the
/// free indices, plus `|det A|` of the coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSolution {
    pub solutions: BTreeMap<IndexId, AffineIndexMap>,
    pub abs_det: Rational,
}

/// Gauss-Jordan elimination over the rationals. Columns follow the order of
/// `solved`; the pivot is the first row with a nonzero entry in the current
/// column.
pub fn solve_affine_system(rows: &[LinearRow], solved: &[IndexId]) -> Result<AffineSolution, SolveError> {
    let n = solved.len();
    if rows.len() != n {
        return Err(SolveError::NotSquare {
            rows: rows.len(),
            unknowns: n,
        });
    }
    let col_of: BTreeMap<IndexId, usize> = solved.iter().enumerate().map(|(i, id)| (*id, i)).collect();

    let mut matrix: Vec<Vec<Rational>> = Vec::with_capacity(n);
    let mut rhs: Vec<AffineIndexMap> = Vec::with_capacity(n);
    for row in rows {
        let mut dense = vec![Rational::zero(); n];
        for (id, c) in &row.coefficients {
            if c.is_zero() {
                continue;
            }
            let col = *col_of.get(id).ok_or(SolveError::UnknownIndex(*id))?;
            dense[col] = c.clone();
        }
        matrix.push(dense);
        rhs.push(row.rhs.clone());
    }

    let mut det = Rational::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !matrix[r][col].is_zero())
            .ok_or(SolveError::SingularMatrix)?;
        if pivot_row != col {
            matrix.swap(pivot_row, col);
            rhs.swap(pivot_row, col);
            det = -det;
        }
        let pivot = matrix[col][col].clone();
        det *= &pivot;
        let inv = pivot.recip();
        for entry in matrix[col].iter_mut() {
            *entry *= &inv;
        }
        rhs[col] = rhs[col].scaled(&inv);

        for r in 0..n {
            if r == col || matrix[r][col].is_zero() {
                continue;
            }
            let factor = -matrix[r][col].clone();
            let pivot_row = matrix[col].clone();
            for (entry, p) in matrix[r].iter_mut().zip(&pivot_row) {
                *entry += &factor * p;
            }
            rhs[r] = rhs[r].add_scaled(&rhs[col], &factor);
        }
    }

    let solutions = solved.iter().copied().zip(rhs).collect();
    Ok(AffineSolution {
        solutions,
        abs_det: det.abs(),
    })
}

mod rational_map {
    use super::{IndexId, Rational};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(map: &BTreeMap<IndexId, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let strings: BTreeMap<String, String> = map.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        strings.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<IndexId, Rational>, D::Error> {
        use serde::de::Error;
        let strings = BTreeMap::<String, String>::deserialize(d)?;
        strings
            .into_iter()
            .map(|(k, v)| {
                let idx: usize = k
                    .strip_prefix('n')
                    .and_then(|s| s.parse().ok())
                    .filter(|&i: &usize| i > 0)
                    .ok_or_else(|| D::Error::custom(format!("bad index id {k}")))?;
                let r: Rational = v.parse().map_err(|_| D::Error::custom(format!("bad rational {v}")))?;
                Ok((IndexId(idx - 1), r))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn row(coeffs: &[(usize, Rational)], rhs: AffineIndexMap) -> LinearRow {
        LinearRow {
            coefficients: coeffs.iter().map(|(i, c)| (IndexId(*i), c.clone())).collect(),
            rhs,
        }
    }

    #[test]
    fn rational_stays_normalized() {
        let r = q(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        let s = &r + q(1, 6);
        assert_eq!(s, q(-4, 3));
    }

    #[test]
    fn quadratic_system_with_middle_index_free() {
        // n + n1 + n2 + n3 = 0 and 2 n1 + n2 + 1 = 0, n2 free, n = 1.5
        let n = 1.5;
        let free = IndexId(1);
        let mut rhs1 = AffineIndexMap::constant(-n);
        rhs1.coefficients.insert(free, q(-1, 1));
        let mut rhs2 = AffineIndexMap::constant(-1.0);
        rhs2.coefficients.insert(free, q(-1, 1));
        let rows = vec![
            row(&[(0, q(1, 1)), (2, q(1, 1))], rhs1),
            row(&[(0, q(2, 1))], rhs2),
        ];
        let sol = solve_affine_system(&rows, &[IndexId(0), IndexId(2)]).unwrap();
        assert_eq!(sol.abs_det, q(2, 1));
        let n1 = &sol.solutions[&IndexId(0)];
        assert_eq!(n1.coefficient(free), q(-1, 2));
        assert!((n1.constant + 0.5).abs() < 1e-15);
        let n3 = &sol.solutions[&IndexId(2)];
        assert_eq!(n3.coefficient(free), q(-1, 2));
        assert!((n3.constant - (-n + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn identity_system() {
        let rows = vec![
            row(&[(0, q(1, 1))], AffineIndexMap::constant(2.5)),
            row(&[(1, q(1, 1))], AffineIndexMap::constant(-7.0)),
        ];
        let sol = solve_affine_system(&rows, &[IndexId(0), IndexId(1)]).unwrap();
        assert_eq!(sol.abs_det, q(1, 1));
        assert_eq!(sol.solutions[&IndexId(0)].constant, 2.5);
        assert_eq!(sol.solutions[&IndexId(1)].constant, -7.0);
    }

    #[test]
    fn feynman_hibbs_bracket() {
        // <2 n2 - 2 n1 + 1>, n1 free: 2 n2 = 2 n1 - 1
        let free = IndexId(0);
        let mut rhs = AffineIndexMap::constant(-1.0);
        rhs.coefficients.insert(free, q(2, 1));
        let sol = solve_affine_system(&[row(&[(1, q(2, 1))], rhs)], &[IndexId(1)]).unwrap();
        assert_eq!(sol.abs_det, q(2, 1));
        let n2 = &sol.solutions[&IndexId(1)];
        assert_eq!(n2.coefficient(free), q(1, 1));
        assert_eq!(n2.constant, -0.5);
    }

    #[test]
    fn singular_system_is_reported() {
        let rows = vec![
            row(&[(0, q(1, 1)), (1, q(2, 1))], AffineIndexMap::constant(1.0)),
            row(&[(0, q(2, 1)), (1, q(4, 1))], AffineIndexMap::constant(3.0)),
        ];
        assert_eq!(
            solve_affine_system(&rows, &[IndexId(0), IndexId(1)]),
            Err(SolveError::SingularMatrix)
        );
    }

    #[test]
    fn non_square_is_rejected() {
        let rows = vec![row(&[(0, q(1, 1))], AffineIndexMap::constant(1.0))];
        assert!(matches!(
            solve_affine_system(&rows, &[IndexId(0), IndexId(1)]),
            Err(SolveError::NotSquare { .. })
        ));
    }

    #[test]
    fn f64_to_rational() {
        assert_eq!(rational_from_f64(4.5, 1_000_000), Some(q(9, 2)));
        assert_eq!(rational_from_f64(-0.5, 1_000_000), Some(q(-1, 2)));
        assert_eq!(rational_from_f64(0.0, 1_000_000), Some(q(0, 1)));
        assert_eq!(rational_from_f64(1.0 / 3.0, 1_000_000), Some(q(1, 3)));
        assert_eq!(rational_from_f64(std::f64::consts::PI, 1000), None);
    }

    #[test]
    fn affine_display() {
        let mut m = AffineIndexMap::constant(-1.5);
        m.coefficients.insert(IndexId(1), q(-1, 2));
        assert_eq!(m.to_string(), "-1/2*n2 - 1.5");
    }
}
