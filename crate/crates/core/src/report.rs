//! JSON rendering shared by engine, catalog and CLI reports.

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::Value;

/// Version of every JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 12 significant digits so printed reports are stable.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Complex number as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Cplx { re: z.re, im: z.im }
    }
}

impl From<Cplx> for Complex64 {
    fn from(z: Cplx) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    Cplx::from(*z).serialize(s)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round_sig(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes with every float rounded to 12 significant digits.
pub fn to_json_value<T: Serialize>(report: &T) -> Value {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    round_value(&mut v);
    v
}

pub fn to_json_pretty<T: Serialize>(report: &T) -> String {
    serde_json::to_string_pretty(&to_json_value(report)).expect("json values serialize")
}

pub fn to_json_line<T: Serialize>(report: &T) -> String {
    serde_json::to_string(&to_json_value(report)).expect("json values serialize")
}

/// Relative gap `|u - v| / max(|u|, |v|)`, zero when both vanish.
pub fn relative_gap(u: Complex64, v: Complex64) -> f64 {
    let scale = u.norm().max(v.norm());
    if scale == 0.0 {
        0.0
    } else {
        (u - v).norm() / scale
    }
}

/// Twelve significant digits for text output, in exponent form outside
/// `[1e-4, 1e12)`.
pub fn fmt_real(x: f64) -> String {
    let r = round_sig(x);
    let a = r.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e12).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

pub fn fmt_complex(z: Complex64) -> String {
    let re = fmt_real(z.re);
    if round_sig(z.im) == 0.0 {
        re
    } else if z.im < 0.0 {
        format!("{re} - {}i", fmt_real(-z.im))
    } else {
        format!("{re} + {}i", fmt_real(z.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_numbers() {
        assert_eq!(fmt_real(2.48655878492e-16), "2.48655878492e-16");
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(3e12), "3e12");
        assert_eq!(fmt_complex(Complex64::new(1.0, -2e-5)), "1 - 2e-5i");
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(round_sig(1.2091995761561452), 1.20919957616);
        assert_eq!(round_sig(-0.000123456789012345), -0.000123456789012);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(1.5), 1.5);
    }

    #[test]
    fn nested_rounding() {
        #[derive(Serialize)]
        struct R {
            x: f64,
            n: u32,
            v: Vec<Cplx>,
        }
        let r = R {
            x: std::f64::consts::PI,
            n: 7,
            v: vec![Complex64::new(1.0 / 3.0, -2.0).into()],
        };
        assert_eq!(
            to_json_line(&r),
            r#"{"x":3.14159265359,"n":7,"v":[{"re":0.333333333333,"im":-2.0}]}"#
        );
    }

    #[test]
    fn gaps_and_text() {
        assert_eq!(relative_gap(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), 0.0);
        assert!((relative_gap(Complex64::new(1.0, 0.0), Complex64::new(1.1, 0.0)) - 0.1 / 1.1).abs() < 1e-15);
        assert_eq!(fmt_complex(Complex64::new(0.5, -0.25)), "0.5 - 0.25i");
        assert_eq!(fmt_complex(Complex64::new(2.0, 0.0)), "2");
    }
}
