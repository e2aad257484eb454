//! Truncated Taylor series of order 3 for exact low-order derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const ORDER: usize = 3;

/// `c[0] + c[1] h + c[2] h^2 + c[3] h^3`, the expansion of a function around
/// a point; the k-th derivative is `k! * c[k]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; ORDER + 1],
}

impl Jet {
    pub fn constant(x: f64) -> Self {
        Jet { c: [x, 0.0, 0.0, 0.0] }
    }

    /// The independent variable at `x`.
    pub fn variable(x: f64) -> Self {
        Jet { c: [x, 1.0, 0.0, 0.0] }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn derivative(&self, k: usize) -> f64 {
        const FACT: [f64; ORDER + 1] = [1.0, 1.0, 2.0, 6.0];
        self.c[k] * FACT[k]
    }

    /// `f(self)` given `f, f', f'', f'''` at the constant term.
    pub fn compose(self, d: [f64; ORDER + 1]) -> Self {
        let mut h = self;
        h.c[0] = 0.0;
        let h2 = h * h;
        let h3 = h2 * h;
        let mut out = Jet::constant(d[0]);
        for i in 1..=ORDER {
            out.c[i] = d[1] * h.c[i] + d[2] / 2.0 * h2.c[i] + d[3] / 6.0 * h3.c[i];
        }
        out
    }

    pub fn powf(self, alpha: f64) -> Self {
        let u = self.c[0];
        self.compose([
            u.powf(alpha),
            alpha * u.powf(alpha - 1.0),
            alpha * (alpha - 1.0) * u.powf(alpha - 2.0),
            alpha * (alpha - 1.0) * (alpha - 2.0) * u.powf(alpha - 3.0),
        ])
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn recip(self) -> Self {
        self.powf(-1.0)
    }

    pub fn ln(self) -> Self {
        let u = self.c[0];
        self.compose([u.ln(), 1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)])
    }

    pub fn atan(self) -> Self {
        let u = self.c[0];
        let s = 1.0 + u * u;
        self.compose([u.atan(), 1.0 / s, -2.0 * u / (s * s), (6.0 * u * u - 2.0) / (s * s * s)])
    }

    /// Inverse cotangent with range `(0, pi)`.
    pub fn acot(self) -> Self {
        Jet::constant(std::f64::consts::FRAC_PI_2) - self.atan()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, r: Jet) -> Jet {
        for i in 0..=ORDER {
            self.c[i] += r.c[i];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, r: Jet) -> Jet {
        self + (-r)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for c in &mut self.c {
            *c = -*c;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, r: Jet) -> Jet {
        let mut out = Jet::constant(0.0);
        for i in 0..=ORDER {
            for j in 0..=ORDER - i {
                out.c[i + j] += self.c[i] * r.c[j];
            }
        }
        out
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Jet {
    type Output = Jet;
    fn div(self, r: Jet) -> Jet {
        self * r.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, r: f64) -> Jet {
        self + Jet::constant(r)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, r: f64) -> Jet {
        self - Jet::constant(r)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, r: f64) -> Jet {
        for c in &mut self.c {
            *c *= r;
        }
        self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, r: Jet) -> Jet {
        r * self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, r: f64) -> Jet {
        self * (1.0 / r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-13 * b.abs().max(1.0)
    }

    #[test]
    fn polynomial_derivatives() {
        let x = Jet::variable(2.0);
        let p = x * x * x * 3.0 - x * x + 5.0;
        assert_eq!(p.value(), 25.0);
        assert_eq!(p.derivative(1), 32.0);
        assert_eq!(p.derivative(2), 34.0);
        assert_eq!(p.derivative(3), 18.0);
    }

    #[test]
    fn elementary_functions() {
        let x0 = 0.7;
        let x = Jet::variable(x0);
        let s = x.sqrt();
        assert!(close(s.derivative(3), 3.0 / 8.0 * x0.powf(-2.5)));
        let l = x.ln();
        assert!(close(l.derivative(3), 2.0 / x0.powi(3)));
        let a = x.atan();
        let d = 1.0 + x0 * x0;
        assert!(close(a.derivative(2), -2.0 * x0 / (d * d)));
        assert!(close(x.acot().value(), std::f64::consts::FRAC_PI_2 - x0.atan()));
        let r = (x * 2.0).recip();
        assert!(close(r.derivative(3), -6.0 / (2.0 * x0.powi(4))));
    }

    #[test]
    fn chain_rule_through_composition() {
        // d^3/dx^3 atan(sqrt(x)) at 0.5, from the closed form of the series
        // coefficients: f = atan(u), u = sqrt(x).
        let x0: f64 = 0.5;
        let f = Jet::variable(x0).sqrt().atan();
        // f' = 1/(2 sqrt(x) (1+x))
        let fp = 1.0 / (2.0 * x0.sqrt() * (1.0 + x0));
        assert!(close(f.derivative(1), fp));
        // f'' = -(1+3x) / (4 x^{3/2} (1+x)^2)
        let fpp = -(1.0 + 3.0 * x0) / (4.0 * x0.powf(1.5) * (1.0 + x0).powi(2));
        assert!(close(f.derivative(2), fpp));
    }
}
