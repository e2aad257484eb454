//! Recursive-descent parser for the integrand mini-language.
//!
//! ```text
//! integrand := term ("*" term)*
//! term      := "x" ["^" exponent] | "(" poly ")" "^" exponent | "exp" "(" poly ")"
//! poly      := ["+"|"-"] mono (("+"|"-") mono)*
//! mono      := factor (("*"|"/") factor)*      at most one x-power among the factors
//! factor    := number | name | "i" | "(" expr ")" | "x" ["^" exponent]
//! exponent  := ["+"|"-"] (integer "/" integer | number | name | "(" expr ")")
//! expr      := ["+"|"-"] product (("+"|"-") product)*
//! ```

use num_complex::Complex64;

use super::{ExpFactor, Expr, Integrand, IntegrandError, Monomial, PowerFactor};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Int(n) => format!("integer {n}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, expected: &[&str], found: &Tok) -> IntegrandError {
    IntegrandError::Syntax {
        offset,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        found: found.describe(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, IntegrandError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                let mut is_int = true;
                if j < bytes.len() && bytes[j] == b'.' {
                    is_int = false;
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        is_int = false;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let s = &text[i..j];
                i = j;
                let parsed = if is_int {
                    s.parse::<u64>().map(Tok::Int).ok()
                } else {
                    None
                };
                match parsed {
                    Some(t) => t,
                    None => Tok::Num(s.parse::<f64>().map_err(|_| IntegrandError::Syntax {
                        offset: start,
                        expected: vec!["number".into()],
                        found: format!("'{s}'"),
                    })?),
                }
                .tap_push(&mut out, start);
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let s = text[i..j].to_string();
                i = j;
                out.push((Tok::Ident(s), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(IntegrandError::Syntax {
                    offset: start,
                    expected: vec!["operator, number, name or parenthesis".into()],
                    found: format!("'{ch}'"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

trait TapPush {
    fn tap_push(self, out: &mut Vec<(Tok, usize)>, at: usize);
}

impl TapPush for Tok {
    fn tap_push(self, out: &mut Vec<(Tok, usize)>, at: usize) {
        out.push((self, at));
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

enum Factor {
    Coef(Expr),
    XPower(Expr),
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, name: &str) -> Result<(), IntegrandError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), &[name], self.peek()))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn integrand(&mut self) -> Result<Integrand, IntegrandError> {
        let mut out = Integrand::empty();
        self.term(&mut out)?;
        while *self.peek() == Tok::Star {
            self.bump();
            self.term(&mut out)?;
        }
        if *self.peek() != Tok::End {
            return Err(syntax(self.offset(), &["'*'", "end of input"], self.peek()));
        }
        out.check_distinct_exponents()?;
        Ok(out)
    }

    fn term(&mut self, out: &mut Integrand) -> Result<(), IntegrandError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "x" => {
                self.bump();
                let e = if *self.peek() == Tok::Caret {
                    self.bump();
                    self.exponent()?
                } else {
                    Expr::real(1.0)
                };
                let prev = std::mem::replace(&mut out.prefactor_exponent, Expr::real(0.0));
                out.prefactor_exponent = if prev == Expr::real(0.0) { e } else { Expr::sum(prev, e) };
                Ok(())
            }
            Tok::Ident(s) if s == "exp" => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let poly = self.poly()?;
                self.expect(Tok::RParen, "')'")?;
                out.exp_factors.extend(poly.into_iter().map(|argument| ExpFactor { argument }));
                Ok(())
            }
            Tok::LParen => {
                self.bump();
                let base = self.poly()?;
                self.expect(Tok::RParen, "')'")?;
                self.expect(Tok::Caret, "'^'")?;
                let exponent = self.exponent()?;
                out.power_factors.push(PowerFactor { base, exponent });
                Ok(())
            }
            other => Err(syntax(self.offset(), &["'x'", "'exp'", "'('"], &other)),
        }
    }

    fn poly(&mut self) -> Result<Vec<Monomial>, IntegrandError> {
        let mut monos = Vec::new();
        let mut negate = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        loop {
            let m = self.mono()?;
            monos.push(if negate {
                Monomial {
                    coefficient: Expr::negated(m.coefficient),
                    exponent: m.exponent,
                }
            } else {
                m
            });
            match self.peek() {
                Tok::Plus => negate = false,
                Tok::Minus => negate = true,
                _ => break,
            }
            self.bump();
        }
        Ok(monos)
    }

    fn mono(&mut self) -> Result<Monomial, IntegrandError> {
        let mut coef: Option<Expr> = None;
        let mut xpow: Option<Expr> = None;
        let mut divide = false;
        loop {
            let at = self.offset();
            match self.factor()? {
                Factor::XPower(e) => {
                    if divide || xpow.is_some() {
                        return Err(IntegrandError::Syntax {
                            offset: at,
                            expected: vec!["coefficient factor".into()],
                            found: "'x'".into(),
                        });
                    }
                    xpow = Some(e);
                }
                Factor::Coef(f) => {
                    coef = Some(match (coef, divide) {
                        (None, false) => f,
                        (None, true) => Expr::quotient(Expr::real(1.0), f),
                        (Some(c), false) => Expr::product(c, f),
                        (Some(c), true) => Expr::quotient(c, f),
                    });
                }
            }
            match self.peek() {
                Tok::Star => divide = false,
                Tok::Slash => divide = true,
                _ => break,
            }
            self.bump();
        }
        Ok(Monomial {
            coefficient: coef.unwrap_or_else(|| Expr::real(1.0)),
            exponent: xpow.unwrap_or_else(|| Expr::real(0.0)),
        })
    }

    fn factor(&mut self) -> Result<Factor, IntegrandError> {
        if self.is_ident("x") {
            self.bump();
            if *self.peek() == Tok::Caret {
                self.bump();
                return Ok(Factor::XPower(self.exponent()?));
            }
            return Ok(Factor::XPower(Expr::real(1.0)));
        }
        Ok(Factor::Coef(self.atom()?))
    }

    fn exponent(&mut self) -> Result<Expr, IntegrandError> {
        let negate = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let e = match self.peek().clone() {
            Tok::Int(p) => {
                self.bump();
                if *self.peek() == Tok::Slash && matches!(self.toks[self.pos + 1].0, Tok::Int(_)) {
                    self.bump();
                    let Tok::Int(q) = self.bump() else { unreachable!() };
                    if q == 0 {
                        return Err(IntegrandError::NonFinite {
                            what: format!("exponent {p}/0"),
                        });
                    }
                    Expr::real(p as f64 / q as f64)
                } else {
                    Expr::real(p as f64)
                }
            }
            Tok::Num(_) | Tok::Ident(_) | Tok::LParen => self.atom()?,
            other => return Err(syntax(self.offset(), &["number", "name", "'('"], &other)),
        };
        Ok(if negate { Expr::negated(e) } else { e })
    }

    fn expr(&mut self) -> Result<Expr, IntegrandError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::sum(lhs, self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::difference(lhs, self.product()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, IntegrandError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::product(lhs, self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::quotient(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, IntegrandError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::negated(self.unary()?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr, IntegrandError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::real(v)),
            Tok::Int(n) => Ok(Expr::real(n as f64)),
            Tok::Ident(s) if s == "i" => Ok(Expr::imaginary_unit()),
            Tok::Ident(s) if s == "x" || s == "exp" => Err(IntegrandError::Syntax {
                offset: at,
                expected: vec!["number".into(), "parameter name".into(), "'('".into()],
                found: format!("'{s}'"),
            }),
            Tok::Ident(s) => Ok(Expr::Param(s)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            other => Err(syntax(at, &["number", "parameter name", "'i'", "'('"], &other)),
        }
    }
}

/// Parses integrand text into an unbound [`Integrand`].
pub fn parse_integrand(text: &str) -> Result<Integrand, IntegrandError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.integrand()
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<Integrand>();
    check::<Complex64>();
}
