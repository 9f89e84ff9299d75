//! Polynomial text: variables `x1, x2, y`, operators `+ - * / ^`, parentheses,
//! integer, `p/q` and decimal literals. Whitespace is ignored. Division is
//! only by constants, so `3/7*y` reads as a rational coefficient.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::cylinder::CylinderPoly;
use crate::error::{Error, Result};
use crate::scalar::Rational;

use super::sparse::Sparse;

const MAX_EXPONENT: u32 = 4096;

pub fn parse_poly(text: &str) -> Result<CylinderPoly<Rational>> {
    Ok(parse_sparse(text)?.to_cylinder())
}

/// Parses into the verifier's sparse form.
pub fn parse_sparse(text: &str) -> Result<Sparse<Rational>> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(p.error("empty input"));
    }
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected character"));
    }
    Ok(v)
}

/// Parses a constant expression such as `3/7` or `-0.25`.
pub fn parse_constant(text: &str) -> Result<Rational> {
    let s = parse_sparse(text)?;
    if !s.is_constant() {
        return Err(Error::Syntax { pos: 0, msg: "expected a constant".into() });
    }
    Ok(s.constant_term())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Sparse<Rational>> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Sparse<Rational>> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            if c == b'*' {
                acc = acc.mul(&rhs);
            } else {
                if !rhs.is_constant() || rhs.is_zero() {
                    return Err(Error::Syntax { pos: at, msg: "division by a non-constant or zero".into() });
                }
                acc = acc.scale(&(Rational::one() / rhs.constant_term()));
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Sparse<Rational>> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Sparse<Rational>> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a non-negative integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let k: u32 = digits
            .parse()
            .ok()
            .filter(|&k| k <= MAX_EXPONENT)
            .ok_or_else(|| Error::Syntax { pos: start, msg: format!("exponent above {MAX_EXPONENT}") })?;
        Ok(base.pow(k, Rational::one()))
    }

    fn atom(&mut self) -> Result<Sparse<Rational>> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Sparse::constant(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let e = match name {
                    "x1" => (1, 0, 0),
                    "x2" => (0, 1, 0),
                    "y" => (0, 0, 1),
                    _ => return Err(Error::UnknownVariable { name: name.into(), pos: start }),
                };
                Ok(Sparse::var(e, Rational::one()))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    /// Decimal literal with optional fraction and exponent, read exactly.
    fn number(&mut self) -> Result<Rational> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            std::str::from_utf8(&p.src[s..p.pos]).expect("ascii").to_string()
        };
        let int = digits(self);
        let mut frac = String::new();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac = digits(self);
        }
        if int.is_empty() && frac.is_empty() {
            return Err(Error::Syntax { pos: start, msg: "malformed number".into() });
        }
        let mut exp: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let at = self.pos;
            self.pos += 1;
            let neg = match self.src.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let e = digits(self);
            let v: i64 = e.parse().map_err(|_| Error::Syntax { pos: at, msg: "malformed exponent".into() })?;
            if v > 4000 {
                return Err(Error::Syntax { pos: at, msg: "exponent out of range".into() });
            }
            exp = if neg { -v } else { v };
        }
        let mantissa: BigInt = format!("{int}{frac}").parse().unwrap_or_else(|_| BigInt::zero());
        let scale = exp - frac.len() as i64;
        let ten = BigInt::from(10);
        Ok(if scale >= 0 {
            Rational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            Rational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::CirclePoly;
    use crate::scalar::ratio;

    #[test]
    fn polynomial_with_circle_coefficients() {
        let f = parse_poly("y^2 + 1 - x1").unwrap();
        assert_eq!(f.coeff(0), &CirclePoly::one() - &CirclePoly::x1());
        assert!(f.coeff(1).is_zero());
        assert_eq!(f.coeff(2), CirclePoly::one());
    }

    #[test]
    fn power_of_a_binomial_is_reduced() {
        let f = parse_poly("(x2*y - 1)^2").unwrap();
        // (1 − x1²)y² − 2x2·y + 1
        let x1 = CirclePoly::<Rational>::x1();
        assert_eq!(f.coeff(2), &CirclePoly::one() - &(&x1 * &x1));
        assert_eq!(f.coeff(1), CirclePoly::x2().scale(&ratio(-2, 1)));
        assert_eq!(f.coeff(0), CirclePoly::one());
    }

    #[test]
    fn unknown_variable_is_reported_with_position() {
        match parse_poly("x3 + y") {
            Err(Error::UnknownVariable { name, pos }) => {
                assert_eq!(name, "x3");
                assert_eq!(pos, 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn literals_are_exact() {
        assert_eq!(parse_constant("3/7").unwrap(), ratio(3, 7));
        assert_eq!(parse_constant("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse_constant("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse_constant("-3/7*2").unwrap(), ratio(-6, 7));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert!(matches!(parse_poly("y^"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_poly("(y + 1"), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse_poly("y / x1"), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse_poly(""), Err(Error::Syntax { .. })));
    }
}
