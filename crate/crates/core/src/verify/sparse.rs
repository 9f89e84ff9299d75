//! The verifier's own polynomial arithmetic: sparse maps from exponents to
//! coefficients, reduced by `x2² = 1 − x1²` after every product. Nothing
//! here goes through the dense circle representation used by the solvers.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::cylinder::CylinderPoly;
use crate::poly::CirclePoly;
use crate::scalar::{Rational, Scalar};

/// Exponents `(x1, x2, y)` with `x2 ∈ {0, 1}` after reduction.
pub type Exp = (usize, usize, usize);

/// Coefficient arithmetic the verifier needs.
pub trait Coeff: Clone {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, o: &Self) -> Self;
}

impl Coeff for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// Closed interval with outward rounding on every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    /// Smallest float interval containing the rational.
    pub fn enclose(r: &Rational) -> Self {
        let v = r.to_f64();
        let exact = Rational::from_float(v).is_some_and(|q| &q == r);
        if exact {
            Self::point(v)
        } else {
            Self { lo: v.next_down(), hi: v.next_up() }
        }
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Rounding error of `a + b` (exact, by two-sum): `a + b = s + err`.
fn sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if sum_err(a, b, s) < 0.0 { s.next_down() } else { s }
}

fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if sum_err(a, b, s) > 0.0 { s.next_up() } else { s }
}

fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a.mul_add(b, -p) < 0.0 { p.next_down() } else { p }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if a.mul_add(b, -p) > 0.0 { p.next_up() } else { p }
}

impl Coeff for Interval {
    fn zero() -> Self {
        Self::point(0.0)
    }
    fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        Self { lo: add_down(self.lo, o.lo), hi: add_up(self.hi, o.hi) }
    }
    fn neg(&self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
    fn mul(&self, o: &Self) -> Self {
        let pairs = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let lo = pairs.iter().map(|&(a, b)| mul_down(a, b)).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|&(a, b)| mul_up(a, b)).fold(f64::NEG_INFINITY, f64::max);
        Self { lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sparse<C: Coeff> {
    pub terms: BTreeMap<Exp, C>,
}

impl<C: Coeff> Sparse<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        let mut s = Self::zero();
        s.add_term((0, 0, 0), c);
        s
    }

    pub fn var(e: Exp, one: C) -> Self {
        let mut s = Self::zero();
        s.add_term(e, one);
        s
    }

    /// Adds `c·x1^a x2^b y^l`, reducing `x2^b` first.
    pub fn add_term(&mut self, (a, b, l): Exp, c: C) {
        if c.is_zero() {
            return;
        }
        if b >= 2 {
            // x2^b = x2^(b−2)·(1 − x1²)
            self.add_term((a, b - 2, l), c.clone());
            self.add_term((a + 2, b - 2, l), c.neg());
            return;
        }
        let e = self.terms.entry((a, b, l)).or_insert_with(C::zero);
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&(a, b, l));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&e| e == (0, 0, 0))
    }

    pub fn constant_term(&self) -> C {
        self.terms.get(&(0, 0, 0)).cloned().unwrap_or_else(C::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &o.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(&e, c)| (e, c.neg())).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero();
        for (&e, c) in &self.terms {
            out.add_term(e, c.mul(s));
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a1, b1, l1), c1) in &self.terms {
            for (&(a2, b2, l2), c2) in &o.terms {
                out.add_term((a1 + a2, b1 + b2, l1 + l2), c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, k: u32, one: C) -> Self {
        let mut out = Self::constant(one);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn y_degree(&self) -> usize {
        self.terms.keys().map(|e| e.2).max().unwrap_or(0)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Sparse<D> {
        let mut out = Sparse::zero();
        for (&e, c) in &self.terms {
            out.add_term(e, f(c));
        }
        out
    }
}

impl Sparse<Rational> {
    pub fn from_cylinder<T: Scalar>(f: &CylinderPoly<T>) -> Self {
        let mut out = Self::zero();
        for (c, a, b, l) in f.terms() {
            out.add_term((a, b, l), to_rational(&c));
        }
        out
    }

    pub fn from_circle<T: Scalar>(f: &CirclePoly<T>) -> Self {
        Self::from_cylinder(&CylinderPoly::from_circle(f.clone()))
    }

    pub fn to_cylinder(&self) -> CylinderPoly<Rational> {
        let mut coeffs: Vec<CirclePoly<Rational>> = vec![CirclePoly::zero(); self.y_degree() + 1];
        for (&(a, b, l), c) in &self.terms {
            coeffs[l] = &coeffs[l] + &CirclePoly::reduce([((a, b), c.clone())]);
        }
        CylinderPoly::new(coeffs)
    }

    /// Largest coefficient magnitude, as a float.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.abs().to_f64()).fold(0.0, f64::max)
    }

    /// Coefficient of largest magnitude with its exponent.
    pub fn worst(&self) -> Option<(Exp, Rational)> {
        self.terms.iter().max_by(|a, b| a.1.abs().cmp(&b.1.abs())).map(|(&e, c)| (e, c.clone()))
    }
}

/// Exact rational value of a scalar: floats convert without rounding.
pub fn to_rational<T: Scalar>(c: &T) -> Rational {
    match (c as &dyn std::any::Any).downcast_ref::<Rational>() {
        Some(q) => q.clone(),
        None => Rational::from_float(c.to_f64()).unwrap_or_else(<Rational as Zero>::zero),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn products_reduce_x2_squared() {
        let x2 = Sparse::var((0, 1, 0), r(1));
        let sq = x2.mul(&x2);
        let mut want = Sparse::constant(r(1));
        want.add_term((2, 0, 0), r(-1));
        assert_eq!(sq, want);
    }

    #[test]
    fn interval_contains_exact_sum() {
        let a = Interval::point(0.1);
        let s = (0..10).fold(Interval::zero(), |acc, _| acc.add(&a));
        let exact = Rational::from_float(0.1).unwrap() * r(10);
        assert!(Rational::from_float(s.lo).unwrap() <= exact && exact <= Rational::from_float(s.hi).unwrap());
    }
}
