use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::LinearSolve;
use crate::poly::{forward_owned, format_terms, CirclePoint, CirclePoly, UnivariatePoly};
use crate::scalar::Scalar;

/// Element `Σ coeffs[i]·yⁱ` of ℝ[C][y]. The last coefficient is nonzero
/// unless the polynomial is zero (empty `coeffs`).
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderPoly<T: Scalar> {
    coeffs: Vec<CirclePoly<T>>,
}

impl<T: Scalar> CylinderPoly<T> {
    pub fn new(mut coeffs: Vec<CirclePoly<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_circle(CirclePoly::one())
    }

    pub fn constant(c: T) -> Self {
        Self::from_circle(CirclePoly::constant(c))
    }

    pub fn from_circle(c: CirclePoly<T>) -> Self {
        Self::new(vec![c])
    }

    /// The polynomial `y`.
    pub fn y() -> Self {
        Self::new(vec![CirclePoly::zero(), CirclePoly::one()])
    }

    /// `c·yᵏ`
    pub fn monomial(c: CirclePoly<T>, k: usize) -> Self {
        let mut v = vec![CirclePoly::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// Embeds a univariate polynomial in `y`.
    pub fn from_univariate(u: &UnivariatePoly<T>) -> Self {
        Self::new(u.coeffs().iter().map(|c| CirclePoly::constant(c.clone())).collect())
    }

    pub fn coeffs(&self) -> &[CirclePoly<T>] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> CirclePoly<T> {
        self.coeffs.get(i).cloned().unwrap_or_else(CirclePoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `deg_y`, `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> CirclePoly<T> {
        self.coeffs.last().cloned().unwrap_or_else(CirclePoly::zero)
    }

    /// Largest trigonometric degree of a coefficient.
    pub fn x_degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_coeff()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.scale(s)).collect())
    }

    pub fn scale_circle(&self, s: &CirclePoly<T>) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// `y ← b(x)·y`: coefficient `i` is multiplied by `bⁱ`.
    pub fn substitute_scaled_y(&self, b: &CirclePoly<T>) -> Self {
        let mut pw = CirclePoly::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c * &pw);
            pw = &pw * b;
        }
        Self::new(out)
    }

    /// `y ← c` for a constant `c`.
    pub fn substitute_y(&self, y: &T) -> CirclePoly<T> {
        let mut acc = CirclePoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(y) + c;
        }
        acc
    }

    pub fn eval_point(&self, x1: &T, x2: &T, y: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * y.clone() + c.eval_point(x1, x2);
        }
        acc
    }

    pub fn eval_angle(&self, theta: f64, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c.eval_angle(theta))
    }

    pub fn eval(&self, pt: &CirclePoint, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c.eval(pt))
    }

    /// Restriction to the line `{θ} × ℝ`.
    pub fn at_angle(&self, theta: f64) -> UnivariatePoly<f64> {
        UnivariatePoly::new(self.coeffs.iter().map(|c| c.eval_angle(theta)).collect())
    }

    pub fn to_f64(&self) -> CylinderPoly<f64> {
        CylinderPoly::new(self.coeffs.iter().map(|c| c.to_f64()).collect())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U + Copy) -> CylinderPoly<U> {
        CylinderPoly::new(self.coeffs.iter().map(|c| c.map(f)).collect())
    }

    /// Canonical terms `(coeff, deg x1, deg x2, deg y)` in descending order.
    pub fn terms(&self) -> Vec<(T, usize, usize, usize)> {
        let mut out = Vec::new();
        for (l, c) in self.coeffs.iter().enumerate().rev() {
            for (a, v) in c.odd().coeffs().iter().enumerate().rev() {
                out.push((v.clone(), a, 1, l));
            }
            for (a, v) in c.even().coeffs().iter().enumerate().rev() {
                out.push((v.clone(), a, 0, l));
            }
        }
        out
    }

    /// Coefficient vector over the canonical monomials with y-degree ≤ `dy`
    /// and x trig degree ≤ `nx`.
    pub(crate) fn coeff_vector(&self, dy: usize, nx: usize) -> Vec<T> {
        (0..=dy).flat_map(|l| self.coeff(l).coeff_vector(nx)).collect()
    }

    pub(crate) fn from_coeff_vector(v: &[T], dy: usize, nx: usize) -> Self {
        let w = 2 * nx + 1;
        Self::new((0..=dy).map(|l| CirclePoly::from_coeff_vector(&v[l * w..(l + 1) * w], nx)).collect())
    }
}

impl<T: LinearSolve> CylinderPoly<T> {
    /// Exact division in ℝ[C][y], by coefficient matching (x-degrees add
    /// under multiplication, so the quotient's degrees are known).
    pub fn exact_divide(&self, d: &Self, tol: f64) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let (df, dd) = (self.degree().unwrap(), d.degree().unwrap());
        let (nf, nd) = (self.x_degree(), d.x_degree());
        if dd > df || nd > nf {
            return Err(Error::NotDivisible { remainder: self.max_coeff() });
        }
        let (dq, nq) = (df - dd, nf - nd);
        let width = 2 * nq + 1;
        let mut cols = Vec::with_capacity((dq + 1) * width);
        for l in 0..=dq {
            for k in 0..width {
                let mut e = vec![T::zero(); width];
                e[k] = T::one();
                let basis = Self::monomial(CirclePoly::from_coeff_vector(&e, nq), l);
                cols.push((d * &basis).coeff_vector(df, nf));
            }
        }
        let target = self.coeff_vector(df, nf);
        let rows: Vec<Vec<T>> = (0..target.len())
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        let sol = T::least_squares(&rows, &target).ok_or(Error::NotDivisible { remainder: f64::INFINITY })?;
        let q = Self::from_coeff_vector(&sol, dq, nq);
        let rem = (self - &(d * &q)).max_coeff();
        let ok = match T::MODE {
            crate::scalar::ScalarMode::Exact => rem == 0.0,
            crate::scalar::ScalarMode::Float => rem <= tol * (1.0 + self.max_coeff()),
        };
        if ok {
            Ok(q)
        } else {
            Err(Error::NotDivisible { remainder: rem })
        }
    }

    /// Coefficientwise exact division by an element of ℝ[C].
    pub fn divide_circle(&self, d: &CirclePoly<T>, tol: f64) -> Result<Self> {
        let scale = self.max_coeff();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                // tolerance relative to the whole polynomial, not each coefficient
                let t = tol * (1.0 + scale) / (1.0 + c.max_coeff());
                c.exact_divide(d, t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

impl CylinderPoly<f64> {
    /// Minimum of `f(θ, y)` on an `n_angles × n_y` grid with `y = tan(πu − π/2)`.
    pub fn grid_min(&self, n_angles: usize, n_y: usize) -> (f64, f64, f64) {
        let mut best = (0.0, 0.0, f64::INFINITY);
        for k in 0..n_angles {
            let th = 2.0 * PI * k as f64 / n_angles as f64;
            let u = self.at_angle(th);
            for j in 0..n_y {
                let y = (PI * (j as f64 + 0.5) / n_y as f64 - PI / 2.0).tan();
                let v = u.eval_f64(y);
                if v < best.2 {
                    best = (th, y, v);
                }
            }
        }
        best
    }

    /// Drops canonical coefficients below `tol·max` over the whole polynomial.
    pub fn trimmed(&self, tol: f64) -> Self {
        let m = self.max_coeff();
        Self::new(
            self.coeffs
                .iter()
                .map(|c| {
                    let cut = |p: &UnivariatePoly<f64>| {
                        UnivariatePoly::new(p.coeffs().iter().map(|&v| if v.abs() <= tol * m { 0.0 } else { v }).collect())
                    };
                    CirclePoly::new(cut(c.even()), cut(c.odd()))
                })
                .collect(),
        )
    }
}

impl<T: Scalar> fmt::Display for CylinderPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_terms(self.terms()))
    }
}

impl<T: Scalar> fmt::Display for CirclePoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&CylinderPoly::from_circle(self.clone()), f)
    }
}

impl<T: Scalar> Add for &CylinderPoly<T> {
    type Output = CylinderPoly<T>;
    fn add(self, rhs: Self) -> CylinderPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CylinderPoly::new((0..n).map(|i| &self.coeff(i) + &rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for &CylinderPoly<T> {
    type Output = CylinderPoly<T>;
    fn sub(self, rhs: Self) -> CylinderPoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CylinderPoly::new((0..n).map(|i| &self.coeff(i) - &rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Mul for &CylinderPoly<T> {
    type Output = CylinderPoly<T>;
    fn mul(self, rhs: Self) -> CylinderPoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return CylinderPoly::zero();
        }
        let mut v = vec![CirclePoly::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = &v[i + j] + &(a * b);
            }
        }
        CylinderPoly::new(v)
    }
}

impl<T: Scalar> Neg for &CylinderPoly<T> {
    type Output = CylinderPoly<T>;
    fn neg(self) -> CylinderPoly<T> {
        CylinderPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

forward_owned!(CylinderPoly, Add add, Sub sub, Mul mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type Q = CylinderPoly<Rational>;

    fn cx1() -> CirclePoly<Rational> {
        CirclePoly::x1()
    }

    #[test]
    fn product_reduces_on_circle() {
        // (y + x2)(y - x2) = y^2 - (1 - x1^2)
        let x2 = Q::from_circle(CirclePoly::x2());
        let p = &(&Q::y() + &x2) * &(&Q::y() - &x2);
        let expect = &(&Q::y() * &Q::y())
            - &Q::from_circle(&CirclePoly::one() - &(&cx1() * &cx1()));
        assert_eq!(p, expect);
    }

    #[test]
    fn additive_identity_and_eval() {
        let f = &(&Q::y() * &Q::y()) + &Q::one();
        assert_eq!(&f + &Q::zero(), f);
        let v = f.to_f64().eval_angle(1.234, 0.0);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn exact_cylinder_division() {
        let g = &Q::y().scale_circle(&(&CirclePoly::one() - &cx1())) - &Q::from_circle(CirclePoly::x2());
        let h = &(&Q::y() * &Q::y()) + &Q::one();
        let f = &(&g * &g) * &h;
        assert_eq!(f.exact_divide(&(&g * &g), 0.0).unwrap(), h);
        assert!(h.exact_divide(&g, 0.0).is_err());
    }

    #[test]
    fn display_round_form() {
        let f = &(&Q::y() * &Q::y()) - &Q::from_circle(cx1());
        assert_eq!(f.to_string(), "y^2 - x1");
    }
}
