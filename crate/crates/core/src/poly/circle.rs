//! The circle coordinate ring ℝ[C] = ℝ[x1, x2]/(x1² + x2² − 1).
//!
//! Elements are kept in the canonical form `p(x1) + x2·q(x1)`. On the real
//! circle, `x1 = cos θ` and `x2 = sin θ`, so an element is a trigonometric
//! polynomial; the Laurent form in `z = e^{iθ}` backs root finding.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::LinearSolve;
use crate::scalar::{Rational, Scalar};

use super::univariate::{forward_owned, UnivariatePoly};

/// Canonical element `even(x1) + x2·odd(x1)` of ℝ[C].
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePoly<T: Scalar> {
    even: UnivariatePoly<T>,
    odd: UnivariatePoly<T>,
}

/// A real point of the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CirclePoint {
    /// Angle in `[0, 2π)`.
    pub angle: f64,
    /// Exact coordinates `(ξ1, ξ2)` with `ξ1² + ξ2² = 1`, when known.
    pub exact: Option<(Rational, Rational)>,
}

impl CirclePoint {
    pub fn from_angle(angle: f64) -> Self {
        Self {
            angle: angle.rem_euclid(2.0 * PI),
            exact: None,
        }
    }

    /// Exact point; `None` unless the coordinates satisfy the circle equation.
    pub fn from_exact(x1: Rational, x2: Rational) -> Option<Self> {
        if &x1 * &x1 + &x2 * &x2 != Rational::one() {
            return None;
        }
        let angle = x2.to_f64().atan2(x1.to_f64());
        Some(Self {
            angle: angle.rem_euclid(2.0 * PI),
            exact: Some((x1, x2)),
        })
    }

    pub fn x1(&self) -> f64 {
        self.exact.as_ref().map_or(self.angle.cos(), |e| e.0.to_f64())
    }

    pub fn x2(&self) -> f64 {
        self.exact.as_ref().map_or(self.angle.sin(), |e| e.1.to_f64())
    }

    /// Angular distance on the circle.
    pub fn distance(&self, other: &CirclePoint) -> f64 {
        let d = (self.angle - other.angle).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    }
}

/// `T_k` for `k = 0..=n`, in the power basis.
fn chebyshev_t<T: Scalar>(n: usize) -> Vec<UnivariatePoly<T>> {
    let mut out = vec![UnivariatePoly::one(), UnivariatePoly::x()];
    let two_x = UnivariatePoly::monomial(T::from_i64(2), 1);
    while out.len() <= n {
        let k = out.len();
        let next = &(&two_x * &out[k - 1]) - &out[k - 2];
        out.push(next);
    }
    out.truncate(n + 1);
    out
}

pub(crate) fn chebyshev_t_f64(n: usize) -> Vec<UnivariatePoly<f64>> {
    chebyshev_t(n)
}

/// `U_k` for `k = 0..=n`, in the power basis.
fn chebyshev_u<T: Scalar>(n: usize) -> Vec<UnivariatePoly<T>> {
    let two_x = UnivariatePoly::monomial(T::from_i64(2), 1);
    let mut out = vec![UnivariatePoly::one(), two_x.clone()];
    while out.len() <= n {
        let k = out.len();
        let next = &(&two_x * &out[k - 1]) - &out[k - 2];
        out.push(next);
    }
    out.truncate(n + 1);
    out
}

/// Expresses `p` in the basis `basis[k]` (each of degree `k`).
fn to_basis<T: Scalar>(p: &UnivariatePoly<T>, basis: &[UnivariatePoly<T>]) -> Vec<T> {
    let n = match p.degree() {
        None => return Vec::new(),
        Some(n) => n,
    };
    let mut rest = p.clone();
    let mut out = vec![T::zero(); n + 1];
    for k in (0..=n).rev() {
        let c = rest.coeff(k) / basis[k].leading();
        if !c.is_zero() {
            rest = &rest - &basis[k].scale(&c);
        }
        out[k] = c;
    }
    out
}

impl<T: Scalar> CirclePoly<T> {
    pub fn new(even: UnivariatePoly<T>, odd: UnivariatePoly<T>) -> Self {
        Self { even, odd }
    }

    pub fn zero() -> Self {
        Self::new(UnivariatePoly::zero(), UnivariatePoly::zero())
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(UnivariatePoly::constant(c), UnivariatePoly::zero())
    }

    pub fn x1() -> Self {
        Self::new(UnivariatePoly::x(), UnivariatePoly::zero())
    }

    pub fn x2() -> Self {
        Self::new(UnivariatePoly::zero(), UnivariatePoly::one())
    }

    /// Reduces a raw bivariate polynomial, given as `((deg x1, deg x2), coeff)`
    /// terms, modulo `x2² = 1 − x1²`.
    pub fn reduce<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((usize, usize), T)>,
    {
        let one_minus_x1sq =
            UnivariatePoly::new(vec![T::one(), T::zero(), -T::one()]);
        let mut even = UnivariatePoly::zero();
        let mut odd = UnivariatePoly::zero();
        for ((a, b), c) in terms {
            let part = (&UnivariatePoly::monomial(c, a)) * &one_minus_x1sq.pow(b / 2);
            if b % 2 == 0 {
                even = &even + &part;
            } else {
                odd = &odd + &part;
            }
        }
        Self::new(even, odd)
    }

    pub fn even(&self) -> &UnivariatePoly<T> {
        &self.even
    }

    pub fn odd(&self) -> &UnivariatePoly<T> {
        &self.odd
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    /// Trigonometric degree `max(deg p, deg q + 1)`; zero for constants and
    /// for the zero polynomial.
    pub fn degree(&self) -> usize {
        let e = self.even.degree().unwrap_or(0);
        let o = self.odd.degree().map_or(0, |d| d + 1);
        e.max(o)
    }

    /// Constant value, if the polynomial is constant.
    pub fn as_constant(&self) -> Option<T> {
        if self.odd.is_zero() && self.even.degree().unwrap_or(0) == 0 {
            Some(self.even.coeff(0))
        } else {
            None
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.even.scale(s), self.odd.scale(s))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval_point(&self, x1: &T, x2: &T) -> T {
        self.even.eval(x1) + x2.clone() * self.odd.eval(x1)
    }

    pub fn eval_angle(&self, theta: f64) -> f64 {
        self.even.eval_f64(theta.cos()) + theta.sin() * self.odd.eval_f64(theta.cos())
    }

    pub fn eval(&self, pt: &CirclePoint) -> f64 {
        self.even.eval_f64(pt.x1()) + pt.x2() * self.odd.eval_f64(pt.x1())
    }

    /// Largest canonical coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.even.max_coeff().max(self.odd.max_coeff())
    }

    pub fn to_f64(&self) -> CirclePoly<f64> {
        CirclePoly::new(self.even.to_f64(), self.odd.to_f64())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U + Copy) -> CirclePoly<U> {
        CirclePoly::new(self.even.map(f), self.odd.map(f))
    }

    /// Fourier coefficients: `(cos[k], sin[k])` with
    /// `self(θ) = Σ cos[k]·cos kθ + Σ sin[k]·sin kθ` (`sin[0]` is zero).
    pub fn to_trig(&self) -> (Vec<T>, Vec<T>) {
        let n = self.degree();
        let t = chebyshev_t::<T>(n.max(1));
        let u = chebyshev_u::<T>(n.max(1));
        let mut cos = to_basis(&self.even, &t);
        cos.resize(n + 1, T::zero());
        let mut sin = vec![T::zero()];
        sin.extend(to_basis(&self.odd, &u));
        sin.resize(n + 1, T::zero());
        (cos, sin)
    }

    /// Inverse of [`to_trig`](Self::to_trig).
    pub fn from_trig(cos: &[T], sin: &[T]) -> Self {
        let n = cos.len().max(sin.len()).max(1);
        let t = chebyshev_t::<T>(n);
        let u = chebyshev_u::<T>(n);
        let mut even = UnivariatePoly::zero();
        let mut odd = UnivariatePoly::zero();
        for (k, c) in cos.iter().enumerate() {
            if !c.is_zero() {
                even = &even + &t[k].scale(c);
            }
        }
        for (k, s) in sin.iter().enumerate().skip(1) {
            if !s.is_zero() {
                odd = &odd + &u[k - 1].scale(s);
            }
        }
        Self::new(even, odd)
    }

    /// Canonical coefficient vector `[p0.., q0..]` padded to trig degree `n`.
    pub(crate) fn coeff_vector(&self, n: usize) -> Vec<T> {
        let mut v: Vec<T> = (0..=n).map(|k| self.even.coeff(k)).collect();
        v.extend((0..n).map(|k| self.odd.coeff(k)));
        v
    }

    pub(crate) fn from_coeff_vector(v: &[T], n: usize) -> Self {
        Self::new(
            UnivariatePoly::new(v[..=n].to_vec()),
            UnivariatePoly::new(v[n + 1..].to_vec()),
        )
    }
}

impl<T: LinearSolve> CirclePoly<T> {
    /// Exact division `self / d` in ℝ[C].
    ///
    /// The quotient is found by solving the linear coefficient-matching
    /// system in the canonical basis. Float inputs are accepted when the
    /// remainder is at most `tol·(1 + max coeff)`; exact inputs need a zero
    /// remainder.
    pub fn exact_divide(&self, d: &Self, tol: f64) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let na = self.degree();
        let nd = d.degree();
        if nd > na {
            return Err(Error::NotDivisible { remainder: self.max_coeff() });
        }
        let nq = na - nd;
        let unknowns = 2 * nq + 1;
        let mut cols: Vec<Vec<T>> = Vec::with_capacity(unknowns);
        for k in 0..=nq {
            let b = Self::new(UnivariatePoly::monomial(T::one(), k), UnivariatePoly::zero());
            cols.push((d * &b).coeff_vector(na));
        }
        for k in 0..nq {
            let b = Self::new(UnivariatePoly::zero(), UnivariatePoly::monomial(T::one(), k));
            cols.push((d * &b).coeff_vector(na));
        }
        let target = self.coeff_vector(na);
        let rows: Vec<Vec<T>> = (0..target.len())
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        let sol = T::least_squares(&rows, &target)
            .ok_or(Error::NotDivisible { remainder: f64::INFINITY })?;
        let q = Self::from_coeff_vector(&sol, nq);
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
}

impl CirclePoly<f64> {
    /// Laurent coefficients `c[k + n]` of `z^k`, `k = −n..=n`, with
    /// `x1 = (z + 1/z)/2` and `x2 = (z − 1/z)/(2i)`.
    pub fn to_laurent(&self) -> Vec<Complex64> {
        let n = self.degree();
        let (cos, sin) = self.to_trig();
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        c[n] = Complex64::new(cos[0], 0.0);
        for k in 1..=n {
            let ck = Complex64::new(cos[k] / 2.0, -sin[k] / 2.0);
            c[n + k] = ck;
            c[n - k] = ck.conj();
        }
        c
    }

    /// Real part of a Laurent polynomial `Σ c[k+n] z^k` as a circle polynomial.
    /// Imaginary residue (a non-Hermitian input) is discarded.
    pub fn from_laurent(c: &[Complex64]) -> Self {
        let n = (c.len() - 1) / 2;
        let mut cos = vec![0.0; n + 1];
        let mut sin = vec![0.0; n + 1];
        cos[0] = c[n].re;
        for k in 1..=n {
            // c_k z^k + c_{-k} z^{-k}
            let s = c[n + k] + c[n - k].conj();
            cos[k] = s.re;
            sin[k] = -s.im;
        }
        Self::from_trig(&cos, &sin)
    }

    /// Real trigonometric polynomial `Re H(e^{iθ})` for a polynomial `H`
    /// with complex coefficients `h[k]` of `z^k`.
    pub fn real_part_of(h: &[Complex64]) -> Self {
        let cos: Vec<f64> = h.iter().map(|c| c.re).collect();
        let sin: Vec<f64> = h.iter().map(|c| -c.im).collect();
        Self::from_trig(&cos, &sin)
    }

    /// Drops canonical coefficients below `tol·max`.
    pub fn trimmed(&self, tol: f64) -> Self {
        let m = self.max_coeff();
        let f = |p: &UnivariatePoly<f64>| {
            UnivariatePoly::new(p.coeffs().iter().map(|&c| if c.abs() <= tol * m { 0.0 } else { c }).collect())
        };
        Self::new(f(&self.even), f(&self.odd))
    }

    /// Values on `n` equally spaced angles `2πk/n`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.eval_angle(2.0 * PI * k as f64 / n as f64)).collect()
    }

    /// Minimum over `n` equally spaced angles, with the minimizing angle.
    pub fn grid_min(&self, n: usize) -> (f64, f64) {
        (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                (th, self.eval_angle(th))
            })
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }
}

impl<T: Scalar> Add for &CirclePoly<T> {
    type Output = CirclePoly<T>;
    fn add(self, rhs: Self) -> CirclePoly<T> {
        CirclePoly::new(&self.even + &rhs.even, &self.odd + &rhs.odd)
    }
}

impl<T: Scalar> Sub for &CirclePoly<T> {
    type Output = CirclePoly<T>;
    fn sub(self, rhs: Self) -> CirclePoly<T> {
        CirclePoly::new(&self.even - &rhs.even, &self.odd - &rhs.odd)
    }
}

impl<T: Scalar> Mul for &CirclePoly<T> {
    type Output = CirclePoly<T>;
    /// `(p1 + x2 q1)(p2 + x2 q2) = p1 p2 + (1 − x1²) q1 q2 + x2 (p1 q2 + p2 q1)`
    fn mul(self, rhs: Self) -> CirclePoly<T> {
        let one_minus_x1sq = UnivariatePoly::new(vec![T::one(), T::zero(), -T::one()]);
        let even = &(&self.even * &rhs.even) + &(&one_minus_x1sq * &(&self.odd * &rhs.odd));
        let odd = &(&self.even * &rhs.odd) + &(&rhs.even * &self.odd);
        CirclePoly::new(even, odd)
    }
}

impl<T: Scalar> Neg for &CirclePoly<T> {
    type Output = CirclePoly<T>;
    fn neg(self) -> CirclePoly<T> {
        CirclePoly::new(-&self.even, -&self.odd)
    }
}

forward_owned!(CirclePoly, Add add, Sub sub, Mul mul);

impl<T: Scalar> Zero for CirclePoly<T> {
    fn zero() -> Self {
        CirclePoly::zero()
    }
    fn is_zero(&self) -> bool {
        CirclePoly::is_zero(self)
    }
}
