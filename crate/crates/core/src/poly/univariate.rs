//! Dense univariate polynomials.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::scalar::{Rational, Scalar};

use super::roots;

/// Dense polynomial `Σ coeffs[i]·tⁱ`. The last stored coefficient is nonzero
/// unless the polynomial is zero, in which case `coeffs` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePoly<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> UnivariatePoly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    /// `c·tᵏ`
    pub fn monomial(c: T, k: usize) -> Self {
        let mut v = vec![T::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// The linear polynomial `t`.
    pub fn x() -> Self {
        Self::monomial(T::one(), 1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `tᵏ`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, t: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t.clone() + c.clone();
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.to_f64())
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_f64())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * T::from_i64(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplication by `tᵏ`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![T::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(v)
    }

    /// Largest coefficient magnitude, the norm `c(·)`.
    pub fn max_coeff(&self) -> f64 {
        crate::scalar::max_abs(&self.coeffs)
    }

    /// Euclidean division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.coeffs.len() - 1;
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![T::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].clone() / lead.clone();
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    r[k + j] = r[k + j].clone() - c.clone() * dj.clone();
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Self::new(q), Self::new(r))
    }

    pub fn to_f64(&self) -> UnivariatePoly<f64> {
        UnivariatePoly::new(self.coeffs.iter().map(|c| c.to_f64()).collect())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> UnivariatePoly<U> {
        UnivariatePoly::new(self.coeffs.iter().map(f).collect())
    }
}

impl UnivariatePoly<Rational> {
    pub fn monic(&self) -> Self {
        let l = self.leading();
        self.scale(&(Rational::from_i64(1) / l))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Squarefree factorization (Yun): returns `[s1, s2, ...]` with
    /// `self = lc·Π sᵢⁱ` and each `sᵢ` monic squarefree.
    pub fn squarefree_factors(&self) -> Vec<Self> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let fd = f.derivative();
        let a0 = f.gcd(&fd);
        let (mut b, _) = f.div_rem(&a0);
        let (c, _) = fd.div_rem(&a0);
        let mut d = &c - &b.derivative();
        loop {
            let a = b.gcd(&d);
            out.push(a.clone());
            let (nb, _) = b.div_rem(&a);
            b = nb;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            let (nc, _) = d.div_rem(&a);
            d = &nc - &b.derivative();
        }
        while out.last().is_some_and(|p| p.degree() == Some(0)) {
            out.pop();
        }
        out
    }
}

impl UnivariatePoly<f64> {
    /// All complex roots, with multiple roots resolved by clustering.
    pub fn roots(&self) -> Vec<roots::Cluster> {
        let c: Vec<Complex64> = self.coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        roots::clustered_roots(&c)
    }

    /// Real roots with multiplicities, sorted ascending.
    pub fn real_roots(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = self
            .roots()
            .into_iter()
            .filter(|c| c.root.im.abs() <= 1e-7 * (1.0 + c.root.re.abs()))
            .map(|c| (c.root.re, c.multiplicity))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Real parts of every root whose imaginary part is small relative to
    /// `loose`. Over-inclusive on purpose: callers use them as candidate
    /// critical points, where extra candidates are harmless.
    pub fn near_real_roots(&self, loose: f64) -> Vec<f64> {
        let c: Vec<Complex64> = self.coeffs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        roots::raw_roots(&c)
            .into_iter()
            .filter(|z| z.im.abs() <= loose * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect()
    }

    /// Exact minimum over ℝ: `None` when unbounded below.
    /// Returns the minimizer (`±∞` encoded as `None` in the first slot when the
    /// infimum is approached at infinity) and the value.
    pub fn global_min(&self) -> Option<(Option<f64>, f64)> {
        match self.degree() {
            None => return Some((Some(0.0), 0.0)),
            Some(0) => return Some((Some(0.0), self.coeffs[0])),
            Some(d) => {
                if d % 2 == 1 || self.leading() < 0.0 {
                    return None;
                }
            }
        }
        let mut best = (Some(0.0), self.eval_f64(0.0));
        for r in self.derivative().near_real_roots(1e-5) {
            let v = self.eval_f64(r);
            if v < best.1 {
                best = (Some(r), v);
            }
        }
        Some(best)
    }

    /// Trims coefficients below `tol·max|coeff|`.
    pub fn trimmed(&self, tol: f64) -> Self {
        let m = self.max_coeff();
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= tol * m { 0.0 } else { c })
                .collect(),
        )
    }

    /// Polynomial with the given roots and leading coefficient (real roots
    /// only; complex roots must come in conjugate pairs).
    pub fn from_complex_roots(lead: f64, roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(lead, 0.0)];
        for r in roots {
            c = roots::mul_linear(&c, *r);
        }
        Self::new(c.into_iter().map(|z| z.re).collect())
    }
}

impl<T: Scalar> Add for &UnivariatePoly<T> {
    type Output = UnivariatePoly<T>;
    fn add(self, rhs: Self) -> UnivariatePoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UnivariatePoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for &UnivariatePoly<T> {
    type Output = UnivariatePoly<T>;
    fn sub(self, rhs: Self) -> UnivariatePoly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UnivariatePoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Mul for &UnivariatePoly<T> {
    type Output = UnivariatePoly<T>;
    fn mul(self, rhs: Self) -> UnivariatePoly<T> {
        if self.is_zero() || rhs.is_zero() {
            return UnivariatePoly::zero();
        }
        let mut v = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].clone() + a.clone() * b.clone();
            }
        }
        UnivariatePoly::new(v)
    }
}

impl<T: Scalar> Neg for &UnivariatePoly<T> {
    type Output = UnivariatePoly<T>;
    fn neg(self) -> UnivariatePoly<T> {
        UnivariatePoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($ty:ident, $($tr:ident $m:ident),*) => {$(
        impl<T: Scalar> $tr for $ty<T> {
            type Output = $ty<T>;
            fn $m(self, rhs: Self) -> $ty<T> {
                (&self).$m(&rhs)
            }
        }
    )*};
}
pub(crate) use forward_owned;

forward_owned!(UnivariatePoly, Add add, Sub sub, Mul mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn q(v: &[i64]) -> UnivariatePoly<Rational> {
        UnivariatePoly::new(v.iter().map(|&c| Rational::from_i64(c)).collect())
    }

    #[test]
    fn division_identity() {
        let a = q(&[1, 0, 0, 1]);
        let d = q(&[1, 1]);
        let (qq, r) = a.div_rem(&d);
        assert_eq!(qq, q(&[1, -1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn squarefree_of_repeated_factor() {
        // (y-1)^2 (y+2)
        let f = &q(&[1, -2, 1]) * &q(&[2, 1]);
        let s = f.scale(&ratio(3, 1)).squarefree_factors();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], q(&[2, 1]));
        assert_eq!(s[1], q(&[-1, 1]));
    }

    #[test]
    fn global_min_of_quadratic() {
        let f = UnivariatePoly::new(vec![3.0, 1.0, 3.0]);
        let (arg, v) = f.global_min().unwrap();
        assert!((arg.unwrap() + 1.0 / 6.0).abs() < 1e-12);
        assert!((v - 35.0 / 12.0).abs() < 1e-12);
        assert!(UnivariatePoly::new(vec![0.0, 1.0]).global_min().is_none());
    }

    #[test]
    fn real_roots_with_multiplicity() {
        let f = UnivariatePoly::from_complex_roots(
            2.0,
            &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-3.0, 0.0)],
        );
        let r = f.real_roots();
        assert_eq!(r.len(), 2);
        assert!((r[0].0 + 3.0).abs() < 1e-10 && r[0].1 == 1);
        assert!((r[1].0 - 1.0).abs() < 1e-10 && r[1].1 == 2);
    }
}
