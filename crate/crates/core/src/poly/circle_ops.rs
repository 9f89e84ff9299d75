//! Zero analysis, tangent factorization and sums of squares on the circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::One;

use crate::error::{Error, Result, Witness};
use crate::scalar::{approximate_rational, Rational, Scalar};

use super::circle::{CirclePoint, CirclePoly};
use super::roots::{clustered_roots, Cluster};

/// `|ln |r|| ≤` this classifies a Laurent root as lying on the unit circle.
pub const ON_CIRCLE_TOL: f64 = 1e-9;

/// Grid used for sampled sign checks on the circle.
pub const SIGN_GRID: usize = 4096;

fn laurent_clusters(a: &CirclePoly<f64>) -> Vec<Cluster> {
    let m = a.max_coeff();
    let scaled = a.scale(&(1.0 / m));
    clustered_roots(&scaled.to_laurent())
}

/// Real zeros of `a` on the circle with their vanishing orders.
pub fn circle_zeros(a: &CirclePoly<f64>) -> Result<Vec<(CirclePoint, usize)>> {
    if a.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if a.degree() == 0 {
        return Ok(Vec::new());
    }
    let mut out: Vec<(CirclePoint, usize)> = laurent_clusters(a)
        .into_iter()
        .filter(|c| c.root.norm().ln().abs() <= ON_CIRCLE_TOL)
        .map(|c| (CirclePoint::from_angle(c.root.arg()), c.multiplicity))
        .collect();
    out.sort_by(|x, y| x.0.angle.total_cmp(&y.0.angle));
    Ok(out)
}

/// Tangent polynomial `1 − ξ1·x1 − ξ2·x2` at a point of the circle.
pub fn tangent_poly(xi: &CirclePoint) -> CirclePoly<f64> {
    &(&CirclePoly::one() - &CirclePoly::x1().scale(&xi.x1())) - &CirclePoly::x2().scale(&xi.x2())
}

/// Exact tangent polynomial at a rational point.
pub fn tangent_poly_exact(x1: &Rational, x2: &Rational) -> CirclePoly<Rational> {
    &(&CirclePoly::one() - &CirclePoly::x1().scale(x1)) - &CirclePoly::x2().scale(x2)
}

/// Sampled nonnegativity check; returns a witness angle when the minimum over
/// the grid is below `−tol·(1 + max coeff)`.
pub fn negativity_witness(a: &CirclePoly<f64>, tol: f64) -> Option<Witness> {
    let (theta, v) = a.grid_min(SIGN_GRID);
    if v < -tol * (1.0 + a.max_coeff()) {
        Some(Witness { angle: theta, y: 0.0, value: v })
    } else {
        None
    }
}

/// Splits a nonnegative `a` as `p1·p2` where `p1` is a product of tangent
/// powers (only real zeros) and `p2 > 0` on the circle.
pub fn factor_real_zero_part(a: &CirclePoly<f64>) -> Result<(CirclePoly<f64>, CirclePoly<f64>)> {
    if a.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if let Some(w) = negativity_witness(a, 1e-12) {
        return Err(Error::Negative(w));
    }
    let zeros = circle_zeros(a)?;
    let mut p1 = CirclePoly::one();
    for (pt, order) in &zeros {
        if order % 2 == 1 {
            return Err(Error::OddOrder { angle: pt.angle, order: *order });
        }
        p1 = &p1 * &tangent_poly(pt).pow(order / 2);
    }
    let p2 = a.exact_divide(&p1, 1e-8)?;
    let (_, min) = p2.grid_min(SIGN_GRID);
    if min <= 0.0 {
        return Err(Error::SurrogateLimitation(format!(
            "cofactor not strictly positive (grid min {min:.3e})"
        )));
    }
    Ok((p1, p2))
}

/// Rational point of the circle within `1e−9` of `angle`, via `t = tan(θ/2)`.
pub fn snap_rational_point(angle: f64, max_den: u64) -> Option<(Rational, Rational)> {
    snap_rational_point_within(angle, max_den, 1e-9)
}

/// Rational point within angular distance `tol` of `angle`.
pub fn snap_rational_point_within(angle: f64, max_den: u64, tol: f64) -> Option<(Rational, Rational)> {
    let a = angle.rem_euclid(2.0 * PI);
    if (a - PI).abs() < 1e-12 {
        return Some((-Rational::one(), Rational::from_i64(0)));
    }
    let t = approximate_rational((a / 2.0).tan(), max_den);
    let one = Rational::one();
    let den = &one + &t * &t;
    let x1 = (&one - &t * &t) / &den;
    let x2 = (Rational::from_i64(2) * &t) / &den;
    let p = CirclePoint::from_exact(x1.clone(), x2.clone())?;
    if p.distance(&CirclePoint::from_angle(a)) > tol {
        return None;
    }
    Some((x1, x2))
}

/// Exact variant of [`factor_real_zero_part`]: succeeds only when every real
/// zero sits at a rational point and the divisions are exact.
pub fn factor_real_zero_part_exact(
    a: &CirclePoly<Rational>,
) -> Result<(CirclePoly<Rational>, CirclePoly<Rational>)> {
    let af = a.to_f64();
    if let Some(w) = negativity_witness(&af, 1e-12) {
        return Err(Error::Negative(w));
    }
    let mut p1 = CirclePoly::one();
    let mut rest = a.clone();
    for (pt, order) in circle_zeros(&af)? {
        if order % 2 == 1 {
            return Err(Error::OddOrder { angle: pt.angle, order });
        }
        let (x1, x2) = snap_rational_point(pt.angle, 1 << 20).ok_or_else(|| {
            Error::SurrogateLimitation(format!("zero at angle {} is not a rational point", pt.angle))
        })?;
        let t = tangent_poly_exact(&x1, &x2);
        for _ in 0..order / 2 {
            rest = rest.exact_divide(&t, 0.0)?;
            p1 = &p1 * &t;
        }
    }
    Ok((p1, rest))
}

/// Sum of at most two squares equal to a nonnegative `a`, by spectral
/// factorization of its Laurent form.
pub fn circle_sos(a: &CirclePoly<f64>) -> Result<Vec<CirclePoly<f64>>> {
    if a.is_zero() {
        return Ok(Vec::new());
    }
    let scale = a.max_coeff();
    if let Some(w) = negativity_witness(a, 1e-12) {
        return Err(Error::Negative(w));
    }
    if let Some(c) = a.as_constant() {
        return Ok(vec![CirclePoly::constant(c.sqrt())]);
    }
    let n = a.degree();
    let mut factors: Vec<Complex64> = Vec::with_capacity(n);
    let mut worst = 0.0f64;
    for c in laurent_clusters(a) {
        let lr = c.root.norm().ln();
        if lr.abs() <= ON_CIRCLE_TOL {
            if c.multiplicity % 2 == 1 {
                return Err(Error::OddOrder { angle: c.root.arg().rem_euclid(2.0 * PI), order: c.multiplicity });
            }
            let zeta = c.root / c.root.norm();
            factors.extend(std::iter::repeat_n(zeta, c.multiplicity / 2));
        } else if lr < 0.0 {
            worst = worst.max(1.0 / lr.abs());
            factors.extend(std::iter::repeat_n(c.root, c.multiplicity));
        }
    }
    if factors.len() != n {
        return Err(Error::SpectralFactorization { condition: worst.max(1.0 / ON_CIRCLE_TOL) });
    }
    let mut h = vec![Complex64::new(1.0, 0.0)];
    for r in &factors {
        h = super::roots::mul_linear(&h, *r);
    }
    // a(θ) = κ |H(e^{iθ})|², κ fitted on samples
    let samples = 4 * n + 8;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..samples {
        let th = 2.0 * PI * (k as f64 + 0.5) / samples as f64;
        let z = Complex64::from_polar(1.0, th);
        let hz = h.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c).norm_sqr();
        num += a.eval_angle(th) * hz;
        den += hz * hz;
    }
    let kappa = (num / den).sqrt();
    let scaled: Vec<Complex64> = h.iter().map(|c| c * kappa).collect();
    let rotated: Vec<Complex64> = scaled.iter().map(|c| c * Complex64::new(0.0, -1.0)).collect();
    let s1 = CirclePoly::real_part_of(&scaled);
    let s2 = CirclePoly::real_part_of(&rotated);
    let residual = (&(&(&s1 * &s1) + &(&s2 * &s2)) - a).max_coeff();
    if residual > 1e-8 * (1.0 + scale) {
        return Err(Error::SpectralFactorization { condition: residual / scale });
    }
    Ok([s1, s2]
        .into_iter()
        .map(|s| s.trimmed(1e-15))
        .filter(|s| s.max_coeff() > 1e-13 * scale.sqrt())
        .collect())
}

/// A real circle polynomial whose zeros are exactly the given points with the
/// given orders. Exists iff the orders sum to an even number.
pub fn poly_with_real_zeros(zeros: &[(CirclePoint, usize)]) -> Option<CirclePoly<f64>> {
    let total: usize = zeros.iter().map(|z| z.1).sum();
    if total % 2 == 1 {
        return None;
    }
    if total == 0 {
        return Some(CirclePoly::one());
    }
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for (pt, m) in zeros {
        for _ in 0..*m {
            p = super::roots::mul_linear(&p, Complex64::from_polar(1.0, pt.angle));
        }
    }
    let kappa = p[0].powf(-0.5);
    let l: Vec<Complex64> = p.iter().map(|c| c * kappa).collect();
    let out = CirclePoly::from_laurent(&l);
    let m = out.max_coeff();
    Some(out.scale(&(1.0 / m)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> CirclePoly<f64> {
        CirclePoly::x1()
    }
    fn x2() -> CirclePoly<f64> {
        CirclePoly::x2()
    }
    fn c(v: f64) -> CirclePoly<f64> {
        CirclePoly::constant(v)
    }

    #[test]
    fn zeros_of_one_minus_x1() {
        let z = circle_zeros(&(&c(1.0) - &x1())).unwrap();
        assert_eq!(z.len(), 1);
        assert!(z[0].0.distance(&CirclePoint::from_angle(0.0)) < 1e-9);
        assert_eq!(z[0].1, 2);
    }

    #[test]
    fn zeros_of_x2() {
        let z = circle_zeros(&x2()).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z.iter().all(|(_, o)| *o == 1));
        assert!(z[0].0.distance(&CirclePoint::from_angle(0.0)) < 1e-9);
        assert!(z[1].0.distance(&CirclePoint::from_angle(PI)) < 1e-9);
    }

    #[test]
    fn positive_has_no_zeros() {
        assert!(circle_zeros(&(&c(2.0) + &x1())).unwrap().is_empty());
        assert!(matches!(circle_zeros(&CirclePoly::zero()), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn tangent_examples() {
        let t = tangent_poly(&CirclePoint::from_angle(0.0));
        assert!((&t - &(&c(1.0) - &x1())).max_coeff() < 1e-15);
        let t = tangent_poly(&CirclePoint::from_angle(PI / 2.0));
        assert!((&t - &(&c(1.0) - &x2())).max_coeff() < 1e-15);
        let t = tangent_poly(&CirclePoint::from_angle(PI));
        assert!((&t - &(&c(1.0) + &x1())).max_coeff() < 1e-15);
    }

    #[test]
    fn factor_examples() {
        let a = &(&c(1.0) - &x1()) * &(&c(2.0) + &x1());
        let (p1, p2) = factor_real_zero_part(&a).unwrap();
        assert!((&p1 - &(&c(1.0) - &x1())).max_coeff() < 1e-9);
        assert!((&p2 - &(&c(2.0) + &x1())).max_coeff() < 1e-8);

        let (p1, p2) = factor_real_zero_part(&(&c(2.0) + &x1())).unwrap();
        assert!((&p1 - &c(1.0)).max_coeff() < 1e-15);
        assert!((&p2 - &(&c(2.0) + &x1())).max_coeff() < 1e-12);

        let sq = (&c(1.0) - &x1()).pow(2);
        let (p1, p2) = factor_real_zero_part(&sq).unwrap();
        assert!((&p1 - &sq).max_coeff() < 1e-8);
        assert!((&p2 - &c(1.0)).max_coeff() < 1e-8);
    }

    #[test]
    fn factor_rejects_negative_and_odd() {
        assert!(matches!(factor_real_zero_part(&x1()), Err(Error::Negative(_))));
    }

    #[test]
    fn exact_factorization_at_rational_points() {
        use crate::scalar::ratio;
        // tangent at (3/5, 4/5) times (2 + x1)
        let t = tangent_poly_exact(&ratio(3, 5), &ratio(4, 5));
        let a = &t * &(&CirclePoly::constant(ratio(2, 1)) + &CirclePoly::x1());
        let (p1, p2) = factor_real_zero_part_exact(&a).unwrap();
        assert_eq!(&p1 * &p2, a);
        assert_eq!(p1, t);
    }

    #[test]
    fn sos_examples() {
        let one_plus = &c(1.0) + &x1();
        let s = circle_sos(&one_plus).unwrap();
        assert_eq!(s.len(), 2);
        let expect = [(&c(1.0) + &x1()).scale(&(0.5f64.sqrt())), x2().scale(&(0.5f64.sqrt()))];
        for (got, want) in s.iter().zip(expect.iter()) {
            let d1 = (got - want).max_coeff();
            let d2 = (got + want).max_coeff();
            assert!(d1.min(d2) < 1e-9, "{got:?}");
        }
        let s = circle_sos(&c(4.0)).unwrap();
        assert_eq!(s, vec![c(2.0)]);
        let s = circle_sos(&(&c(1.0) - &x1())).unwrap();
        let sum = s.iter().fold(CirclePoly::zero(), |acc, q| &acc + &(q * q));
        assert!((&sum - &(&c(1.0) - &x1())).max_coeff() < 1e-12);
    }

    #[test]
    fn sos_rejects_negative() {
        assert!(matches!(circle_sos(&x1()), Err(Error::Negative(_))));
    }

    #[test]
    fn real_zero_poly_for_two_points() {
        let z = [(CirclePoint::from_angle(0.0), 1), (CirclePoint::from_angle(PI), 1)];
        let p = poly_with_real_zeros(&z).unwrap();
        assert!((&p - &x2()).max_coeff() < 1e-12 || (&p + &x2()).max_coeff() < 1e-12);
        assert!(poly_with_real_zeros(&z[..1]).is_none());
    }
}
