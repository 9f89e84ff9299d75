//! Degree checks, the leading-coefficient scaling, SOS division and sign
//! probing on the cylinder.

use std::f64::consts::PI;

use crate::error::{Error, Result, Witness};
use crate::linalg::LinearSolve;
use crate::poly::{circle_zeros, CirclePoly, UnivariatePoly, SIGN_GRID};
use crate::scalar::Scalar;

use super::CylinderPoly;

/// Outcome of the necessary-condition check on degree and leading coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum Precheck {
    /// `y_bound` bounds `|y|` on the zero set when the leading coefficient is
    /// strictly positive on the circle.
    Pass { y_bound: Option<f64> },
    Fail(String),
}

impl Precheck {
    pub fn passed(&self) -> bool {
        matches!(self, Precheck::Pass { .. })
    }
}

#[derive(Debug, Clone)]
pub struct LeadingReport<T: Scalar> {
    pub degree: usize,
    pub leading: CirclePoly<T>,
    pub precheck: Precheck,
}

/// Degree, leading coefficient and the parity/sign precheck.
pub fn deg_and_leading<T: Scalar>(f: &CylinderPoly<T>) -> Result<LeadingReport<T>> {
    let d = f.degree().ok_or(Error::ZeroPolynomial)?;
    let lead = f.leading();
    let precheck = leading_precheck(&f.to_f64(), d);
    Ok(LeadingReport { degree: d, leading: lead, precheck })
}

fn leading_precheck(f: &CylinderPoly<f64>, d: usize) -> Precheck {
    if d % 2 == 1 {
        return Precheck::Fail(format!("odd y-degree {d}"));
    }
    let a = f.leading();
    let scale = a.max_coeff();
    let (theta, min) = a.grid_min(SIGN_GRID);
    if min < -1e-12 * (1.0 + scale) {
        return Precheck::Fail(format!("leading coefficient is {min:.3e} at angle {theta:.6}"));
    }
    let positive = min > 1e-9 * scale
        && circle_zeros(&a).map(|z| z.is_empty()).unwrap_or(false);
    let y_bound = positive.then(|| {
        (0..SIGN_GRID)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / SIGN_GRID as f64;
                let s: f64 = f.coeffs().iter().map(|c| c.eval_angle(th).abs()).sum();
                s / a.eval_angle(th)
            })
            .fold(0.0, f64::max)
    });
    Precheck::Pass { y_bound }
}

/// `g` with `b^{d−1}·f(x, y) = g(x, b·y)`, where `b` divides the leading
/// coefficient of `f`: `g_i = a_i·b^{d−1−i}` for `i < d` and `g_d = a_d / b`.
pub fn weighted_scale<T: LinearSolve>(f: &CylinderPoly<T>, b: &CirclePoly<T>, tol: f64) -> Result<CylinderPoly<T>> {
    let d = f.degree().ok_or(Error::ZeroPolynomial)?;
    if d == 0 {
        return Err(Error::DegreeMismatch("scaling needs y-degree at least 1".into()));
    }
    let c = f.leading().exact_divide(b, tol)?;
    let mut coeffs = Vec::with_capacity(d + 1);
    let mut pw = CirclePoly::one();
    let mut rev = Vec::with_capacity(d);
    for i in (0..d).rev() {
        rev.push(&f.coeff(i) * &pw);
        pw = &pw * b;
    }
    coeffs.extend(rev.into_iter().rev());
    coeffs.push(c);
    Ok(CylinderPoly::new(coeffs))
}

/// Divides every square `h_i` by `b`, returning `g_i` with `h_i = b·g_i`.
pub fn divide_sos_by_factor<T: LinearSolve>(
    squares: &[CylinderPoly<T>],
    b: &CirclePoly<T>,
    tol: f64,
) -> Result<Vec<CylinderPoly<T>>> {
    squares
        .iter()
        .enumerate()
        .map(|(index, h)| {
            h.divide_circle(b, tol).map_err(|e| match e {
                Error::NotDivisible { remainder } => Error::DivisionFailed { index, remainder },
                other => other,
            })
        })
        .collect()
}

/// Restriction of `f` to the angle `θ`, with top coefficients below
/// `1e−13·max|coeff(f)|` dropped so that a vanishing leading coefficient
/// does not create spurious huge roots.
pub(crate) fn slice(f: &CylinderPoly<f64>, theta: f64, scale: f64) -> UnivariatePoly<f64> {
    let mut c = f.at_angle(theta).into_coeffs();
    while c.last().is_some_and(|v| v.abs() <= 1e-13 * scale) {
        c.pop();
    }
    UnivariatePoly::new(c)
}

/// Minimum of a univariate polynomial over ℝ.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum YMin {
    /// Unbounded below; `y` is a point with a negative value.
    Unbounded { y: f64, value: f64 },
    /// All local minima `(y, value)`, sorted by value.
    Minima(Vec<(f64, f64)>),
}

impl YMin {
    pub(crate) fn value(&self) -> f64 {
        match self {
            YMin::Unbounded { .. } => f64::NEG_INFINITY,
            YMin::Minima(m) => m[0].1,
        }
    }
}

pub(crate) fn y_minima(u: &UnivariatePoly<f64>) -> YMin {
    let d = match u.degree() {
        None => return YMin::Minima(vec![(0.0, 0.0)]),
        Some(0) => return YMin::Minima(vec![(0.0, u.coeff(0))]),
        Some(d) => d,
    };
    if d % 2 == 1 || u.leading() < 0.0 {
        // walk outwards until the dominant term wins
        let dir = if d % 2 == 1 && u.leading() > 0.0 { -1.0 } else { 1.0 };
        let mut y = dir;
        for _ in 0..80 {
            let v = u.eval_f64(y);
            if v < 0.0 {
                return YMin::Unbounded { y, value: v };
            }
            y *= 2.0;
        }
        return YMin::Unbounded { y, value: u.eval_f64(y) };
    }
    let du = u.derivative();
    let ddu = du.derivative();
    let mut mins: Vec<(f64, f64)> = du
        .near_real_roots(1e-5)
        .into_iter()
        .map(|r| polish_critical(&du, &ddu, r))
        .filter(|&r| ddu.eval_f64(r) >= -1e-9 * (1.0 + ddu.max_coeff() * (1.0 + r.abs()).powi(d as i32)))
        .map(|r| (r, u.eval_f64(r)))
        .collect();
    if mins.is_empty() {
        mins.push((0.0, u.eval_f64(0.0)));
    }
    mins.sort_by(|a, b| a.1.total_cmp(&b.1));
    YMin::Minima(mins)
}

fn polish_critical(du: &UnivariatePoly<f64>, ddu: &UnivariatePoly<f64>, mut r: f64) -> f64 {
    for _ in 0..4 {
        let s = ddu.eval_f64(r);
        if s == 0.0 {
            break;
        }
        let step = du.eval_f64(r) / s;
        if !step.is_finite() || step.abs() > 1e-3 * (1.0 + r.abs()) {
            break;
        }
        r -= step;
    }
    r
}

/// Minimum of `f(θ, ·)` with its minimizer (`None` when unbounded below, in
/// which case the returned point has a negative value).
pub(crate) fn min_over_y(f: &CylinderPoly<f64>, theta: f64, scale: f64) -> (f64, f64, bool) {
    match y_minima(&slice(f, theta, scale)) {
        YMin::Unbounded { y, value } => (y, value, false),
        YMin::Minima(m) => (m[0].0, m[0].1, true),
    }
}

/// Sampled sign check on the cylinder, optionally restricted to the arc
/// `{h ≥ 0}`. Returns the most negative point found, if its value is below
/// `−tol·(1 + max coeff)`.
pub fn probe_nonnegativity(f: &CylinderPoly<f64>, restrict: Option<&CirclePoly<f64>>, tol: f64) -> Option<Witness> {
    let scale = f.max_coeff();
    if scale == 0.0 {
        return None;
    }
    let n = 1024;
    let thr = -tol * (1.0 + scale);
    let mut best: Option<Witness> = None;
    let inside = |th: f64| restrict.is_none_or(|h| h.eval_angle(th) >= 0.0);
    let consider = |th: f64, best: &mut Option<Witness>| {
        if !inside(th) {
            return;
        }
        let (y, v, _) = min_over_y(f, th, scale);
        if v < thr && best.is_none_or(|b| v < b.value) {
            *best = Some(Witness { angle: th, y, value: f.eval_angle(th, y) });
        }
    };
    for k in 0..n {
        consider(2.0 * PI * k as f64 / n as f64, &mut best);
    }
    if best.is_none() {
        // refine near the grid minimum of the envelope
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                if inside(th) { min_over_y(f, th, scale).1 } else { f64::INFINITY }
            })
            .collect();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        for &k in idx.iter().take(8) {
            let c = 2.0 * PI * k as f64 / n as f64;
            let h = 2.0 * PI / n as f64;
            let (th, _) = golden_min(|t| if inside(t) { min_over_y(f, t, scale).1 } else { f64::INFINITY }, c - h, c + h, 1e-12);
            consider(th.rem_euclid(2.0 * PI), &mut best);
        }
    }
    best.filter(|w| w.value < thr)
}

/// Golden-section minimization on `[a, b]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd { (c, fc) } else { (d, fd) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::One;

    type Q = CylinderPoly<Rational>;

    fn circ(even: &[i64], odd: &[i64]) -> CirclePoly<Rational> {
        let m = |v: &[i64]| UnivariatePoly::new(v.iter().map(|&c| Rational::from_integer(c.into())).collect());
        CirclePoly::new(m(even), m(odd))
    }

    fn ypoly(cs: Vec<CirclePoly<Rational>>) -> Q {
        CylinderPoly::new(cs)
    }

    #[test]
    fn leading_checks() {
        let f = ypoly(vec![circ(&[1], &[]), circ(&[], &[]), circ(&[1], &[])]);
        let r = deg_and_leading(&f).unwrap();
        assert_eq!(r.degree, 2);
        match r.precheck {
            Precheck::Pass { y_bound: Some(b) } => assert!((b - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let f = ypoly(vec![circ(&[1], &[]), circ(&[], &[1])]);
        assert!(!deg_and_leading(&f).unwrap().precheck.passed());
        let f = ypoly(vec![circ(&[1], &[]), circ(&[], &[]), circ(&[1, -1], &[])]);
        assert_eq!(deg_and_leading(&f).unwrap().precheck, Precheck::Pass { y_bound: None });
        assert!(deg_and_leading(&Q::zero()).is_err());
    }

    #[test]
    fn scaling_examples() {
        let b = circ(&[1, -1], &[]);
        let f = ypoly(vec![circ(&[1], &[]), circ(&[], &[]), b.clone()]);
        assert_eq!(weighted_scale(&f, &CirclePoly::one(), 0.0).unwrap(), f);
        let g = weighted_scale(&f, &b, 0.0).unwrap();
        // (1−x1)y² + 1 scales to y² + (1−x1)
        assert_eq!(g, ypoly(vec![b.clone(), circ(&[], &[]), circ(&[1], &[])]));
        assert_eq!(f.scale_circle(&b), g.substitute_scaled_y(&b));
        let f = ypoly(vec![circ(&[], &[]), circ(&[], &[1]), b.clone()]);
        let g = weighted_scale(&f, &b, 0.0).unwrap();
        assert_eq!(g, ypoly(vec![circ(&[], &[]), circ(&[], &[1]), circ(&[1], &[])]));
        let f = ypoly(vec![circ(&[1], &[]), circ(&[], &[]), circ(&[2, 1], &[])]);
        assert!(weighted_scale(&f, &b, 0.0).is_err());
    }

    #[test]
    fn sos_division() {
        let b = circ(&[1, -1], &[]);
        let y = Q::y();
        let sq = vec![y.scale_circle(&b), Q::from_circle(b.clone())];
        let g = divide_sos_by_factor(&sq, &b, 0.0).unwrap();
        assert_eq!(g, vec![y.clone(), Q::one()]);
        let back: Vec<Q> = g.iter().map(|gi| gi.scale_circle(&b)).collect();
        assert_eq!(back, sq);
        let bad = vec![y.scale_circle(&circ(&[], &[1]))];
        match divide_sos_by_factor(&bad, &b, 0.0) {
            Err(Error::DivisionFailed { index: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(divide_sos_by_factor(&[], &b, 0.0).unwrap().is_empty());
        assert!(Rational::one() > Rational::from_integer(0.into()));
    }

    #[test]
    fn probe_finds_negativity() {
        let f = ypoly(vec![circ(&[0, -1], &[]), circ(&[], &[]), circ(&[1], &[])]).to_f64();
        let w = probe_nonnegativity(&f, None, 1e-9).unwrap();
        assert!(f.eval_angle(w.angle, w.y) < 0.0);
        let f = ypoly(vec![circ(&[], &[]), circ(&[], &[]), circ(&[0, 1], &[])]).to_f64();
        let w = probe_nonnegativity(&f, None, 1e-9).unwrap();
        assert!(f.eval_angle(w.angle, w.y) < 0.0);
        let f = ypoly(vec![circ(&[1, -1], &[]), circ(&[], &[]), circ(&[1], &[])]).to_f64();
        assert!(probe_nonnegativity(&f, None, 1e-9).is_none());
        let f = ypoly(vec![circ(&[1], &[]), circ(&[], &[]), circ(&[0, 1], &[])]).to_f64();
        assert!(probe_nonnegativity(&f, Some(&CirclePoly::x1()), 1e-9).is_none());
    }
}
