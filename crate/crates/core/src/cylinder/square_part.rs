//! Splitting `f = g²·h` where `g` collects the repeated factors of `f` and
//! `h` keeps only finitely many real zeros.
//!
//! The square part is found pointwise: at sample angles the roots of
//! `f(θ, ·)` are clustered and halved, giving the monic square part `G(θ, y)`
//! whose coefficients are rational functions of the angle. Those are
//! recovered as `N_k / w` by a null-space fit, and `g = w·G` is checked by
//! exact division.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::null_space;
use crate::poly::roots::mul_linear;
use crate::poly::{circle_zeros, poly_with_real_zeros, CirclePoint, CirclePoly};

use super::analysis::{golden_min, probe_nonnegativity, slice};
use super::zero_set::{zero_set_analysis, ZeroClass, ZeroSetReport};
use super::CylinderPoly;

/// `f = g²·h`.
#[derive(Debug, Clone)]
pub struct SquareSplit {
    pub square_root_part: CylinderPoly<f64>,
    pub cofactor: CylinderPoly<f64>,
    /// `max|coeff(f − g²h)| / (1 + max|coeff(f)|)`.
    pub residual: f64,
    pub cofactor_zeros: ZeroSetReport,
}

const SPLIT_TOL: f64 = 1e-8;

/// Splits a nonnegative `f` as `g²·h` with `h` having finitely many real zeros.
pub fn extract_real_square_part(f: &CylinderPoly<f64>) -> Result<SquareSplit> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if let Some(w) = probe_nonnegativity(f, None, 1e-9) {
        return Err(Error::Negative(w));
    }
    let g = square_factor(f)?;
    let (h, residual) = divide_by_square(f, &g)?;
    let report = zero_set_analysis(&h)?;
    if report.classification == ZeroClass::Infinite {
        return Err(Error::SurrogateLimitation(format!(
            "cofactor still vanishes on a real curve ({})",
            report.witness_component.clone().unwrap_or_default()
        )));
    }
    Ok(SquareSplit { square_root_part: g, cofactor: h, residual, cofactor_zeros: report })
}

/// `h = f / g²` with the relative residual of the identity.
pub(crate) fn divide_by_square(f: &CylinderPoly<f64>, g: &CylinderPoly<f64>) -> Result<(CylinderPoly<f64>, f64)> {
    let g2 = g.square();
    let h = f
        .exact_divide(&g2, SPLIT_TOL)
        .map_err(|e| Error::SurrogateLimitation(format!("f is not divisible by the square part: {e}")))?
        .trimmed(1e-13);
    let residual = (f - &(&g2 * &h)).max_coeff() / (1.0 + f.max_coeff());
    if residual > SPLIT_TOL {
        return Err(Error::SurrogateLimitation(format!("split residual {residual:.3e}")));
    }
    Ok((h, residual))
}

/// The square part `g` of `f`: real content zeros at half order times the
/// repeated y-factors. `f / g²` is verified to be a polynomial.
pub(crate) fn square_factor(f: &CylinderPoly<f64>) -> Result<CylinderPoly<f64>> {
    let content = content_square_root(f)?;
    let f1 = if content.degree() == 0 {
        f.clone()
    } else {
        f.divide_circle(&content.pow(2), SPLIT_TOL)
            .map_err(|e| Error::SurrogateLimitation(format!("content division: {e}")))?
    };
    let g = match pointwise_square_part(&f1) {
        None => CylinderPoly::one(),
        Some(samples) => reconstruct(&f1, &samples)?,
    };
    let g = g.scale_circle(&content);
    Ok(normalize(&g))
}

/// Largest coefficient 1 and positive.
fn normalize(g: &CylinderPoly<f64>) -> CylinderPoly<f64> {
    let mut best = 0.0f64;
    for (c, ..) in g.terms() {
        if c.abs() > best.abs() {
            best = c;
        }
    }
    if best == 0.0 {
        return g.clone();
    }
    g.scale(&(1.0 / best)).trimmed(1e-13)
}

/// Real zeros common to all coefficients, at half their order.
fn content_square_root(f: &CylinderPoly<f64>) -> Result<CirclePoly<f64>> {
    let s = f
        .coeffs()
        .iter()
        .fold(CirclePoly::zero(), |acc, c| &acc + &(c * c));
    if s.degree() == 0 {
        return Ok(CirclePoly::one());
    }
    let mut halves = Vec::new();
    for (pt, ord) in circle_zeros(&s)? {
        // ord(Σ a_i²) = 2·min ord(a_i), and that minimum is even for f ≥ 0
        let k = ord / 2;
        if ord % 2 == 1 || k % 2 == 1 {
            return Err(Error::OddOrder { angle: pt.angle, order: k });
        }
        halves.push((pt, k / 2));
    }
    // an odd total has no square root in ℝ[C]; the content then stays with
    // the y-dependent part, whose reconstruction absorbs it
    Ok(poly_with_real_zeros(&halves).unwrap_or_else(CirclePoly::one))
}

/// Angles spread by the golden ratio, away from the grid points used elsewhere.
pub(crate) fn sample_angles(n: usize) -> Vec<f64> {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    (0..n).map(|j| 2.0 * PI * ((j as f64 + 0.5) * phi).fract()).collect()
}

/// Monic square part at each sample angle, keeping the samples whose degree
/// is the most common one. `None` when that degree is zero.
fn pointwise_square_part(f: &CylinderPoly<f64>) -> Option<Vec<(f64, Vec<f64>)>> {
    let scale = f.max_coeff();
    let n = 8 * (f.x_degree() + 2) + 32;
    let mut by_degree: HashMap<usize, Vec<(f64, Vec<f64>)>> = HashMap::new();
    for th in sample_angles(n) {
        let u = slice(f, th, scale);
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for cl in u.roots() {
            for _ in 0..cl.multiplicity / 2 {
                c = mul_linear(&c, cl.root);
            }
        }
        let sigma: Vec<f64> = c.iter().map(|z| z.re).collect();
        by_degree.entry(sigma.len() - 1).or_default().push((th, sigma));
    }
    let (e, samples) = by_degree.into_iter().max_by_key(|(e, s)| (s.len(), *e))?;
    (e > 0).then_some(samples)
}

fn basis_values(th: f64, d: usize) -> Vec<f64> {
    (0..2 * d + 1)
        .map(|i| {
            let mut v = vec![0.0; 2 * d + 1];
            v[i] = 1.0;
            CirclePoly::from_coeff_vector(&v, d).eval_angle(th)
        })
        .collect()
}

/// Finds `g = w·yᵉ + Σ N_k yᵏ` with `g(θ, ·) ∝ G(θ, ·)` at every sample and
/// `g² | f`, increasing the trigonometric degree until one is found.
fn reconstruct(f: &CylinderPoly<f64>, samples: &[(f64, Vec<f64>)]) -> Result<CylinderPoly<f64>> {
    let e = samples[0].1.len() - 1;
    let dmax = f.x_degree() / 2;
    let mut last_err = String::from("no candidate");
    for d in 0..=dmax {
        let w = 2 * d + 1;
        let cols = (e + 1) * w;
        let mut rows = Vec::with_capacity(samples.len() * e);
        for (th, sigma) in samples {
            let b = basis_values(*th, d);
            for k in 0..e {
                let mut r = vec![0.0; cols];
                for i in 0..w {
                    r[i] = sigma[k] * b[i];
                    r[(k + 1) * w + i] = -b[i];
                }
                rows.push(r);
            }
        }
        if rows.len() < cols {
            break;
        }
        let null = null_space(&rows, cols, 1e-7);
        if null.is_empty() {
            continue;
        }
        let to_poly = |v: &[f64]| {
            let circ = |k: usize| CirclePoly::from_coeff_vector(&v[k * w..(k + 1) * w], d);
            let mut cs: Vec<CirclePoly<f64>> = (0..e).map(|k| circ(k + 1)).collect();
            cs.push(circ(0));
            normalize(&CylinderPoly::new(cs))
        };
        for v in candidates(f, &null, &to_poly) {
            let g = to_poly(&v);
            match divide_by_square(f, &g) {
                Ok(_) => return Ok(g),
                Err(err) => last_err = err.to_string(),
            }
        }
    }
    Err(Error::SurrogateLimitation(format!("square part could not be cleared of denominators: {last_err}")))
}

/// Null vectors to try: the basis itself and, for a two-dimensional null
/// space, the combination minimizing the division remainder.
fn candidates(
    f: &CylinderPoly<f64>,
    null: &[Vec<f64>],
    to_poly: &dyn Fn(&[f64]) -> CylinderPoly<f64>,
) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = null.to_vec();
    if null.len() == 2 {
        let comb = |t: f64| -> Vec<f64> { null[0].iter().zip(&null[1]).map(|(x, y)| t.cos() * x + t.sin() * y).collect() };
        let remainder = |t: f64| match f.exact_divide(&to_poly(&comb(t)).square(), 0.0) {
            Ok(_) => 0.0,
            Err(Error::NotDivisible { remainder }) => remainder,
            Err(_) => f64::INFINITY,
        };
        let n = 90;
        let vals: Vec<f64> = (0..n).map(|k| remainder(PI * k as f64 / n as f64)).collect();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        for &k in idx.iter().take(3) {
            let c = PI * k as f64 / n as f64;
            let (t, _) = golden_min(remainder, c - PI / n as f64, c + PI / n as f64, 1e-13);
            out.push(comb(t));
        }
    }
    out
}

/// Vertical zero lines of `f` (common real zeros of all coefficients).
pub(crate) fn vertical_zeros(f: &CylinderPoly<f64>) -> Result<Vec<(CirclePoint, usize)>> {
    let s = f.coeffs().iter().fold(CirclePoly::zero(), |acc, c| &acc + &(c * c));
    if s.degree() == 0 {
        return Ok(Vec::new());
    }
    Ok(circle_zeros(&s)?.into_iter().map(|(p, o)| (p, o / 2)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> CirclePoly<f64> {
        CirclePoly::constant(v)
    }
    fn x1() -> CirclePoly<f64> {
        CirclePoly::x1()
    }
    fn x2() -> CirclePoly<f64> {
        CirclePoly::x2()
    }
    fn y() -> CylinderPoly<f64> {
        CylinderPoly::y()
    }
    fn k(p: CirclePoly<f64>) -> CylinderPoly<f64> {
        CylinderPoly::from_circle(p)
    }

    fn assert_prop(a: &CylinderPoly<f64>, b: &CylinderPoly<f64>) {
        // a = λ b for some λ ≠ 0
        let (ta, tb) = (a.terms(), b.terms());
        let lam = ta[0].0 / tb.iter().find(|t| (t.1, t.2, t.3) == (ta[0].1, ta[0].2, ta[0].3)).unwrap().0;
        assert!((a - &b.scale(&lam)).max_coeff() < 1e-7 * a.max_coeff(), "{a} vs {b}");
    }

    #[test]
    fn perfect_square() {
        let g = &y().scale_circle(&(&c(1.0) - &x1())) - &k(x2());
        let s = extract_real_square_part(&g.square()).unwrap();
        assert_prop(&s.square_root_part, &g);
        assert_eq!(s.cofactor.degree(), Some(0));
        assert!(s.residual < 1e-10);
    }

    #[test]
    fn no_real_zeros() {
        let f = &y().square() + &CylinderPoly::one();
        let s = extract_real_square_part(&f).unwrap();
        assert_eq!(s.square_root_part, CylinderPoly::one());
        assert_prop(&s.cofactor, &f);
        assert_eq!(s.cofactor_zeros.classification, ZeroClass::Empty);
    }

    #[test]
    fn vertical_content() {
        let f = (&y().square() + &CylinderPoly::one()).scale_circle(&(&c(1.0) - &(&x1() * &x1())));
        let s = extract_real_square_part(&f).unwrap();
        assert_prop(&s.square_root_part, &k(x2()));
        assert_prop(&s.cofactor, &(&y().square() + &CylinderPoly::one()));
    }

    #[test]
    fn loop_factor_with_positive_cofactor() {
        // u = y² + x1 − 1/2 vanishes on a compact loop; v > 0
        let u = &y().square() + &k(&x1() - &c(0.5));
        let v = &(&y().square() + &y().scale_circle(&x2().scale(&0.5))) + &k(&c(2.0) + &x1());
        let s = extract_real_square_part(&(&u.square() * &v)).unwrap();
        assert_prop(&s.square_root_part, &u);
        assert_prop(&s.cofactor, &v);
    }
}
