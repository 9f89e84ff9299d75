//! Sums of squares in ℝ[y].

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::cylinder::{y_minima, CylinderPoly, YMin};
use crate::error::{Error, Result, Witness};
use crate::poly::roots::mul_linear;
use crate::poly::UnivariatePoly;
use crate::scalar::{Rational, Scalar};

use super::gram::{gram_solve, univariate_basis, GramProblem, SolverConfig};
use super::rounding::round_problem;
use super::SosDecomposition;

fn witness(u: &UnivariatePoly<f64>) -> Option<Witness> {
    let scale = 1.0 + u.max_coeff();
    let (y, value) = match y_minima(u) {
        YMin::Unbounded { y, value } => (y, value),
        YMin::Minima(m) => m[0],
    };
    (value < -1e-9 * scale).then_some(Witness { angle: 0.0, y, value })
}

fn residual(u: &UnivariatePoly<f64>, squares: &[UnivariatePoly<f64>]) -> f64 {
    let sum = squares.iter().fold(UnivariatePoly::zero(), |acc, s| &acc + &(s * s));
    (u - &sum).max_coeff() / (1.0 + u.max_coeff())
}

/// `u = A² + B²` by pairing conjugate roots; real roots must have even
/// multiplicity. Falls back to a Gram solve when root clustering is too
/// inaccurate for the residual bound.
pub fn univariate_sos(u: &UnivariatePoly<f64>) -> Result<Vec<UnivariatePoly<f64>>> {
    if let Some(w) = witness(u) {
        return Err(Error::Negative(w));
    }
    let d = match u.degree() {
        None => return Ok(vec![UnivariatePoly::zero(), UnivariatePoly::zero()]),
        Some(d) => d,
    };
    if d % 2 == 1 {
        return Err(Error::Negative(Witness { angle: 0.0, y: f64::NAN, value: f64::NEG_INFINITY }));
    }
    let lead = u.leading();
    if d == 0 {
        return Ok(vec![UnivariatePoly::constant(lead.max(0.0).sqrt()), UnivariatePoly::zero()]);
    }
    let mut q = vec![Complex64::new(lead.sqrt(), 0.0)];
    let mut ok = true;
    for c in u.roots() {
        let half = if c.root.im.abs() <= 1e-9 * (1.0 + c.root.re.abs()) {
            if c.multiplicity % 2 == 1 {
                ok = false;
            }
            c.multiplicity / 2
        } else if c.root.im > 0.0 {
            c.multiplicity
        } else {
            0
        };
        let r = if c.root.im.abs() <= 1e-9 * (1.0 + c.root.re.abs()) { Complex64::new(c.root.re, 0.0) } else { c.root };
        for _ in 0..half {
            q = mul_linear(&q, r);
        }
    }
    if ok && q.len() == d / 2 + 1 {
        let a = UnivariatePoly::new(q.iter().map(|z| z.re).collect());
        let b = UnivariatePoly::new(q.iter().map(|z| z.im).collect());
        let out = vec![a, b];
        if residual(u, &out) <= 1e-9 {
            return Ok(out);
        }
    }
    // Gram fallback
    let target = CylinderPoly::from_univariate(u);
    let prob = GramProblem::single(univariate_basis(d / 2), CylinderPoly::one(), target.clone());
    let sol = gram_solve(&prob, &SolverConfig::default())?;
    let dec = SosDecomposition::from_gram(&prob.blocks[0].basis, &sol.blocks[0], CylinderPoly::one());
    let out: Vec<UnivariatePoly<f64>> = dec
        .squares
        .iter()
        .map(|s| UnivariatePoly::new(s.square.coeffs().iter().map(|c| c.as_constant().unwrap_or(0.0)).collect()))
        .collect();
    let r = residual(u, &out);
    if r > 1e-9 {
        return Err(Error::SpectralFactorization { condition: r });
    }
    Ok(out)
}

/// Exact `u = Σ w_k·q_k²` with rational `w_k ≥ 0`: the repeated part of the
/// squarefree decomposition is an exact square; a squarefree remainder of
/// degree ≤ 2 is completed to a square, higher degree goes through an
/// exactly rounded Gram matrix.
pub fn univariate_sos_exact(u: &UnivariatePoly<Rational>) -> Result<Vec<(Rational, UnivariatePoly<Rational>)>> {
    let uf = u.to_f64();
    if let Some(w) = witness(&uf) {
        return Err(Error::Negative(w));
    }
    let d = match u.degree() {
        None => return Ok(Vec::new()),
        Some(d) => d,
    };
    if d % 2 == 1 || u.leading().is_negative() {
        return Err(Error::Negative(Witness { angle: 0.0, y: f64::NAN, value: f64::NEG_INFINITY }));
    }
    let lead = u.leading();
    let factors = u.squarefree_factors();
    let mut sq = UnivariatePoly::one();
    let mut rest = UnivariatePoly::constant(lead.clone());
    for (i, f) in factors.iter().enumerate() {
        let mult = i + 1;
        sq = &sq * &f.pow(mult / 2);
        if mult % 2 == 1 {
            rest = &rest * f;
        }
    }
    debug_assert_eq!(&(&sq * &sq) * &rest, *u);
    let rest_sos: Vec<(Rational, UnivariatePoly<Rational>)> = match rest.degree() {
        Some(0) => vec![(rest.coeff(0), UnivariatePoly::one())],
        Some(2) => {
            // a y² + b y + c = a (y + b/2a)² + (c − b²/4a)
            let (a, b, c) = (rest.coeff(2), rest.coeff(1), rest.coeff(0));
            let two = Rational::from_i64(2);
            let shift = &b / (&two * &a);
            let constant = &c - &(&b * &b) / (Rational::from_i64(4) * &a);
            if constant.is_negative() {
                return Err(Error::Negative(Witness { angle: 0.0, y: -shift.to_f64(), value: constant.to_f64() }));
            }
            let mut v = vec![(a, UnivariatePoly::new(vec![shift, Rational::from_i64(1)]))];
            if !constant.is_zero() {
                v.push((constant, UnivariatePoly::one()));
            }
            v
        }
        _ => {
            let k = rest.degree().unwrap_or(0) / 2;
            let target = CylinderPoly::from_univariate(&rest);
            let prob = GramProblem::single(univariate_basis(k), CylinderPoly::one(), target.to_f64());
            let cfg = SolverConfig { maximize_margin: true, ..Default::default() };
            let sol = gram_solve(&prob, &cfg)?;
            let decs = round_problem(&prob, &sol, &[vec![CylinderPoly::one()]], &[target])?;
            decs[0]
                .squares
                .iter()
                .map(|s| {
                    let q = UnivariatePoly::new(s.square.coeffs().iter().map(|c| c.as_constant().unwrap_or_else(Rational::zero)).collect());
                    (s.weight.clone(), q)
                })
                .collect()
        }
    };
    Ok(rest_sos.into_iter().map(|(w, q)| (w, &q * &sq)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn up(c: &[f64]) -> UnivariatePoly<f64> {
        UnivariatePoly::new(c.to_vec())
    }

    fn close(a: &UnivariatePoly<f64>, b: &UnivariatePoly<f64>) -> bool {
        (a - b).max_coeff() < 1e-12 || (a + b).max_coeff() < 1e-12
    }

    #[test]
    fn root_pairing_examples() {
        let s = univariate_sos(&up(&[1.0, 0.0, 1.0])).unwrap();
        assert!(close(&s[0], &up(&[0.0, 1.0])) && close(&s[1], &up(&[1.0])));
        let s = univariate_sos(&up(&[3.0, 1.0, 3.0])).unwrap();
        let r3 = 3f64.sqrt();
        assert!(close(&s[0], &up(&[r3 / 6.0, r3])), "{:?}", s);
        assert!(close(&s[1], &up(&[(35.0f64 / 12.0).sqrt()])));
        let s = univariate_sos(&up(&[1.0 / 7.0, -2.0 / 7.0, 1.0 / 7.0])).unwrap();
        let r7 = 7f64.sqrt();
        assert!(close(&s[0], &up(&[-1.0 / r7, 1.0 / r7])));
        assert!(s[1].max_coeff() < 1e-7);
    }

    #[test]
    fn negative_input_rejected() {
        assert!(matches!(univariate_sos(&up(&[-1.0, 0.0, 1.0])), Err(Error::Negative(_))));
        assert!(matches!(univariate_sos(&up(&[0.0, 1.0])), Err(Error::Negative(_))));
    }

    #[test]
    fn exact_decompositions() {
        let check = |u: UnivariatePoly<Rational>| {
            let terms = univariate_sos_exact(&u).unwrap();
            let sum = terms.iter().fold(UnivariatePoly::zero(), |acc, (w, q)| &acc + &(&(q * q)).scale(w));
            assert_eq!(sum, u);
            assert!(terms.iter().all(|(w, _)| !w.is_negative()));
        };
        check(UnivariatePoly::new(vec![ratio(1, 7), ratio(-2, 7), ratio(1, 7)]));
        check(UnivariatePoly::new(vec![ratio(3, 1), ratio(1, 1), ratio(3, 1)]));
        // (y² + 1)(y² + y + 1)² · 2
        let a = UnivariatePoly::new(vec![ratio(1, 1), ratio(0, 1), ratio(1, 1)]);
        let b = UnivariatePoly::new(vec![ratio(1, 1), ratio(1, 1), ratio(1, 1)]);
        check((&a * &(&b * &b)).scale(&ratio(2, 1)));
        // squarefree quartic y⁴ + y + 1 needs the Gram route
        check(UnivariatePoly::new(vec![ratio(1, 1), ratio(1, 1), ratio(0, 1), ratio(0, 1), ratio(1, 1)]));
    }
}
