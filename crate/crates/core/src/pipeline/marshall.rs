//! The decomposition `f = g + (s − ct)·p + Σ pieces` for polynomials with
//! finitely many real zeros on the cylinder.

use std::f64::consts::PI;

use crate::cylinder::{deg_and_leading, probe_nonnegativity, zero_set_analysis, CylinderPoly, ZeroClass};
use crate::envelope::{separated_lower_bound, SeparatedBound};
use crate::error::{Error, Result};
use crate::poly::{circle_sos, circle_zeros, CirclePoly, UnivariatePoly};
use num_traits::Zero;

use crate::scalar::{approximate_rational, Rational, Scalar};
use crate::sos::{bounded_remainder_sos, bounded_remainder_sos_on_face, univariate_sos, univariate_sos_exact, BoundedRemainder, RemainderFaces, SosDecomposition};

use super::certificate::{Provenance, SosCertificate};
use super::PipelineConfig;

/// `s = y^{2m} + 1`.
pub fn s_poly<T: Scalar>(m: usize) -> UnivariatePoly<T> {
    &UnivariatePoly::monomial(T::one(), 2 * m) + &UnivariatePoly::one()
}

/// `t = Σ_{i≤2m} yⁱ + 2·Σ_{j≤m} y^{2j}`, i.e. `3 + y + 3y² + … + 3y^{2m}`.
pub fn t_poly<T: Scalar>(m: usize) -> UnivariatePoly<T> {
    let c: Vec<T> = (0..=2 * m).map(|i| T::from_i64(if i % 2 == 0 { 3 } else { 1 })).collect();
    UnivariatePoly::new(c)
}

/// The constant of the decomposition: `c*` is `min s/t` over ℝ, `c = c*/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CChoice<T> {
    pub c_star: T,
    pub c: T,
}

fn check_positive(s: &UnivariatePoly<f64>, t: &UnivariatePoly<f64>) -> Result<()> {
    if s.degree() != t.degree() {
        return Err(Error::DegreeMismatch(format!("deg s = {:?}, deg t = {:?}", s.degree(), t.degree())));
    }
    for (name, u) in [("t", t), ("s", s)] {
        if u.leading() <= 0.0 || !u.real_roots().is_empty() || u.global_min().is_some_and(|(_, v)| v <= 0.0) {
            return Err(Error::Precondition(format!("{name} is not strictly positive on ℝ")));
        }
    }
    Ok(())
}

/// Candidate values of `s/t`: at the real roots of `s't − st'` and at infinity.
fn ratio_candidates(s: &UnivariatePoly<f64>, t: &UnivariatePoly<f64>) -> (Vec<f64>, f64) {
    let num = &(&s.derivative() * t) - &(s * &t.derivative());
    let crit = if num.is_zero() { Vec::new() } else { num.real_roots().into_iter().map(|(r, _)| r).collect() };
    (crit, s.leading() / t.leading())
}

pub fn choose_c(s: &UnivariatePoly<f64>, t: &UnivariatePoly<f64>) -> Result<CChoice<f64>> {
    check_positive(s, t)?;
    let (crit, at_inf) = ratio_candidates(s, t);
    let c_star = crit.iter().map(|&r| s.eval_f64(r) / t.eval_f64(r)).fold(at_inf, f64::min);
    let c = c_star / 2.0;
    univariate_sos(&(s - &t.scale(&c))).map_err(|e| e.at("s − c·t"))?;
    Ok(CChoice { c_star, c })
}

/// Exact variant. Critical points are recognised as rationals when they
/// are exact roots; at an irrational critical point `c*` is replaced by a
/// rational lower bound, so `c*` is exact exactly when the minimum sits at
/// a rational point or at infinity.
pub fn choose_c_exact(s: &UnivariatePoly<Rational>, t: &UnivariatePoly<Rational>) -> Result<CChoice<Rational>> {
    let (sf, tf) = (s.to_f64(), t.to_f64());
    check_positive(&sf, &tf)?;
    let num = &(&s.derivative() * t) - &(s * &t.derivative());
    let (crit, _) = ratio_candidates(&sf, &tf);
    let mut c_star = s.leading() / t.leading();
    for r in crit {
        let q = approximate_rational(r, 1 << 20);
        let v = if num.eval(&q).is_zero() {
            s.eval(&q) / t.eval(&q)
        } else {
            let v = sf.eval_f64(r) / tf.eval_f64(r);
            approximate_rational(v * (1.0 - 1e-9) - 1e-12, 1 << 30)
        };
        if v < c_star {
            c_star = v;
        }
    }
    let c = &c_star / &Rational::from_i64(2);
    univariate_sos_exact(&(s - &t.scale(&c))).map_err(|e| e.at("s − c·t"))?;
    Ok(CChoice { c_star, c })
}

/// A nonnegative circle coefficient times a nonnegative polynomial in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece<T: Scalar> {
    pub coefficient: CirclePoly<T>,
    pub factor: UnivariatePoly<T>,
}

impl<T: Scalar> Piece<T> {
    pub fn value(&self) -> CylinderPoly<T> {
        CylinderPoly::from_univariate(&self.factor).scale_circle(&self.coefficient)
    }
}

const BOUND_GRID: usize = 1024;

/// Checks `3|b_i| ≤ c·p` on the grid, with slack `1e−7·(1 + max|c·p|)`.
pub fn check_remainder_bound<T: Scalar>(b: &[CirclePoly<T>], c: &T, p: &CirclePoly<T>) -> Result<()> {
    let cp = p.scale(c).to_f64();
    let slack = 1e-7 * (1.0 + cp.max_coeff());
    let bf: Vec<CirclePoly<f64>> = b.iter().map(|x| x.to_f64()).collect();
    for k in 0..BOUND_GRID {
        let th = 2.0 * PI * k as f64 / BOUND_GRID as f64;
        let lim = cp.eval_angle(th) + slack;
        for (i, bi) in bf.iter().enumerate() {
            if 3.0 * bi.eval_angle(th).abs() > lim {
                return Err(Error::BoundViolation { index: i, angle: th });
            }
        }
    }
    Ok(())
}

/// The pieces summing to `c·t·p + Σ b_i yⁱ`, followed by `(p, s − c·t)`.
pub fn assemble_pieces<T: Scalar>(
    b: &[CirclePoly<T>],
    c: &T,
    p: &CirclePoly<T>,
    s: &UnivariatePoly<T>,
    t: &UnivariatePoly<T>,
) -> Result<Vec<Piece<T>>> {
    let d = s.degree().unwrap_or(0);
    if d == 0 || d % 2 == 1 || b.len() != d + 1 {
        return Err(Error::DegreeMismatch(format!("need 2m+1 remainders for deg s = 2m ≥ 2, got {} for {d}", b.len())));
    }
    check_remainder_bound(b, c, p)?;
    let m2 = d;
    let cp = p.scale(c);
    let two_cp = cp.scale(&T::from_i64(2));
    let one_y_y2 = UnivariatePoly::new(vec![T::one(), T::one(), T::one()]);
    let mut out = Vec::with_capacity(m2 + 1);
    out.push(Piece { coefficient: &(&b[0] - &b[1]) + &two_cp, factor: UnivariatePoly::one() });
    for i in 1..m2 {
        if i % 2 == 1 {
            out.push(Piece { coefficient: &b[i] + &cp, factor: one_y_y2.shift(i - 1) });
        } else {
            out.push(Piece {
                coefficient: &(&(&b[i] - &b[i - 1]) - &b[i + 1]) + &cp,
                factor: UnivariatePoly::monomial(T::one(), i),
            });
        }
    }
    out.push(Piece { coefficient: &(&b[m2] - &b[m2 - 1]) + &two_cp, factor: UnivariatePoly::monomial(T::one(), m2) });
    out.push(Piece { coefficient: p.clone(), factor: s - &t.scale(c) });
    Ok(out)
}

/// Everything the decomposition of one polynomial produced.
#[derive(Debug, Clone)]
pub struct MarshallData {
    pub m: usize,
    pub s: UnivariatePoly<f64>,
    pub t: UnivariatePoly<f64>,
    pub c: f64,
    pub bound: SeparatedBound,
    pub remainder: BoundedRemainder,
    pub pieces: Vec<Piece<f64>>,
}

impl MarshallData {
    pub fn g(&self) -> &SosDecomposition<f64> {
        &self.remainder.g
    }

    pub fn b(&self) -> &[CirclePoly<f64>] {
        &self.remainder.b
    }
}

/// Preconditions shared by the certifiers: nonnegative on the sampled
/// cylinder, even y-degree.
pub(crate) fn require_psd(f: &CylinderPoly<f64>) -> Result<usize> {
    if let Some(w) = probe_nonnegativity(f, None, 1e-9) {
        return Err(Error::Negative(w));
    }
    let rep = deg_and_leading(f)?;
    if rep.degree % 2 == 1 {
        return Err(Error::Precondition(format!("odd y-degree {}", rep.degree)));
    }
    Ok(rep.degree)
}

/// Runs the decomposition without flattening it into squares.
pub fn marshall_decompose(f: &CylinderPoly<f64>, cfg: &PipelineConfig) -> Result<MarshallData> {
    let d = require_psd(f)?;
    if d == 0 {
        return Err(Error::DegreeMismatch("y-degree 0 needs no decomposition".into()));
    }
    let zs = zero_set_analysis(f).map_err(|e| e.at("zero set"))?;
    if zs.classification == ZeroClass::Infinite {
        return Err(Error::Precondition(format!(
            "infinitely many real zeros ({})",
            zs.witness_component.unwrap_or_default()
        )));
    }
    let m = d / 2;
    let s = s_poly::<f64>(m);
    let t = t_poly::<f64>(m);
    let bound = separated_lower_bound(f, &s, &cfg.envelope).map_err(|e| e.at("separated bound"))?;
    let c = choose_c(&s, &t).map_err(|e| e.at("choose c"))?.c;
    let big_f = f - &CylinderPoly::from_univariate(&s).scale_circle(&bound.p_sq);
    let rho = bound.p_sq.scale(&(c / 3.0));
    let faces = RemainderFaces {
        circle: if bound.p.degree() == 0 { Vec::new() } else { circle_zeros(&bound.p)?.into_iter().map(|(z, k)| (z.angle, k)).collect() },
        cylinder: zs.finite_zeros.iter().map(|(z, y)| (z.angle, *y)).collect(),
    };
    let remainder = match bounded_remainder_sos_on_face(&big_f, &rho, m, &faces, &cfg.solver) {
        Ok(r) => r,
        Err(_) => bounded_remainder_sos(&big_f, &rho, m, &cfg.solver).map_err(|e| e.at("bounded remainder"))?,
    };
    let pieces = assemble_pieces(&remainder.b, &c, &bound.p_sq, &s, &t).map_err(|e| e.at("pieces"))?;
    Ok(MarshallData { m, s, t, c, bound, remainder, pieces })
}

type Sq = Vec<(f64, CylinderPoly<f64>)>;

fn squares_of(d: &SosDecomposition<f64>) -> Sq {
    d.squares.iter().map(|w| (w.weight, w.square.clone())).collect()
}

/// Squares of each piece coefficient, read off the Gram blocks of
/// `ρ ± b_i` with `ρ = (c/3)·p²`.
fn piece_coefficient_squares(data: &MarshallData) -> Vec<Sq> {
    let r = &data.remainder;
    let p = CylinderPoly::from_circle(data.bound.p.clone());
    let rho = |k: f64| (k * data.c / 3.0, p.clone());
    let top = 2 * data.m;
    let mut out = Vec::with_capacity(top + 1);
    let mut first = squares_of(&r.plus[0]);
    first.extend(squares_of(&r.minus[1]));
    first.push(rho(4.0));
    out.push(first);
    for i in 1..top {
        let mut v = squares_of(&r.plus[i]);
        if i % 2 == 1 {
            v.push(rho(2.0));
        } else {
            v.extend(squares_of(&r.minus[i - 1]));
            v.extend(squares_of(&r.minus[i + 1]));
        }
        out.push(v);
    }
    let mut last = squares_of(&r.plus[top]);
    last.extend(squares_of(&r.minus[top - 1]));
    last.push(rho(4.0));
    out.push(last);
    out
}

/// Squares of the univariate factor of piece `i`.
fn factor_squares(i: usize, top: usize) -> Sq {
    let y = |k: usize| CylinderPoly::monomial(CirclePoly::one(), k);
    if i == 0 {
        vec![(1.0, CylinderPoly::one())]
    } else if i == top || i % 2 == 0 {
        vec![(1.0, y(i / 2))]
    } else {
        // y^{i−1}(1 + y + y²) = y^{i−1}((y + ½)² + ¾)
        let h = (i - 1) / 2;
        let shifted = &y(h + 1) + &y(h).scale(&0.5);
        vec![(1.0, shifted), (0.75, y(h))]
    }
}

/// Certificate for a cylinder polynomial of y-degree 0.
pub(crate) fn circle_certificate(f: &CylinderPoly<f64>) -> Result<SosCertificate<f64>> {
    let a = f.coeff(0);
    let mut cert = SosCertificate::new(f.clone(), false);
    for q in circle_sos(&a).map_err(|e| e.at("circle sos"))? {
        cert.push(0, 1.0, CylinderPoly::from_circle(q), Provenance::CircleSos);
    }
    Ok(cert.seal())
}

pub(crate) fn finish(cert: SosCertificate<f64>, cfg: &PipelineConfig) -> Result<SosCertificate<f64>> {
    let cert = cert.seal();
    let lim = cfg.tol * (1.0 + cert.target.max_coeff());
    if cert.residual > lim {
        return Err(Error::Inconclusive(format!("certificate residual {:.3e} exceeds {lim:.3e}", cert.residual)));
    }
    if let Some(t) = cert.terms.iter().find(|t| t.square.x_degree() > cfg.max_x_degree) {
        return Err(Error::Inconclusive(format!(
            "square of x-degree {} exceeds the cap {}",
            t.square.x_degree(),
            cfg.max_x_degree
        )));
    }
    Ok(cert)
}

/// Flattens the decomposition into a verified certificate.
pub fn marshall_certify(f: &CylinderPoly<f64>, cfg: &PipelineConfig) -> Result<SosCertificate<f64>> {
    if require_psd(f)? == 0 {
        return circle_certificate(f);
    }
    let data = marshall_decompose(f, cfg)?;
    let mut cert = SosCertificate::new(f.clone(), false);
    for (w, q) in squares_of(data.g()) {
        cert.push(0, w, q, Provenance::Gram);
    }
    let top = 2 * data.m;
    for (i, coeff_sq) in piece_coefficient_squares(&data).into_iter().enumerate() {
        for (wa, a) in &coeff_sq {
            for (wb, b) in factor_squares(i, top) {
                cert.push(0, wa * wb, a * &b, Provenance::MarshallPiece(i));
            }
        }
    }
    let h1 = data.pieces.last().expect("pieces end with (p, s − ct)");
    let p = CylinderPoly::from_circle(data.bound.p.clone());
    for a in univariate_sos(&h1.factor).map_err(|e| e.at("s − c·t"))? {
        cert.push(0, 1.0, &p * &CylinderPoly::from_univariate(&a), Provenance::UnivariateSos);
    }
    finish(cert, cfg).map_err(|e| e.at("marshall"))
}
