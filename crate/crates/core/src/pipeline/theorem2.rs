//! The general reduction: clear the real zeros of the leading coefficient by
//! rescaling `y`, split off the square part, decompose the cofactor, and
//! divide back.

use crate::cylinder::{
    deg_and_leading, divide_sos_by_factor, extract_real_square_part, weighted_scale, CylinderPoly,
};
use crate::error::{Error, Result};
use crate::poly::{circle_sos, circle_zeros, factor_real_zero_part, negativity_witness, CirclePoly};

use super::certificate::{CertTerm, Provenance, SosCertificate};
use super::marshall::{circle_certificate, finish, marshall_certify, require_psd};
use super::{direct_certificate, PipelineConfig};

/// Tolerance for the back-division steps; the final identity check decides.
const DIVISION_TOL: f64 = 1e-5;

pub fn theorem2_certify(f: &CylinderPoly<f64>, cfg: &PipelineConfig) -> Result<SosCertificate<f64>> {
    let d = require_psd(f)?;
    if d == 0 {
        return circle_certificate(f);
    }
    let lead = deg_and_leading(f)?.leading;
    let (b, _) = factor_real_zero_part(&lead).map_err(|e| e.at("leading coefficient"))?;
    if b.degree() == 0 {
        return positive_leading(f, cfg);
    }
    let g = weighted_scale(f, &b, 1e-9).map_err(|e| e.at("scaling"))?;
    let inner = positive_leading(&g, cfg).map_err(|e| e.at("scaled polynomial"))?.unit_weights();
    let mut squares: Vec<CylinderPoly<f64>> = inner.terms.iter().map(|t| t.square.substitute_scaled_y(&b)).collect();
    let beta = circle_sos(&b).map_err(|e| e.at("factor sos"))?;
    for _ in 0..d - 1 {
        squares = back_divide(&squares, &beta, &b).map_err(|e| e.at("back-division"))?;
    }
    let mut cert = SosCertificate::new(f.clone(), false);
    for q in squares {
        cert.push(0, 1.0, q, Provenance::ScalingDivision);
    }
    finish(cert, cfg)
}

/// `Σ u_j² = b·F` to `F = Σ_{j,k} (β_k·u_j / b)²` where `b = Σ β_k²`.
fn back_divide(u: &[CylinderPoly<f64>], beta: &[CirclePoly<f64>], b: &CirclePoly<f64>) -> Result<Vec<CylinderPoly<f64>>> {
    let prods: Vec<CylinderPoly<f64>> = u.iter().flat_map(|q| beta.iter().map(move |bk| q.scale_circle(bk))).collect();
    divide_sos_by_factor(&prods, b, DIVISION_TOL)
}

/// The branch with a leading coefficient positive on the circle.
fn positive_leading(f: &CylinderPoly<f64>, cfg: &PipelineConfig) -> Result<SosCertificate<f64>> {
    if cfg.direct_gram {
        if let Ok(c) = direct_certificate(f, cfg) {
            return Ok(c);
        }
    }
    let split = extract_real_square_part(f).map_err(|e| e.at("square part"))?;
    let g = split.square_root_part;
    let h = split.cofactor;
    let inner = match h.degree() {
        Some(0) => circle_certificate(&h)?,
        _ => marshall_certify(&h, cfg)?,
    };
    let mut cert = SosCertificate::new(f.clone(), false);
    for t in inner.terms {
        cert.push(0, t.weight, &t.square * &g, t.provenance);
    }
    finish(cert, cfg)
}

/// Certificate for `f = g / h^r`. The squares of `g` are divided by
/// `h^{r/2}`; when every division is exact the result is a plain
/// certificate for the polynomial `f`, otherwise `h^{r/2}` is kept as a
/// formal denominator.
pub fn certify_localized(g: &CylinderPoly<f64>, h: &CirclePoly<f64>, r: usize, cfg: &PipelineConfig) -> Result<SosCertificate<f64>> {
    if r % 2 == 1 {
        return Err(Error::Precondition(format!("exponent {r} is odd")));
    }
    if h.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if let Some((pt, _)) = circle_zeros(h)?.first() {
        return Err(Error::Precondition(format!("h has a real zero at angle {}", pt.angle)));
    }
    if negativity_witness(h, 0.0).is_some() && negativity_witness(&h.scale(&-1.0), 0.0).is_some() {
        return Err(Error::Precondition("h changes sign on the circle".into()));
    }
    let cert = theorem2_certify(g, cfg)?;
    if r == 0 {
        return Ok(cert);
    }
    let den = h.pow(r / 2);
    let quotients: Result<Vec<CylinderPoly<f64>>> = cert.terms.iter().map(|t| t.square.divide_circle(&den, 1e-9)).collect();
    match quotients {
        Ok(q) => {
            let target = g.divide_circle(&(&den * &den), 1e-9)?;
            let mut out = SosCertificate::new(target, false);
            for (t, sq) in cert.terms.iter().zip(q) {
                out.push(t.multiplier, t.weight, sq, t.provenance);
            }
            finish(out, cfg)
        }
        Err(_) => {
            let terms: Vec<CertTerm<f64>> = cert.terms.clone();
            let mut out = SosCertificate::new(g.clone(), false);
            out.terms = terms;
            out.denominator = Some(den);
            finish(out, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PipelineConfig {
        PipelineConfig::default()
    }

    fn one_minus_x1() -> CirclePoly<f64> {
        &CirclePoly::one() - &CirclePoly::x1()
    }

    #[test]
    fn perfect_square_needs_few_terms() {
        let q = &CylinderPoly::y().scale_circle(&one_minus_x1()) - &CylinderPoly::from_circle(CirclePoly::x2());
        let c = theorem2_certify(&q.square(), &cfg()).unwrap();
        assert!(c.residual < 1e-8, "{}", c.residual);
        assert!(c.terms.len() <= 2, "{}", c.terms.len());
    }

    #[test]
    fn scaled_leading_coefficient() {
        let f = (&CylinderPoly::y().square() + &CylinderPoly::one()).scale_circle(&one_minus_x1());
        let c = theorem2_certify(&f, &cfg()).unwrap();
        assert!(c.residual <= 1e-6 * (1.0 + f.max_coeff()), "{}", c.residual);
    }

    #[test]
    fn localized_examples() {
        let g = &CylinderPoly::y().square() + &CylinderPoly::one();
        let h = &CirclePoly::constant(2.0) + &CirclePoly::x1();
        let c = certify_localized(&g, &h, 0, &cfg()).unwrap();
        assert!(c.denominator.is_none());
        let g2 = g.scale_circle(&(&h * &h));
        let c = certify_localized(&g2, &h, 2, &cfg()).unwrap();
        assert!(c.residual < 1e-6);
        assert!(certify_localized(&g, &one_minus_x1(), 2, &cfg()).is_err());
        assert!(certify_localized(&g, &h, 1, &cfg()).is_err());
    }
}
