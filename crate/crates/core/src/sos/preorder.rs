//! Certificates `f = σ0 + σ1·h` for nonnegativity on `{h ≥ 0} × ℝ`.

use crate::cylinder::{probe_nonnegativity, CylinderPoly};
use crate::error::{Error, Result};
use crate::poly::CirclePoly;
use crate::scalar::Scalar;

use super::gram::{cylinder_basis, gram_solve, GramProblem, GramSolution, SolverConfig};
use super::SosDecomposition;

#[derive(Debug, Clone)]
pub struct PreorderCertificate {
    pub sigma0: SosDecomposition<f64>,
    pub sigma1: SosDecomposition<f64>,
    /// `max|coeff(f − σ0 − σ1·h)|`.
    pub residual: f64,
    pub problem: GramProblem,
    pub solution: GramSolution,
}

/// Finds SOS `σ0, σ1` with `f = σ0 + σ1·h`.
pub fn preorder_certify(f: &CylinderPoly<f64>, h: &CirclePoly<f64>, cfg: &SolverConfig) -> Result<PreorderCertificate> {
    if let Some(w) = probe_nonnegativity(f, Some(h), 1e-9) {
        return Err(Error::Negative(w));
    }
    let d = f.degree().unwrap_or(0);
    if d % 2 == 1 {
        return Err(Error::Precondition(format!("odd y-degree {d}")));
    }
    let m = d / 2;
    let hm = CylinderPoly::from_circle(h.clone());
    let k0 = (f.x_degree() + h.degree()).div_ceil(2);
    let shift = h.degree().div_ceil(2);
    let mut last = Error::Infeasible { best_residual: f64::INFINITY };
    for k in k0..=k0 + 3 {
        let k1 = k.saturating_sub(shift);
        let mut prob = GramProblem::new();
        let b0 = prob.add_block(cylinder_basis(k, m));
        let b1 = prob.add_block(cylinder_basis(k1, m));
        if prob.blocks.iter().any(|b| b.size() > cfg.block_cap) {
            break;
        }
        prob.add_equation(vec![(b0, CylinderPoly::one()), (b1, hm.clone())], f.clone());
        match gram_solve(&prob, cfg) {
            Ok(sol) => {
                let s0 = SosDecomposition::from_gram(&prob.blocks[b0].basis, &sol.blocks[b0], CylinderPoly::one());
                let s1 = SosDecomposition::from_gram(&prob.blocks[b1].basis, &sol.blocks[b1], hm.clone());
                let residual = (f - &(&s0.value() + &s1.value())).max_coeff();
                let s0 = s0.with_residual(&(f - &s1.value()));
                let s1 = s1.with_residual(&(f - &s0.value()));
                return Ok(PreorderCertificate { sigma0: s0, sigma1: s1, residual, problem: prob, solution: sol });
            }
            Err(e @ (Error::Infeasible { .. } | Error::Inconclusive(_))) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Expansion of `Σ (a_i + b_i·z)²` with `z² = h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCover<T: Scalar> {
    /// `Σ a_i²`
    pub g0: CylinderPoly<T>,
    /// `Σ b_i²`
    pub g1: CylinderPoly<T>,
    /// `2 Σ a_i b_i`, the coefficient of `z`.
    pub cross: CylinderPoly<T>,
}

impl<T: Scalar> DoubleCover<T> {
    /// `g0 + g1·h`.
    pub fn combine(&self, h: &CirclePoly<T>) -> CylinderPoly<T> {
        &self.g0 + &self.g1.scale_circle(h)
    }
}

pub fn expand_double_cover<T: Scalar>(pairs: &[(CylinderPoly<T>, CylinderPoly<T>)]) -> DoubleCover<T> {
    let mut out = DoubleCover { g0: CylinderPoly::zero(), g1: CylinderPoly::zero(), cross: CylinderPoly::zero() };
    for (a, b) in pairs {
        out.g0 = &out.g0 + &a.square();
        out.g1 = &out.g1 + &b.square();
        out.cross = &out.cross + &(a * b).scale(&T::from_i64(2));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn arc_certificate() {
        let h = CirclePoly::x1();
        let f = &CylinderPoly::one() + &CylinderPoly::y().square().scale_circle(&h);
        let c = preorder_certify(&f, &h, &SolverConfig::default()).unwrap();
        assert!(c.residual < 1e-8);
        let c = preorder_certify(&CylinderPoly::from_circle(h.clone()), &h, &SolverConfig::default()).unwrap();
        assert!(c.residual < 1e-8);
        assert!(matches!(
            preorder_certify(&CylinderPoly::constant(-1.0), &h, &SolverConfig::default()),
            Err(Error::Negative(_))
        ));
    }

    #[test]
    fn double_cover_examples() {
        type Q = CylinderPoly<Rational>;
        let one = Q::one();
        let y = Q::y();
        let d = expand_double_cover(&[(one.clone(), y.clone())]);
        assert_eq!(d.g0, one);
        assert_eq!(d.g1, y.square());
        assert_eq!(d.cross, y.scale(&Rational::from_i64(2)));
        let d = expand_double_cover(&[(y.clone(), Q::zero())]);
        assert_eq!((d.g0, d.g1), (y.square(), Q::zero()));
        let d = expand_double_cover(&[(one.clone(), one.clone()), (one.clone(), -&one)]);
        assert_eq!(d.g0, one.scale(&Rational::from_i64(2)));
        assert_eq!(d.g1, one.scale(&Rational::from_i64(2)));
        assert!(d.cross.is_zero());
    }
}
