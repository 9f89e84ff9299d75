//! `F = g + Σ b_i yⁱ` with `g` SOS and `|b_i| ≤ ρ` on the circle, as one
//! joint Gram problem: `ρ + b_i` and `ρ − b_i` are required to be sums of
//! squares in ℝ[C], which on the compact circle is the same as the bound.

use std::f64::consts::PI;

use crate::cylinder::CylinderPoly;
use crate::error::{Error, Result};
use crate::poly::CirclePoly;

use super::gram::{circle_basis, cylinder_basis, gram_solve, GramProblem, GramSolution, SolverConfig};
use super::SosDecomposition;

#[derive(Debug, Clone)]
pub struct BoundedRemainder {
    pub g: SosDecomposition<f64>,
    /// Remainder coefficients `b_0, …, b_n`.
    pub b: Vec<CirclePoly<f64>>,
    /// Decompositions of `ρ + b_i`.
    pub plus: Vec<SosDecomposition<f64>>,
    /// Decompositions of `ρ − b_i`.
    pub minus: Vec<SosDecomposition<f64>>,
    /// Half x-degree of the Gram bases that succeeded.
    pub half_degree: usize,
    /// `max|coeff(F − g − Σ b_i yⁱ)|`.
    pub residual: f64,
    pub problem: GramProblem,
    pub solution: GramSolution,
}

/// Points where every square of the decomposition is known to vanish.
#[derive(Debug, Clone, Default)]
pub struct RemainderFaces {
    /// Angles where `ρ` vanishes, with the vanishing order of `√ρ`. The
    /// squares of `ρ ± b_i` vanish there to that order.
    pub circle: Vec<(f64, usize)>,
    /// Real zeros `(θ, y)` of the target, where `g` vanishes.
    pub cylinder: Vec<(f64, f64)>,
}

/// Taylor coefficients in `h` of `cos(θ+h)^a sin(θ+h)^b` up to `h^(n−1)`.
fn monomial_jet(a: usize, b: usize, th: f64, n: usize) -> Vec<f64> {
    let mut fact = 1.0;
    let mut cs = Vec::with_capacity(n);
    let mut sn = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            fact *= k as f64;
        }
        let phase = th + k as f64 * PI / 2.0;
        cs.push(phase.cos() / fact);
        sn.push(phase.sin() / fact);
    }
    let mul = |u: &[f64], v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (i, x) in u.iter().enumerate() {
            for (j, y) in v.iter().enumerate().take(n - i) {
                out[i + j] += x * y;
            }
        }
        out
    };
    let mut out = vec![0.0; n];
    out[0] = 1.0;
    for _ in 0..a {
        out = mul(&out, &cs);
    }
    for _ in 0..b {
        out = mul(&out, &sn);
    }
    out
}

fn circle_kernel(basis: &[crate::sos::Monomial], faces: &RemainderFaces) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for &(th, order) in &faces.circle {
        let jets: Vec<Vec<f64>> = basis.iter().map(|m| monomial_jet(m.x1, m.x2, th, order)).collect();
        for d in 0..order {
            out.push(jets.iter().map(|j| j[d]).collect());
        }
    }
    out
}

fn cylinder_kernel(basis: &[crate::sos::Monomial], faces: &RemainderFaces) -> Vec<Vec<f64>> {
    faces
        .cylinder
        .iter()
        .map(|&(th, y)| basis.iter().map(|m| th.cos().powi(m.x1 as i32) * th.sin().powi(m.x2 as i32) * y.powi(m.y as i32)).collect())
        .collect()
}

fn circle_of(p: &CylinderPoly<f64>) -> CirclePoly<f64> {
    p.coeff(0)
}

/// Finds `g` and the `b_i` for `i = 0..=max(2m, deg_y F)`. The half
/// x-degree of the bases starts at `⌈(deg_x F + deg ρ)/2⌉` and grows at
/// most three times.
#[allow(non_snake_case)]
pub fn bounded_remainder_sos(F: &CylinderPoly<f64>, rho: &CirclePoly<f64>, m: usize, cfg: &SolverConfig) -> Result<BoundedRemainder> {
    bounded_remainder_sos_on_face(F, rho, m, &RemainderFaces::default(), cfg)
}

/// As [`bounded_remainder_sos`], with every Gram matrix restricted to the
/// face cut out by the known common zeros of its squares. Without that
/// restriction the problem has no strictly feasible point whenever `ρ`
/// has zeros, and the solvers converge slowly.
pub fn bounded_remainder_sos_on_face(
    F: &CylinderPoly<f64>,
    rho: &CirclePoly<f64>,
    m: usize,
    faces: &RemainderFaces,
    cfg: &SolverConfig,
) -> Result<BoundedRemainder> {
    #![allow(non_snake_case)]
    let top = (2 * m).max(F.degree().unwrap_or(0));
    let k0 = (F.x_degree() + rho.degree()).div_ceil(2);
    let mut last = Error::Infeasible { best_residual: f64::INFINITY };
    for k in k0..=k0 + 3 {
        if (2 * k + 1) * (m + 1) > cfg.block_cap {
            break;
        }
        let mut prob = GramProblem::new();
        let g = prob.add_block(cylinder_basis(k, m));
        let plus: Vec<usize> = (0..=top).map(|_| prob.add_block(circle_basis(k))).collect();
        let minus: Vec<usize> = (0..=top).map(|_| prob.add_block(circle_basis(k))).collect();
        let gk = cylinder_kernel(&prob.blocks[g].basis, faces);
        prob.set_kernel(g, &gk);
        let ck = circle_kernel(&circle_basis(k), faces);
        for &b in plus.iter().chain(&minus) {
            prob.set_kernel(b, &ck);
        }
        // g + Σ (ρ + b_i) yⁱ = F + ρ Σ yⁱ
        let mut terms = vec![(g, CylinderPoly::one())];
        let mut rhs = F.clone();
        for (i, &p) in plus.iter().enumerate() {
            let yi = CylinderPoly::monomial(CirclePoly::one(), i);
            terms.push((p, yi.clone()));
            rhs = &rhs + &yi.scale_circle(rho);
        }
        prob.add_equation(terms, rhs);
        // (ρ + b_i) + (ρ − b_i) = 2ρ
        for i in 0..=top {
            prob.add_equation(
                vec![(plus[i], CylinderPoly::one()), (minus[i], CylinderPoly::one())],
                CylinderPoly::from_circle(rho.scale(&2.0)),
            );
        }
        let sol = match gram_solve(&prob, cfg) {
            Ok(s) => s,
            Err(e @ (Error::Infeasible { .. } | Error::Inconclusive(_))) => {
                last = e;
                continue;
            }
            Err(e) => return Err(e),
        };
        let dec = |b: usize| SosDecomposition::from_gram(&prob.blocks[b].basis, &sol.blocks[b], CylinderPoly::one());
        let gdec = dec(g);
        let pdec: Vec<SosDecomposition<f64>> = plus.iter().map(|&b| dec(b)).collect();
        let mdec: Vec<SosDecomposition<f64>> = minus.iter().map(|&b| dec(b)).collect();
        let b: Vec<CirclePoly<f64>> = pdec.iter().map(|d| &circle_of(&d.value()) - rho).collect();
        let mut recon = gdec.value();
        for (i, bi) in b.iter().enumerate() {
            recon = &recon + &CylinderPoly::monomial(bi.clone(), i);
        }
        let residual = (F - &recon).max_coeff();
        for (i, bi) in b.iter().enumerate() {
            for j in 0..1024 {
                let th = 2.0 * PI * j as f64 / 1024.0;
                if bi.eval_angle(th).abs() > rho.eval_angle(th) + 1e-8 {
                    return Err(Error::BoundViolation { index: i, angle: th });
                }
            }
        }
        let pdec = pdec.into_iter().zip(&b).map(|(d, bi)| d.with_residual(&CylinderPoly::from_circle(rho + bi))).collect();
        let mdec = mdec.into_iter().zip(&b).map(|(d, bi)| d.with_residual(&CylinderPoly::from_circle(rho - bi))).collect();
        let mut target_g = F.clone();
        for (i, bi) in b.iter().enumerate() {
            target_g = &target_g - &CylinderPoly::monomial(bi.clone(), i);
        }
        return Ok(BoundedRemainder {
            g: gdec.with_residual(&target_g),
            b,
            plus: pdec,
            minus: mdec,
            half_degree: k,
            residual,
            problem: prob,
            solution: sol,
        });
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y() -> CylinderPoly<f64> {
        CylinderPoly::y()
    }

    #[test]
    fn sos_target_keeps_small_remainder() {
        let f = &y().square().square() + &CylinderPoly::one();
        let r = bounded_remainder_sos(&f, &CirclePoly::constant(0.25), 2, &SolverConfig::default()).unwrap();
        assert!(r.residual < 1e-8);
        assert!(r.g.gram_eigen_margin > -1e-9);
        assert_eq!(r.b.len(), 5);
    }

    #[test]
    fn small_linear_term_fits_in_the_bound() {
        let f = y().scale(&0.1);
        let r = bounded_remainder_sos(&f, &CirclePoly::constant(0.5), 0, &SolverConfig::default()).unwrap();
        assert!(r.residual < 1e-8);
        assert!((r.b[1].as_constant().unwrap_or(0.0) - 0.1).abs() < 1e-8);
    }

    #[test]
    fn linear_term_beyond_the_bound_is_infeasible() {
        let r = bounded_remainder_sos(&y(), &CirclePoly::constant(0.5), 0, &SolverConfig::default());
        assert!(matches!(r, Err(Error::Infeasible { .. })), "{r:?}");
    }

    #[test]
    fn with_quadratic_room_the_linear_term_is_absorbed() {
        // 0.3(y + 1)² + (−0.3 + 0.4y − 0.3y²) = y
        let r = bounded_remainder_sos(&y(), &CirclePoly::constant(0.5), 1, &SolverConfig::default()).unwrap();
        assert!(r.residual < 1e-8);
    }
}
