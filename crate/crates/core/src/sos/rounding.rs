//! Exact rational certificates from floating Gram solutions: round the
//! entries, project exactly onto the coefficient identities, and check
//! semidefiniteness with an exact pivoted LDLᵀ.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::cylinder::CylinderPoly;
use crate::error::{Error, Result};
use crate::linalg::{independent_rows_exact, solve_square_exact};
use crate::scalar::{Rational, Scalar};

use super::gram::{GramProblem, GramSolution, Monomial};
use super::{SosDecomposition, WeightedSquare};

/// Denominator of the rounding grid.
const ROUND_BITS: u32 = 32;

fn round_entry(x: f64) -> Rational {
    let scale = 2f64.powi(ROUND_BITS as i32);
    let n = (x * scale).round();
    Rational::new(BigInt::from(n as i64), BigInt::from(1i64) << ROUND_BITS)
}

/// Rounding radius for a problem with `n` free entries.
fn required_margin(n: usize) -> f64 {
    (n as f64 * 2f64.powi(-(ROUND_BITS as i32))).max(1e-10)
}

/// Exact pivoted LDLᵀ: `G = Σ d_k·l_k l_kᵀ` with `d_k > 0`, or `None` if
/// `G` is not positive semidefinite.
pub(crate) fn ldl_psd(g: &[Vec<Rational>]) -> Option<Vec<(Rational, Vec<Rational>)>> {
    let n = g.len();
    let mut a: Vec<Vec<Rational>> = g.to_vec();
    let mut out = Vec::new();
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let (pos, &p) = active.iter().enumerate().max_by(|x, y| a[*x.1][*x.1].cmp(&a[*y.1][*y.1]))?;
        let d = a[p][p].clone();
        if !d.is_positive() {
            if d.is_negative() {
                return None;
            }
            // zero diagonal: the rest must vanish identically
            let nonzero = active.iter().any(|&i| active.iter().any(|&j| !a[i][j].is_zero()));
            return if nonzero { None } else { Some(out) };
        }
        let mut l = vec![Rational::zero(); n];
        for &i in &active {
            l[i] = &a[i][p] / &d;
        }
        active.remove(pos);
        for &i in &active {
            for &j in &active {
                let v = &l[i] * &a[p][j];
                a[i][j] = &a[i][j] - v;
            }
        }
        out.push((d, l));
    }
    Some(out)
}

/// Rounds a solved problem to exact Gram matrices satisfying the identities
/// with the given exact multipliers and targets. One decomposition per block.
pub fn round_problem(
    prob: &GramProblem,
    sol: &GramSolution,
    mults: &[Vec<CylinderPoly<Rational>>],
    targets: &[CylinderPoly<Rational>],
) -> Result<Vec<SosDecomposition<Rational>>> {
    let layout = prob.layout();
    let required = required_margin(layout.total);
    if sol.min_eig <= required {
        return Err(Error::Rounding { margin: sol.min_eig, required });
    }
    let (cols, t) = prob.constraints::<Rational>(mults, targets);
    let mut x: Vec<Rational> = Vec::with_capacity(layout.total);
    for g in &sol.blocks {
        let n = g.nrows();
        for i in 0..n {
            for j in i..n {
                x.push(round_entry(0.5 * (g[(i, j)] + g[(j, i)])));
            }
        }
    }
    let rows = t.len();
    let apply = |x: &[Rational]| -> Vec<Rational> {
        let mut out = vec![Rational::zero(); rows];
        for (j, c) in cols.iter().enumerate() {
            if x[j].is_zero() {
                continue;
            }
            for (r, v) in c {
                out[*r] = &out[*r] + v * &x[j];
            }
        }
        out
    };
    let defect: Vec<Rational> = apply(&x).iter().zip(&t).map(|(a, b)| b - a).collect();
    // A·Aᵀ from the sparse columns
    let mut aat = vec![vec![Rational::zero(); rows]; rows];
    for c in &cols {
        for (r1, v1) in c {
            for (r2, v2) in c {
                aat[*r1][*r2] = &aat[*r1][*r2] + v1 * v2;
            }
        }
    }
    let keep = independent_rows_exact(&aat);
    let sub: Vec<Vec<Rational>> = keep.iter().map(|&i| keep.iter().map(|&j| aat[i][j].clone()).collect()).collect();
    let rhs: Vec<Rational> = keep.iter().map(|&i| defect[i].clone()).collect();
    let yk = solve_square_exact(sub, rhs).ok_or(Error::Rounding { margin: sol.min_eig, required })?;
    let mut y = vec![Rational::zero(); rows];
    for (k, &i) in keep.iter().enumerate() {
        y[i] = yk[k].clone();
    }
    for (j, c) in cols.iter().enumerate() {
        for (r, v) in c {
            if !y[*r].is_zero() {
                x[j] = &x[j] + v * &y[*r];
            }
        }
    }
    if apply(&x) != t {
        return Err(Error::Rounding { margin: sol.min_eig, required });
    }
    let mut out = Vec::with_capacity(prob.blocks.len());
    for (b, block) in prob.blocks.iter().enumerate() {
        let n = block.size();
        let o = layout.offsets[b];
        let mut g = vec![vec![Rational::zero(); n]; n];
        let mut k = o;
        for i in 0..n {
            for j in i..n {
                g[i][j] = x[k].clone();
                g[j][i] = x[k].clone();
                k += 1;
            }
        }
        let ldl = ldl_psd(&g).ok_or(Error::Rounding { margin: sol.min_eig, required })?;
        let polys: Vec<CylinderPoly<Rational>> = block.basis.iter().map(|m| m.to_poly()).collect();
        let squares = ldl
            .into_iter()
            .map(|(d, l)| WeightedSquare {
                weight: d,
                square: polys
                    .iter()
                    .zip(&l)
                    .filter(|(_, c)| !c.is_zero())
                    .fold(CylinderPoly::zero(), |acc, (p, c)| &acc + &p.scale(c)),
            })
            .collect();
        let fl = DMatrix::from_fn(n, n, |i, j| g[i][j].to_f64());
        out.push(SosDecomposition {
            squares,
            multiplier: CylinderPoly::one(),
            gram_eigen_margin: nalgebra::SymmetricEigen::new(fl.clone()).eigenvalues.min(),
            residual: 0.0,
            gram: Some((block.basis.clone(), fl)),
        });
    }
    // attach multipliers of single-term equations for convenience
    for (e, eq) in prob.equations.iter().enumerate() {
        if eq.terms.len() == 1 {
            out[eq.terms[0].0].multiplier = mults[e][0].clone();
        }
    }
    Ok(out)
}

/// Rounds a single-block decomposition `multiplier·vᵀGv ≈ target` to an
/// exact one.
pub fn rational_round(dec: &SosDecomposition<f64>, target: &CylinderPoly<Rational>) -> Result<SosDecomposition<Rational>> {
    let (basis, g): (&Vec<Monomial>, &DMatrix<f64>) = match &dec.gram {
        Some((b, g)) => (b, g),
        None => return Err(Error::Precondition("decomposition carries no Gram matrix".into())),
    };
    let prob = GramProblem::single(basis.clone(), dec.multiplier.clone(), target.to_f64());
    let sol = GramSolution {
        blocks: vec![g.clone()],
        residual: dec.residual,
        min_eig: dec.gram_eigen_margin,
        iterations: 0,
    };
    let mult = dec.multiplier.map(|&c| Rational::from_f64(c));
    let mut out = round_problem(&prob, &sol, &[vec![mult]], std::slice::from_ref(target))?;
    let d = out.pop().expect("one block");
    debug_assert_eq!(&d.value(), target);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sos::univariate_basis;

    fn y2p1() -> CylinderPoly<Rational> {
        &CylinderPoly::y().square() + &CylinderPoly::one()
    }

    fn dec_with(g: DMatrix<f64>) -> SosDecomposition<f64> {
        SosDecomposition::from_gram(&univariate_basis(1), &g, CylinderPoly::one())
    }

    #[test]
    fn identity_rounds_to_identity() {
        let d = rational_round(&dec_with(DMatrix::identity(2, 2)), &y2p1()).unwrap();
        assert_eq!(d.value(), y2p1());
        assert_eq!(d.squares.len(), 2);
        assert!(d.squares.iter().all(|s| s.weight == Rational::from_i64(1)));
    }

    #[test]
    fn perturbed_identity_rounds() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0 + 1e-9, -1e-9, -1e-9, 1.0]);
        let d = rational_round(&dec_with(g), &y2p1()).unwrap();
        assert_eq!(d.value(), y2p1());
    }

    #[test]
    fn tiny_margin_is_reported() {
        // y² + 2y + 1 = (y + 1)²: the Gram matrix [[1,1],[1,1]] has margin 0
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-12]);
        let t = (&CylinderPoly::y() + &CylinderPoly::one()).square();
        let dec = dec_with(g);
        assert!(matches!(rational_round(&dec, &t), Err(Error::Rounding { .. })));
    }

    #[test]
    fn ldl_rejects_indefinite() {
        let r = |v: i64| Rational::from_i64(v);
        assert!(ldl_psd(&[vec![r(1), r(2)], vec![r(2), r(1)]]).is_none());
        let d = ldl_psd(&[vec![r(1), r(1)], vec![r(1), r(1)]]).unwrap();
        assert_eq!(d.len(), 1);
    }
}
