//! Semidefinite feasibility core: Gram-matrix SOS searches, the
//! bounded-remainder decomposition, preorder certificates and exact rounding.

mod gram;
mod ipm;
mod preorder;
mod remainder;
mod rounding;
mod univariate;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::cylinder::CylinderPoly;
use crate::scalar::Scalar;

pub use gram::{
    circle_basis, cylinder_basis, gram_solve, univariate_basis, Block, Equation, GramProblem, GramSolution, Monomial,
    SolverConfig,
};
pub use preorder::{expand_double_cover, preorder_certify, DoubleCover, PreorderCertificate};
pub use remainder::{bounded_remainder_sos, bounded_remainder_sos_on_face, BoundedRemainder, RemainderFaces};
pub use rounding::{rational_round, round_problem};
pub use univariate::{univariate_sos, univariate_sos_exact};

/// `weight · square²`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSquare<T: Scalar> {
    pub weight: T,
    pub square: CylinderPoly<T>,
}

impl<T: Scalar> WeightedSquare<T> {
    pub fn unit(square: CylinderPoly<T>) -> Self {
        Self { weight: T::one(), square }
    }

    pub fn value(&self) -> CylinderPoly<T> {
        self.square.square().scale(&self.weight)
    }
}

/// `multiplier · Σ weight·square²` with diagnostics.
#[derive(Debug, Clone)]
pub struct SosDecomposition<T: Scalar> {
    pub squares: Vec<WeightedSquare<T>>,
    pub multiplier: CylinderPoly<T>,
    /// Smallest eigenvalue of the Gram block behind the squares.
    pub gram_eigen_margin: f64,
    /// `max|coeff(target − value)|`, as measured when built.
    pub residual: f64,
    /// Basis and Gram matrix, when the squares came from a Gram block.
    pub gram: Option<(Vec<Monomial>, DMatrix<f64>)>,
}

impl<T: Scalar> SosDecomposition<T> {
    pub fn sum_of_squares(&self) -> CylinderPoly<T> {
        self.squares.iter().fold(CylinderPoly::zero(), |acc, s| &acc + &s.value())
    }

    /// `multiplier · Σ weight·square²`.
    pub fn value(&self) -> CylinderPoly<T> {
        &self.multiplier * &self.sum_of_squares()
    }

    pub fn empty(multiplier: CylinderPoly<T>) -> Self {
        Self { squares: Vec::new(), multiplier, gram_eigen_margin: 0.0, residual: 0.0, gram: None }
    }
}

impl SosDecomposition<f64> {
    /// Squares `√λ_k·(w_kᵀ v)` from the eigen-decomposition of a Gram block.
    pub fn from_gram(basis: &[Monomial], g: &DMatrix<f64>, multiplier: CylinderPoly<f64>) -> Self {
        let e = SymmetricEigen::new(g.clone());
        let lmax = e.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
        let polys: Vec<CylinderPoly<f64>> = basis.iter().map(|m| m.to_poly()).collect();
        let mut squares = Vec::new();
        for k in 0..e.eigenvalues.len() {
            let lam = e.eigenvalues[k];
            if lam <= 1e-14 * lmax.max(1e-300) {
                continue;
            }
            let r = lam.sqrt();
            let sq = polys
                .iter()
                .enumerate()
                .fold(CylinderPoly::zero(), |acc, (i, p)| &acc + &p.scale(&(r * e.eigenvectors[(i, k)])));
            squares.push(WeightedSquare::unit(sq));
        }
        Self {
            squares,
            multiplier,
            gram_eigen_margin: e.eigenvalues.min(),
            residual: 0.0,
            gram: Some((basis.to_vec(), g.clone())),
        }
    }

    pub fn with_residual(mut self, target: &CylinderPoly<f64>) -> Self {
        self.residual = (target - &self.value()).max_coeff();
        self
    }
}
