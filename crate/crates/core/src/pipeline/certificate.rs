use std::fmt;

use crate::cylinder::CylinderPoly;
use crate::poly::CirclePoly;
use crate::scalar::Scalar;

/// Which construction produced a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Gram,
    MarshallPiece(usize),
    CircleSos,
    UnivariateSos,
    ScalingDivision,
    Preorder,
    Rounded,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Gram => write!(f, "gram"),
            Provenance::MarshallPiece(k) => write!(f, "marshall-piece-{k}"),
            Provenance::CircleSos => write!(f, "circle-sos"),
            Provenance::UnivariateSos => write!(f, "univariate-sos"),
            Provenance::ScalingDivision => write!(f, "scaling-division"),
            Provenance::Preorder => write!(f, "preorder"),
            Provenance::Rounded => write!(f, "rounded"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "gram" => Provenance::Gram,
            "circle-sos" => Provenance::CircleSos,
            "univariate-sos" => Provenance::UnivariateSos,
            "scaling-division" => Provenance::ScalingDivision,
            "preorder" => Provenance::Preorder,
            "rounded" => Provenance::Rounded,
            _ => match s.strip_prefix("marshall-piece-").and_then(|k| k.parse().ok()) {
                Some(k) => Provenance::MarshallPiece(k),
                None => return Err(format!("unknown provenance tag `{s}`")),
            },
        })
    }
}

/// `generators[multiplier] · weight · square²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertTerm<T: Scalar> {
    pub multiplier: usize,
    pub weight: T,
    pub square: CylinderPoly<T>,
    pub provenance: Provenance,
}

/// An asserted identity `target = Σ generators[m]·weight·square²`.
///
/// Generator 0 is always `1`. With a denominator `D` the certified element
/// is the fraction `target / D²`, a sum of the squares `square / D`.
#[derive(Debug, Clone)]
pub struct SosCertificate<T: Scalar> {
    pub target: CylinderPoly<T>,
    pub generators: Vec<CirclePoly<T>>,
    pub terms: Vec<CertTerm<T>>,
    pub denominator: Option<CirclePoly<T>>,
    pub residual: f64,
    pub exact: bool,
}

impl<T: Scalar> SosCertificate<T> {
    pub fn new(target: CylinderPoly<T>, exact: bool) -> Self {
        Self { target, generators: vec![CirclePoly::one()], terms: Vec::new(), denominator: None, residual: 0.0, exact }
    }

    pub fn push(&mut self, multiplier: usize, weight: T, square: CylinderPoly<T>, provenance: Provenance) {
        if !square.is_zero() && !weight.is_zero() {
            self.terms.push(CertTerm { multiplier, weight, square, provenance });
        }
    }

    /// `Σ generators[m]·weight·square²`.
    pub fn sum(&self) -> CylinderPoly<T> {
        self.terms.iter().fold(CylinderPoly::zero(), |acc, t| {
            let v = t.square.square().scale(&t.weight).scale_circle(&self.generators[t.multiplier]);
            &acc + &v
        })
    }

    /// `max|coeff(target − sum)|`. A denominator does not enter: it only
    /// says the certified element is `target / denominator²`.
    pub fn compute_residual(&self) -> f64 {
        (&self.target - &self.sum()).max_coeff()
    }

    /// Stores the measured residual.
    pub fn seal(mut self) -> Self {
        self.residual = self.compute_residual();
        self
    }
}

impl SosCertificate<f64> {
    /// Folds `√weight` into each square, so every weight becomes 1.
    pub fn unit_weights(mut self) -> Self {
        for t in &mut self.terms {
            t.square = t.square.scale(&t.weight.sqrt());
            t.weight = 1.0;
        }
        self
    }
}
