//! Certificate files. Polynomials are stored as text in the parser's
//! grammar, so a file can be checked without trusting any float encoding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{CertTerm, Provenance, SosCertificate};
use crate::poly::{format_terms, CirclePoly};
use crate::scalar::{Rational, Scalar};
use crate::cylinder::CylinderPoly;

use super::parse::{parse_constant, parse_poly};

pub const RING: &str = "circle-cylinder";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub ring: String,
    pub target: String,
    pub generators: Vec<String>,
    pub terms: Vec<TermFile>,
    pub residual: f64,
    pub exact: bool,
    /// One tag per term.
    pub provenance: Vec<String>,
    /// Present when the certified element is `target / denominator²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub multiplier: usize,
    pub square: String,
    /// Constant factor in front of the square; `1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<String>,
}

pub fn format_poly<T: Scalar>(f: &CylinderPoly<T>) -> String {
    format_terms(f.terms())
}

fn format_circle<T: Scalar>(h: &CirclePoly<T>) -> String {
    format_poly(&CylinderPoly::from_circle(h.clone()))
}

impl CertificateFile {
    pub fn from_certificate<T: Scalar>(cert: &SosCertificate<T>) -> Self {
        Self {
            ring: RING.into(),
            target: format_poly(&cert.target),
            generators: cert.generators.iter().map(format_circle).collect(),
            terms: cert
                .terms
                .iter()
                .map(|t| TermFile {
                    multiplier: t.multiplier,
                    square: format_poly(&t.square),
                    weight: (!t.weight.is_one()).then(|| t.weight.to_string()),
                })
                .collect(),
            residual: cert.residual,
            exact: cert.exact,
            provenance: cert.terms.iter().map(|t| t.provenance.to_string()).collect(),
            denominator: cert.denominator.as_ref().map(format_circle),
        }
    }

    /// Checks the schema beyond what serde enforces and parses every
    /// polynomial exactly.
    pub fn to_certificate(&self) -> Result<SosCertificate<Rational>> {
        if self.ring != RING {
            return Err(Error::Schema(format!("ring `{}` is not `{RING}`", self.ring)));
        }
        if self.generators.is_empty() {
            return Err(Error::Schema("no generators".into()));
        }
        if self.provenance.len() != self.terms.len() {
            return Err(Error::Schema(format!("{} provenance tags for {} terms", self.provenance.len(), self.terms.len())));
        }
        let circle = |text: &str, what: &str| -> Result<CirclePoly<Rational>> {
            let p = parse_poly(text).map_err(|e| Error::Schema(format!("{what}: {e}")))?;
            if p.degree().unwrap_or(0) > 0 {
                return Err(Error::Schema(format!("{what} depends on y")));
            }
            Ok(p.coeff(0))
        };
        let generators: Vec<CirclePoly<Rational>> =
            self.generators.iter().enumerate().map(|(i, g)| circle(g, &format!("generator {i}"))).collect::<Result<_>>()?;
        let target = parse_poly(&self.target).map_err(|e| Error::Schema(format!("target: {e}")))?;
        let mut cert = SosCertificate::new(target, self.exact);
        cert.generators = generators;
        cert.residual = self.residual;
        cert.denominator = self.denominator.as_deref().map(|d| circle(d, "denominator")).transpose()?;
        for (i, (t, tag)) in self.terms.iter().zip(&self.provenance).enumerate() {
            if t.multiplier >= cert.generators.len() {
                return Err(Error::Schema(format!("term {i}: multiplier {} out of range", t.multiplier)));
            }
            let square = parse_poly(&t.square).map_err(|e| Error::Schema(format!("term {i}: {e}")))?;
            let weight = match &t.weight {
                Some(w) => parse_constant(w).map_err(|e| Error::Schema(format!("term {i} weight: {e}")))?,
                None => Rational::from_i64(1),
            };
            let provenance: Provenance = tag.parse().map_err(|e: String| Error::Schema(format!("term {i}: {e}")))?;
            // kept verbatim, zero terms included, so the file round-trips
            cert.terms.push(CertTerm { multiplier: t.multiplier, weight, square, provenance });
        }
        Ok(cert)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn sample() -> SosCertificate<Rational> {
        let mut c = SosCertificate::new(parse_poly("1 + x1*y^2").unwrap(), true);
        c.generators.push(CirclePoly::x1());
        c.push(0, ratio(1, 1), parse_poly("1").unwrap(), Provenance::Gram);
        c.push(1, ratio(3, 7), parse_poly("y - 1/2*x2").unwrap(), Provenance::Preorder);
        c
    }

    #[test]
    fn serialize_then_parse_is_the_identity() {
        let file = CertificateFile::from_certificate(&sample());
        let back = CertificateFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let cert = back.to_certificate().unwrap();
        assert_eq!(CertificateFile::from_certificate(&cert), file);
        assert_eq!(cert.terms[1].weight, ratio(3, 7));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&CertificateFile::from_certificate(&sample()).to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(matches!(CertificateFile::from_json(&v.to_string()), Err(Error::Schema(_))));
    }

    #[test]
    fn schema_violations_are_reported() {
        let mut f = CertificateFile::from_certificate(&sample());
        f.terms[0].multiplier = 5;
        assert!(matches!(f.to_certificate(), Err(Error::Schema(_))));
        let mut f = CertificateFile::from_certificate(&sample());
        f.generators[1] = "y".into();
        assert!(matches!(f.to_certificate(), Err(Error::Schema(_))));
        let mut f = CertificateFile::from_certificate(&sample());
        f.ring = "torus".into();
        assert!(matches!(f.to_certificate(), Err(Error::Schema(_))));
    }
}
