//! Independent checking of certificates, polynomial text and certificate
//! files.
//!
//! The identity `target = Σ generators[m]·weight·square²` is re-expanded
//! with the sparse arithmetic in [`sparse`], which shares nothing with the
//! dense representation the certificates were computed in.

pub mod json;
pub mod parse;
pub mod sparse;

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;

use crate::cylinder::CylinderPoly;
use crate::error::{Error, Result};
use crate::pipeline::SosCertificate;
use crate::poly::{circle_zeros, CirclePoly};
use crate::scalar::{Rational, Scalar};

pub use json::{format_poly, CertificateFile, TermFile};
pub use parse::{parse_constant, parse_poly, parse_sparse};
use sparse::{to_rational, Exp, Interval, Sparse};

/// Arithmetic used to expand the certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Rational arithmetic; the residual must vanish identically.
    Exact,
    /// Float intervals with outward rounding; the residual bound is rigorous.
    Interval,
    /// Plain floats.
    Float,
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerifyMode::Exact => "exact",
            VerifyMode::Interval => "interval",
            VerifyMode::Float => "float",
        })
    }
}

impl FromStr for VerifyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(VerifyMode::Exact),
            "interval" => Ok(VerifyMode::Interval),
            "float" => Ok(VerifyMode::Float),
            _ => Err(format!("unknown mode `{s}` (expected exact, interval or float)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceCheck {
    /// What was checked, e.g. `term 3` or `generator 1`.
    pub item: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    /// The first failing item.
    Fail(String),
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// Largest coefficient of `target − Σ`; in interval mode an upper bound.
    pub identity_residual: f64,
    /// Residual accepted in float and interval modes.
    pub tolerance: f64,
    pub piece_checks: Vec<PieceCheck>,
    pub mode: VerifyMode,
    pub verdict: Verdict,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Default accepted residual, relative to `1 + max|coeff(f)|`.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Verifies `cert` as a certificate for `f` with the default tolerance.
pub fn verify_certificate<T: Scalar, U: Scalar>(f: &CylinderPoly<T>, cert: &SosCertificate<U>, mode: VerifyMode) -> Result<VerificationReport> {
    verify_certificate_with(f, cert, mode, DEFAULT_TOL)
}

pub fn verify_certificate_with<T: Scalar, U: Scalar>(
    f: &CylinderPoly<T>,
    cert: &SosCertificate<U>,
    mode: VerifyMode,
    tol: f64,
) -> Result<VerificationReport> {
    let target = Sparse::from_cylinder(f);
    let generators: Vec<Sparse<Rational>> = cert.generators.iter().map(Sparse::from_circle).collect();
    let mut checks = well_formed(cert, &generators)?;
    checks.extend(generator_checks(&cert.generators));
    if let Some(d) = &cert.denominator {
        checks.push(denominator_check(d));
    }
    let terms: Vec<(usize, Rational, Sparse<Rational>)> =
        cert.terms.iter().map(|t| (t.multiplier, to_rational(&t.weight), Sparse::from_cylinder(&t.square))).collect();
    for (i, (_, w, _)) in terms.iter().enumerate() {
        checks.push(PieceCheck {
            item: format!("term {i}"),
            passed: !w.is_negative(),
            detail: if w.is_negative() { format!("negative weight {w}") } else { "weight ≥ 0".into() },
        });
    }
    let scale = 1.0 + target.max_abs();
    let (residual, worst) = match mode {
        VerifyMode::Exact => {
            let r = target.sub(&expand(&terms, &generators, |q| q.clone()));
            (r.max_abs(), r.worst().map(|(e, _)| e))
        }
        VerifyMode::Float => {
            let r = target.map(|q| q.to_f64()).sub(&expand(&terms, &generators, |q| q.to_f64()));
            worst_of(r.terms.iter().map(|(e, c)| (*e, c.abs())))
        }
        VerifyMode::Interval => {
            let r = target.map(Interval::enclose).sub(&expand(&terms, &generators, Interval::enclose));
            worst_of(r.terms.iter().map(|(e, c)| (*e, c.mag())))
        }
    };
    let identity_ok = match mode {
        VerifyMode::Exact => residual == 0.0 && worst.is_none(),
        _ => residual <= tol * scale,
    };
    let verdict = if !identity_ok {
        Verdict::Fail(format!("identity residual {residual:.3e} at coefficient {}", monomial_name(worst.unwrap_or((0, 0, 0)))))
    } else if let Some(c) = checks.iter().find(|c| !c.passed) {
        Verdict::Fail(format!("{}: {}", c.item, c.detail))
    } else {
        Verdict::Pass
    };
    Ok(VerificationReport { identity_residual: residual, tolerance: tol * scale, piece_checks: checks, mode, verdict })
}

/// `Σ generators[m]·weight·square²` with coefficients converted by `conv`.
fn expand<C: sparse::Coeff>(
    terms: &[(usize, Rational, Sparse<Rational>)],
    generators: &[Sparse<Rational>],
    conv: impl Fn(&Rational) -> C + Copy,
) -> Sparse<C> {
    let mut acc = Sparse::zero();
    for (m, w, sq) in terms {
        let s = sq.map(conv);
        let piece = s.mul(&s).mul(&generators[*m].map(conv)).scale(&conv(w));
        acc = acc.add(&piece);
    }
    acc
}

fn worst_of(it: impl Iterator<Item = (Exp, f64)>) -> (f64, Option<Exp>) {
    it.fold((0.0, None), |(m, e), (k, v)| if v > m || e.is_none() && v >= m { (v, Some(k)) } else { (m, e) })
}

fn monomial_name((a, b, l): Exp) -> String {
    let mut parts = Vec::new();
    for (n, e) in [("x1", a), ("x2", b), ("y", l)] {
        match e {
            0 => {}
            1 => parts.push(n.to_string()),
            _ => parts.push(format!("{n}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn well_formed<U: Scalar>(cert: &SosCertificate<U>, generators: &[Sparse<Rational>]) -> Result<Vec<PieceCheck>> {
    if generators.is_empty() {
        return Err(Error::Schema("no generators".into()));
    }
    if let Some((i, t)) = cert.terms.iter().enumerate().find(|(_, t)| t.multiplier >= generators.len()) {
        return Err(Error::Schema(format!("term {i}: multiplier {} out of range", t.multiplier)));
    }
    let one = &generators[0];
    let ok = one.is_constant() && one.constant_term() == Rational::from_i64(1);
    Ok(vec![PieceCheck {
        item: "generator 0".into(),
        passed: ok,
        detail: if ok { "is 1".into() } else { "generator 0 must be the constant 1".into() },
    }])
}

/// A generator `h` asserts `f ≥ 0` on `{h ≥ 0} × ℝ`; the check is that this
/// set is not empty, located from the real zeros of `h` and sampling
/// between them.
fn generator_checks<U: Scalar>(generators: &[CirclePoly<U>]) -> Vec<PieceCheck> {
    generators
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, h)| {
            let h = h.to_f64();
            let item = format!("generator {i}");
            if h.is_zero() {
                return PieceCheck { item, passed: false, detail: "zero generator".into() };
            }
            let mut angles: Vec<f64> = circle_zeros(&h).map(|z| z.into_iter().map(|(p, _)| p.angle).collect()).unwrap_or_default();
            angles.sort_by(f64::total_cmp);
            let samples = sample_between(&angles, 64);
            let positive = samples.iter().filter(|&&t| h.eval_angle(t) > 0.0).count();
            let detail = format!("{} real zeros, positive at {positive} of {} samples", angles.len(), samples.len());
            PieceCheck { item, passed: positive > 0 || !angles.is_empty(), detail }
        })
        .collect()
}

fn denominator_check<U: Scalar>(d: &CirclePoly<U>) -> PieceCheck {
    let d = d.to_f64();
    let zeros = if d.is_zero() { None } else { circle_zeros(&d).ok() };
    let passed = zeros.as_ref().is_some_and(|z| z.is_empty());
    PieceCheck {
        item: "denominator".into(),
        passed,
        detail: if passed { "no real zeros".into() } else { "denominator vanishes on the circle".into() },
    }
}

/// Midpoints between consecutive zeros plus a uniform grid.
fn sample_between(zeros: &[f64], n: usize) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let mut out: Vec<f64> = (0..n).map(|k| tau * k as f64 / n as f64).collect();
    for (k, &a) in zeros.iter().enumerate() {
        let b = if k + 1 < zeros.len() { zeros[k + 1] } else { zeros[0] + tau };
        out.push(0.5 * (a + b));
    }
    out
}

/// Reads and verifies a certificate file against its own target.
pub fn verify_file(text: &str, mode: VerifyMode, tol: f64) -> Result<VerificationReport> {
    let cert = CertificateFile::from_json(text)?.to_certificate()?;
    verify_certificate_with(&cert.target, &cert, mode, tol)
}
