//! End-to-end certification: the decomposition for finitely many zeros,
//! the general reduction, localization, preorder certificates on arcs and
//! exactly rounded certificates.

mod certificate;
mod marshall;
mod theorem2;

use crate::cylinder::{probe_nonnegativity, CylinderPoly};
use crate::envelope::EnvelopeConfig;
use crate::error::{Error, Result};
use crate::poly::CirclePoly;
use crate::scalar::Rational;
use crate::sos::{cylinder_basis, gram_solve, preorder_certify, round_problem, GramProblem, SolverConfig, SosDecomposition};

pub use certificate::{CertTerm, Provenance, SosCertificate};
pub use marshall::{
    assemble_pieces, check_remainder_bound, choose_c, choose_c_exact, marshall_certify, marshall_decompose, s_poly,
    t_poly, CChoice, MarshallData, Piece,
};
pub use theorem2::{certify_localized, theorem2_certify};

#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub envelope: EnvelopeConfig,
    pub solver: SolverConfig,
    /// Accepted residual, relative to `1 + max|coeff(target)|`.
    pub tol: f64,
    /// Largest x-degree allowed in a square.
    pub max_x_degree: usize,
    /// Try one Gram block for `f` itself before the full reduction.
    pub direct_gram: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            envelope: EnvelopeConfig::default(),
            solver: SolverConfig::default(),
            tol: 1e-6,
            max_x_degree: 256,
            direct_gram: false,
        }
    }
}

/// Half x-degrees tried for a Gram block of a polynomial of x-degree `dx`.
fn half_degrees(dx: usize, cap: usize) -> impl Iterator<Item = usize> {
    let k0 = dx.div_ceil(2);
    (k0..=k0 + 2).filter(move |&k| 2 * k <= cap)
}

fn solve_direct(f: &CylinderPoly<f64>, cfg: &PipelineConfig, margin: bool) -> Result<(GramProblem, crate::sos::GramSolution)> {
    let d = marshall::require_psd(f)?;
    let mut solver = cfg.solver;
    solver.maximize_margin = margin;
    let mut last = Error::Infeasible { best_residual: f64::INFINITY };
    for k in half_degrees(f.x_degree(), cfg.max_x_degree) {
        let prob = GramProblem::single(cylinder_basis(k, d / 2), CylinderPoly::one(), f.clone());
        if prob.blocks[0].size() > solver.block_cap {
            break;
        }
        match gram_solve(&prob, &solver) {
            Ok(sol) => return Ok((prob, sol)),
            Err(e @ (Error::Infeasible { .. } | Error::Inconclusive(_))) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// One Gram block for `f`, without the reduction.
pub fn direct_certificate(f: &CylinderPoly<f64>, cfg: &PipelineConfig) -> Result<SosCertificate<f64>> {
    let (prob, sol) = solve_direct(f, cfg, false)?;
    let dec = SosDecomposition::from_gram(&prob.blocks[0].basis, &sol.blocks[0], CylinderPoly::one());
    let mut cert = SosCertificate::new(f.clone(), false);
    for w in dec.squares {
        cert.push(0, w.weight, w.square, Provenance::Gram);
    }
    marshall::finish(cert, cfg)
}

fn exact_from(target: &CylinderPoly<Rational>, decs: Vec<SosDecomposition<Rational>>, generators: Vec<CirclePoly<Rational>>) -> SosCertificate<Rational> {
    let mut cert = SosCertificate::new(target.clone(), true);
    cert.generators = generators;
    for (k, dec) in decs.into_iter().enumerate() {
        for w in dec.squares {
            cert.push(k, w.weight, w.square, Provenance::Rounded);
        }
    }
    cert.seal()
}

/// Exact certificate from a margin-maximized Gram block rounded to
/// rationals. Succeeds when `f` lies strictly inside the SOS cone of the
/// chosen basis.
pub fn certify_exact(f: &CylinderPoly<Rational>, cfg: &PipelineConfig) -> Result<SosCertificate<Rational>> {
    let (prob, sol) = solve_direct(&f.to_f64(), cfg, true)?;
    let decs = round_problem(&prob, &sol, &[vec![CylinderPoly::one()]], std::slice::from_ref(f))?;
    let cert = exact_from(f, decs, vec![CirclePoly::one()]);
    if cert.residual != 0.0 {
        return Err(Error::Rounding { margin: sol.min_eig, required: 0.0 });
    }
    Ok(cert)
}

/// `f = σ0 + σ1·h` as a two-generator certificate.
pub fn certify_preorder(f: &CylinderPoly<f64>, h: &CirclePoly<f64>, cfg: &PipelineConfig) -> Result<SosCertificate<f64>> {
    let pc = preorder_certify(f, h, &cfg.solver)?;
    let mut cert = SosCertificate::new(f.clone(), false);
    cert.generators.push(h.clone());
    for (k, dec) in [&pc.sigma0, &pc.sigma1].into_iter().enumerate() {
        for w in &dec.squares {
            cert.push(k, w.weight, w.square.clone(), Provenance::Preorder);
        }
    }
    marshall::finish(cert, cfg)
}

/// Exact preorder certificate by rounding both Gram blocks.
pub fn certify_preorder_exact(f: &CylinderPoly<Rational>, h: &CirclePoly<Rational>, cfg: &PipelineConfig) -> Result<SosCertificate<Rational>> {
    let mut solver = cfg.solver;
    solver.maximize_margin = true;
    let pc = preorder_certify(&f.to_f64(), &h.to_f64(), &solver)?;
    let mults = vec![vec![CylinderPoly::one(), CylinderPoly::from_circle(h.clone())]];
    let decs = round_problem(&pc.problem, &pc.solution, &mults, std::slice::from_ref(f))?;
    let cert = exact_from(f, decs, vec![CirclePoly::one(), h.clone()]);
    if cert.residual != 0.0 {
        return Err(Error::Rounding { margin: pc.solution.min_eig, required: 0.0 });
    }
    Ok(cert)
}

/// Nonnegativity probe on the whole cylinder, or on `{h ≥ 0} × ℝ`.
pub fn check(f: &CylinderPoly<f64>, restrict: Option<&CirclePoly<f64>>) -> Option<crate::Witness> {
    probe_nonnegativity(f, restrict, 1e-9)
}
