//! Separated lower bounds `f(x, y) ≥ p(x)²·s(y)` from the envelope
//! `g(θ) = min_{y ∈ ℙ¹} f(θ, y)/s(y)` and a Łojasiewicz-type comparison
//! `|q|^N ≤ c·g` with `q` a product of tangents at the zeros of `g`.

use std::f64::consts::PI;

use crate::cylinder::{deg_and_leading, y_minima, zero_set_analysis, CylinderPoly, YMin};
use crate::error::{Error, Result, Witness};
use crate::poly::{circle_zeros, snap_rational_point_within, tangent_poly, CirclePoint, CirclePoly, UnivariatePoly};

/// Tunable constants of the construction.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeConfig {
    /// Uniform angle grid for sampling the envelope.
    pub samples: usize,
    /// Multiplier applied to the comparison constant `c`.
    pub safety: f64,
    /// Largest exponent `N` tried.
    pub max_exponent: usize,
    /// Rounds of safety increase when validation fails.
    pub retries: usize,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { samples: 512, safety: 1.05, max_exponent: 64, retries: 3 }
    }
}

/// Samples of `g(θ) = min over ℝ ∪ {∞} of f(θ, y)/s(y)`.
#[derive(Debug, Clone)]
pub struct EnvelopeFunction {
    pub samples: Vec<(f64, f64)>,
    pub s_ref: UnivariatePoly<f64>,
    pub f_ref: CylinderPoly<f64>,
    /// `a_d(θ)/b_d` at each sample angle.
    pub infinity_values: Vec<f64>,
}

impl EnvelopeFunction {
    /// The envelope at an arbitrary angle.
    pub fn value_at(&self, theta: f64) -> f64 {
        pointwise(&self.f_ref, &self.s_ref, theta)
    }

    pub fn min(&self) -> (f64, f64) {
        self.samples.iter().copied().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn pointwise(f: &CylinderPoly<f64>, s: &UnivariatePoly<f64>, theta: f64) -> f64 {
    let u = f.at_angle(theta);
    let d = s.degree().unwrap_or(0);
    let at_inf = u.coeff(d) / s.leading();
    // critical points of u/s are the roots of u′s − us′
    let num = &(&u.derivative() * s) - &(&u * &s.derivative());
    let mut best = at_inf.min(u.eval_f64(0.0) / s.eval_f64(0.0));
    for y in num.near_real_roots(1e-6) {
        best = best.min(u.eval_f64(y) / s.eval_f64(y));
    }
    // coarse guard against a critical point lost to root-finding noise
    for j in 0..32 {
        let y = (PI * (j as f64 + 0.5) / 32.0 - PI / 2.0).tan();
        best = best.min(u.eval_f64(y) / s.eval_f64(y));
    }
    best
}

fn check_inputs(f: &CylinderPoly<f64>, s: &UnivariatePoly<f64>) -> Result<()> {
    if f.degree() != s.degree() {
        return Err(Error::DegreeMismatch(format!(
            "deg_y f = {:?} but deg s = {:?}",
            f.degree(),
            s.degree()
        )));
    }
    match y_minima(s) {
        YMin::Minima(m) if m[0].1 > 0.0 => Ok(()),
        _ => Err(Error::Precondition("s must be strictly positive on ℝ".into())),
    }
}

/// Samples the envelope on a uniform grid of `n` angles.
pub fn envelope_g(f: &CylinderPoly<f64>, s: &UnivariatePoly<f64>, n: usize) -> Result<EnvelopeFunction> {
    check_inputs(f, s)?;
    let d = s.degree().unwrap_or(0);
    let lead = f.coeff(d);
    let mut samples = Vec::with_capacity(n);
    let mut infinity_values = Vec::with_capacity(n);
    for k in 0..n {
        let th = 2.0 * PI * k as f64 / n as f64;
        samples.push((th, pointwise(f, s, th)));
        infinity_values.push(lead.eval_angle(th) / s.leading());
    }
    Ok(EnvelopeFunction { samples, s_ref: s.clone(), f_ref: f.clone(), infinity_values })
}

/// `|q|^N ≤ c·g` on the sample grid and the resulting `p = q^{N/2}/√(safety·c)`
/// with `p² ≤ g`.
#[derive(Debug, Clone)]
pub struct LojasiewiczWitness {
    pub n: usize,
    pub c: f64,
    pub q: CirclePoly<f64>,
    pub p: CirclePoly<f64>,
    pub safety: f64,
    /// Estimated vanishing order of `g` at each supplied zero.
    pub orders: Vec<f64>,
}

/// Vanishing order of `g` at `theta0` from a log-log fit on eight geometric
/// offsets on both sides.
pub fn estimate_order(g: &EnvelopeFunction, theta0: f64) -> f64 {
    let gmax = g.max().max(1e-300);
    let mut pts = Vec::new();
    for j in 0..8 {
        let delta = 0.1 * 0.5f64.powi(j);
        let v = 0.5 * (g.value_at(theta0 + delta).abs() + g.value_at(theta0 - delta).abs());
        if v > 1e-13 * gmax {
            pts.push((delta.ln(), v.ln()));
        }
    }
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    num / den
}

pub fn lojasiewicz_search(g: &EnvelopeFunction, zeros: &[CirclePoint], cfg: &EnvelopeConfig) -> Result<LojasiewiczWitness> {
    let gmax = g.max();
    let scale = g.f_ref.max_coeff().max(gmax);
    if let Some(&(angle, v)) = g.samples.iter().find(|s| s.1 < -1e-9 * (1.0 + scale)) {
        return Err(Error::Negative(Witness { angle, y: f64::NAN, value: v }));
    }
    let q = zeros.iter().fold(CirclePoly::one(), |acc, z| &acc * &tangent_poly(z));
    let orders: Vec<f64> = zeros.iter().map(|z| estimate_order(g, z.angle)).collect();
    let mut n = 2;
    for (z, &r) in zeros.iter().zip(&orders) {
        // q vanishes to order 2 at each supplied zero, so |q|^N to order 2N
        let need = (r / 2.0).round() * 2.0;
        while (2 * n) as f64 <= need {
            n *= 2;
            if n > cfg.max_exponent {
                return Err(Error::Precondition(format!(
                    "envelope vanishes to order ≈{r:.2} at angle {:.6}, beyond exponent cap {}",
                    z.angle, cfg.max_exponent
                )));
            }
        }
    }
    let floor = 1e-12 * gmax;
    let mut c: f64 = 0.0;
    for &(th, v) in &g.samples {
        let qn = q.eval_angle(th).abs().powi(n as i32);
        if v <= floor {
            if qn <= 1e-9 {
                continue;
            }
            return Err(Error::Precondition(format!(
                "envelope vanishes at angle {th:.6}, which is not among the supplied zeros"
            )));
        }
        c = c.max(qn / v);
    }
    if c == 0.0 {
        return Err(Error::Precondition("comparison constant is zero".into()));
    }
    let sigma = 1.0 / (cfg.safety * c).sqrt();
    let p = q.pow(n / 2).scale(&sigma);
    Ok(LojasiewiczWitness { n, c, q, p, safety: cfg.safety, orders })
}

/// A validated separated bound `f ≥ p²·s`.
#[derive(Debug, Clone)]
pub struct SeparatedBound {
    pub p: CirclePoly<f64>,
    pub p_sq: CirclePoly<f64>,
    pub witness: LojasiewiczWitness,
    /// Smallest value of `f − p²·s` found by the validation, relative to the
    /// coefficient scale of `f`.
    pub validation_min: f64,
}

/// Minimum over `n` angles of `min_y (f − p_sq·s)`, divided by `1 + max|coeff f|`.
pub fn validate_separated(f: &CylinderPoly<f64>, s: &UnivariatePoly<f64>, p_sq: &CirclePoly<f64>, n: usize) -> f64 {
    let scale = 1.0 + f.max_coeff();
    let mut worst = f64::INFINITY;
    for k in 0..n {
        let th = 2.0 * PI * k as f64 / n as f64;
        let u = &f.at_angle(th) - &s.scale(&p_sq.eval_angle(th));
        let v = match y_minima(&u.trimmed(1e-15)) {
            YMin::Unbounded { value, .. } => value.min(-1.0),
            YMin::Minima(m) => m[0].1,
        };
        worst = worst.min(v / scale);
    }
    worst
}

/// Zeros of the envelope: zeros of the leading coefficient together with the
/// angles of the real zeros of `f`, snapped to nearby rational points.
pub fn envelope_zeros(f: &CylinderPoly<f64>) -> Result<Vec<CirclePoint>> {
    let lead = deg_and_leading(f)?.leading;
    let mut angles: Vec<f64> = if lead.degree() == 0 {
        Vec::new()
    } else {
        circle_zeros(&lead)?.into_iter().map(|(p, _)| p.angle).collect()
    };
    let report = zero_set_analysis(f)?;
    if report.classification == crate::cylinder::ZeroClass::Infinite {
        return Err(Error::Precondition(format!(
            "f vanishes on a real curve ({})",
            report.witness_component.unwrap_or_default()
        )));
    }
    angles.extend(report.finite_zeros.iter().map(|(p, _)| p.angle));
    let mut out: Vec<CirclePoint> = Vec::new();
    for a in angles {
        let pt = match snap_rational_point_within(a, 64, 1e-6) {
            Some((x1, x2)) => CirclePoint::from_exact(x1, x2).expect("snapped point lies on the circle"),
            None => CirclePoint::from_angle(a),
        };
        if !out.iter().any(|p| p.distance(&pt) < 1e-6) {
            out.push(pt);
        }
    }
    Ok(out)
}

/// `p` with `f ≥ p²·s`, validated on the sample grid with exact minimization
/// in `y`; the safety factor grows on failure.
pub fn separated_lower_bound(f: &CylinderPoly<f64>, s: &UnivariatePoly<f64>, cfg: &EnvelopeConfig) -> Result<SeparatedBound> {
    let g = envelope_g(f, s, cfg.samples)?;
    let zeros = envelope_zeros(f)?;
    let mut cfg = *cfg;
    let mut last = f64::NEG_INFINITY;
    for _ in 0..=cfg.retries {
        let witness = lojasiewicz_search(&g, &zeros, &cfg)?;
        let p_sq = &witness.p * &witness.p;
        last = validate_separated(f, s, &p_sq, cfg.samples);
        if last >= -1e-9 {
            return Ok(SeparatedBound { p: witness.p.clone(), p_sq, witness, validation_min: last });
        }
        cfg.safety *= 1.05;
    }
    Err(Error::Inconclusive(format!("separated bound fails validation (minimum {last:.3e})")))
}
