//! Classification of the real zero set `Z(f) ⊂ S¹ × ℝ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::poly::{poly_with_real_zeros, snap_rational_point_within, CirclePoint};

use super::analysis::{deg_and_leading, golden_min, slice, y_minima, Precheck, YMin};
use super::square_part::{square_factor, vertical_zeros};
use super::CylinderPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroClass {
    Finite,
    Infinite,
    Empty,
}

#[derive(Debug, Clone)]
pub struct ZeroSetReport {
    pub classification: ZeroClass,
    /// Isolated zeros `(point, y)`, for a finite classification.
    pub finite_zeros: Vec<(CirclePoint, f64)>,
    /// Human-readable description of a real curve on which `f` vanishes.
    pub witness_component: Option<String>,
    /// A factor of `f` vanishing on that curve, when one was isolated.
    pub component: Option<CylinderPoly<f64>>,
    /// Bound on `|y|` over `Z(f)` when the leading coefficient is positive.
    pub y_bound: Option<f64>,
}

const DENSITY_SAMPLES: usize = 64;
const SEARCH_GRID: usize = 512;
const ZERO_TOL: f64 = 1e-10;
const DOUBT_TOL: f64 = 1e-7;

/// Finite, infinite or empty real zero set; borderline situations come back
/// as an `Inconclusive` error rather than a guess.
pub fn zero_set_analysis(f: &CylinderPoly<f64>) -> Result<ZeroSetReport> {
    let lead = deg_and_leading(f)?;
    let y_bound = match lead.precheck {
        Precheck::Pass { y_bound } => y_bound,
        Precheck::Fail(_) => None,
    };
    let scale = f.max_coeff();
    let mut report = ZeroSetReport {
        classification: ZeroClass::Empty,
        finite_zeros: Vec::new(),
        witness_component: None,
        component: None,
        y_bound,
    };

    // a real curve of zeros meets a positive fraction of the vertical lines
    let mut hits = 0;
    let mut signed = false;
    for j in 0..DENSITY_SAMPLES {
        let th = 2.0 * PI * (j as f64 + 0.5) / DENSITY_SAMPLES as f64 + 0.0123;
        let u = slice(f, th, scale);
        let m = y_minima(&u);
        let v = m.value();
        if v <= ZERO_TOL * u.max_coeff() {
            hits += 1;
            signed |= v < -DOUBT_TOL * u.max_coeff();
        }
    }
    if hits * 4 >= DENSITY_SAMPLES {
        report.classification = ZeroClass::Infinite;
        if signed {
            report.witness_component = Some("f changes sign along a real curve".into());
        } else {
            match square_factor(f) {
                Ok(g) if g.degree().unwrap_or(0) > 0 => {
                    report.witness_component = Some(format!("real curve where {g} = 0"));
                    report.component = Some(g);
                }
                _ => report.witness_component = Some("real curve of zeros (factor not isolated)".into()),
            }
        }
        return Ok(report);
    }
    let vertical = vertical_zeros(f)?;
    if !vertical.is_empty() {
        let desc: Vec<String> = vertical
            .iter()
            .map(|(p, _)| format!("x1 = {:.9}, x2 = {:.9}", p.x1(), p.x2()))
            .collect();
        report.classification = ZeroClass::Infinite;
        report.witness_component = Some(format!("vertical line(s) {}", desc.join("; ")));
        report.component = poly_with_real_zeros(&vertical).map(CylinderPoly::from_circle);
        return Ok(report);
    }

    if hits > 0 {
        return Err(Error::Inconclusive(format!(
            "{hits} of {DENSITY_SAMPLES} vertical lines meet the zero set"
        )));
    }

    let env = |th: f64| y_minima(&slice(f, th, scale)).value();
    let grid: Vec<f64> = (0..SEARCH_GRID)
        .map(|k| env(2.0 * PI * k as f64 / SEARCH_GRID as f64))
        .collect();
    let h = 2.0 * PI / SEARCH_GRID as f64;
    let mut zeros: Vec<(CirclePoint, f64)> = Vec::new();
    for k in 0..SEARCH_GRID {
        let (l, r) = (grid[(k + SEARCH_GRID - 1) % SEARCH_GRID], grid[(k + 1) % SEARCH_GRID]);
        if !(grid[k] <= l && grid[k] <= r) {
            continue;
        }
        let c = k as f64 * h;
        let (th, v) = golden_min(env, c - h, c + h, 1e-13);
        let (th, v) = snap_flat_zero(&env, th.rem_euclid(2.0 * PI), v, scale);
        if v > DOUBT_TOL * scale {
            continue;
        }
        if v > ZERO_TOL * scale {
            return Err(Error::Inconclusive(format!(
                "minimum {v:.3e} near angle {th:.6} is neither clearly zero nor clearly positive"
            )));
        }
        if let YMin::Minima(ms) = y_minima(&slice(f, th, scale)) {
            let pt = CirclePoint::from_angle(th);
            for (y, val) in ms {
                if val <= ZERO_TOL * scale
                    && !zeros.iter().any(|(p, yy)| p.distance(&pt) < 1e-6 && (yy - y).abs() < 1e-6)
                {
                    zeros.push((pt.clone(), y));
                }
            }
        }
    }
    if let Some(b) = y_bound {
        if zeros.iter().any(|(_, y)| y.abs() > b * (1.0 + 1e-9)) {
            return Err(Error::Inconclusive("zero found outside the root bound".into()));
        }
    }
    if !zeros.is_empty() {
        report.classification = ZeroClass::Finite;
        report.finite_zeros = zeros;
    }
    Ok(report)
}

/// High-order zeros make the envelope flat, and golden-section search then
/// lands anywhere in the flat stretch. A nearby rational point that is at
/// least as good a zero replaces the estimate.
fn snap_flat_zero(env: &impl Fn(f64) -> f64, th: f64, v: f64, scale: f64) -> (f64, f64) {
    let Some((x1, x2)) = snap_rational_point_within(th, 64, 1e-2) else {
        return (th, v);
    };
    let Some(pt) = CirclePoint::from_exact(x1, x2) else {
        return (th, v);
    };
    let w = env(pt.angle);
    if w <= v.max(0.0) + 1e-14 * scale {
        (pt.angle.rem_euclid(2.0 * PI), w)
    } else {
        (th, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::CirclePoly;

    fn y() -> CylinderPoly<f64> {
        CylinderPoly::y()
    }
    fn k(p: CirclePoly<f64>) -> CylinderPoly<f64> {
        CylinderPoly::from_circle(p)
    }

    #[test]
    fn isolated_zero() {
        let a = &(&CirclePoly::one() - &CirclePoly::x1()).pow(2) + &CirclePoly::x2().pow(2);
        let f = &y().square() + &k(a.scale(&0.5));
        let r = zero_set_analysis(&f).unwrap();
        assert_eq!(r.classification, ZeroClass::Finite);
        assert_eq!(r.finite_zeros.len(), 1);
        let (p, yv) = &r.finite_zeros[0];
        assert!(p.distance(&CirclePoint::from_angle(0.0)) < 1e-5);
        assert!(yv.abs() < 1e-5);
        assert!((r.y_bound.unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn curve_of_zeros() {
        let g = &y().scale_circle(&(&CirclePoly::one() - &CirclePoly::x1())) - &k(CirclePoly::x2());
        let r = zero_set_analysis(&g.square()).unwrap();
        assert_eq!(r.classification, ZeroClass::Infinite);
        let c = r.component.unwrap();
        assert_eq!(c.degree(), Some(1));
        // the component is proportional to g
        let ratio = c.coeff(0).eval_angle(1.0) / g.coeff(0).eval_angle(1.0);
        assert!((&c - &g.scale(&ratio)).max_coeff() < 1e-7);
    }

    #[test]
    fn empty_and_vertical() {
        let f = &y().square() + &CylinderPoly::one();
        let r = zero_set_analysis(&f).unwrap();
        assert_eq!(r.classification, ZeroClass::Empty);
        assert!((r.y_bound.unwrap() - 2.0).abs() < 1e-9);
        let f = f.scale_circle(&CirclePoly::x2().pow(2));
        assert_eq!(zero_set_analysis(&f).unwrap().classification, ZeroClass::Infinite);
    }

    #[test]
    fn flat_zero_is_located_exactly() {
        let a = (&CirclePoly::one() - &CirclePoly::x1()).pow(2);
        let r = zero_set_analysis(&(&y().square() + &k(a))).unwrap();
        assert_eq!(r.finite_zeros.len(), 1);
        assert!(r.finite_zeros[0].0.angle.abs() < 1e-12);
    }

    #[test]
    fn two_zeros_on_one_line() {
        // (y² − 1)² + x2² vanishes at x2 = 0, y = ±1
        let f = &(&y().square() - &CylinderPoly::one()).square() + &k(CirclePoly::x2().pow(2));
        let r = zero_set_analysis(&f).unwrap();
        assert_eq!(r.classification, ZeroClass::Finite);
        assert_eq!(r.finite_zeros.len(), 4, "{:?}", r.finite_zeros);
    }
}
