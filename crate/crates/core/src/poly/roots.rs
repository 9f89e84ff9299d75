//! Complex polynomial roots: Aberth–Ehrlich iteration followed by
//! multiplicity clustering.
//!
//! A cluster of `k` computed roots is accepted as a root of multiplicity `k`
//! when Newton's method on the `(k-1)`-th derivative, started at the cluster
//! mean, converges and all lower derivatives vanish there to working
//! precision. Clusters failing the test are split at a tighter radius.

use num_complex::Complex64;

/// A root together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub root: Complex64,
    pub multiplicity: usize,
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn horner_abs(c: &[Complex64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(i, &a)| a * i as f64).collect()
}

/// Multiplies the ascending coefficient vector by `(z - r)`.
pub fn mul_linear(c: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); c.len() + 1];
    for (i, &a) in c.iter().enumerate() {
        out[i + 1] += a;
        out[i] -= a * r;
    }
    out
}

fn trim(c: &[Complex64]) -> &[Complex64] {
    let scale = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut n = c.len();
    while n > 0 && c[n - 1].norm() <= 1e-300_f64.max(scale * 1e-300) {
        n -= 1;
    }
    &c[..n]
}

/// Roots without multiplicity detection, one entry per degree.
pub fn raw_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let c = trim(coeffs);
    if c.len() <= 1 {
        return Vec::new();
    }
    let mut zeros_at_origin = 0;
    while zeros_at_origin < c.len() - 1 && c[zeros_at_origin].norm() == 0.0 {
        zeros_at_origin += 1;
    }
    let c = &c[zeros_at_origin..];
    let n = c.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    if n == 0 {
        return out;
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|&a| a / lead).collect();
    if n == 1 {
        out.push(-monic[0]);
        return out;
    }
    let dc = derivative(&monic);
    // initial radius from the geometric mean of the roots, bounded by Fujiwara
    let fujiwara = (0..n)
        .map(|i| (monic[i].norm() * if i == 0 { 0.5 } else { 1.0 }).powf(1.0 / (n - i) as f64))
        .fold(0.0, f64::max)
        * 2.0;
    let r0 = monic[0].norm().powf(1.0 / n as f64).clamp(1e-8, fujiwara.max(1e-8));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(r0, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4))
        .collect();
    let mut converged = vec![false; n];
    for _ in 0..800 {
        let mut all = true;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let p = horner(&monic, z[k]);
            let dp = horner(&dc, z[k]);
            if p.norm() == 0.0 {
                converged[k] = true;
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(1.0, 0.0) / d
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * s;
            let w = if denom.norm() == 0.0 || !denom.is_finite() { ratio } else { ratio / denom };
            if !w.is_finite() {
                z[k] += Complex64::new(1e-6, 1e-6);
                all = false;
                continue;
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * (1.0 + z[k].norm()) {
                converged[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    out.extend(z);
    out
}

fn validate(c: &[Complex64], members: &[Complex64], radius: f64) -> Option<Complex64> {
    let k = members.len();
    let mean = members.iter().sum::<Complex64>() / k as f64;
    if k == 1 {
        return Some(mean);
    }
    let mut derivs = vec![c.to_vec()];
    for _ in 0..k {
        let next = derivative(derivs.last().unwrap());
        derivs.push(next);
    }
    let target = &derivs[k - 1];
    let dtarget = &derivs[k];
    let mut mu = mean;
    for _ in 0..50 {
        let f = horner(target, mu);
        let df = horner(dtarget, mu);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        mu -= step;
        if step.norm() <= 1e-16 * (1.0 + mu.norm()) {
            break;
        }
    }
    if !mu.is_finite() || (mu - mean).norm() > 10.0 * radius * (1.0 + mean.norm()) {
        return None;
    }
    let r = mu.norm();
    for d in derivs.iter().take(k) {
        let scale = horner_abs(d, r).max(1e-300);
        if horner(d, mu).norm() > 1e-9 * scale {
            return None;
        }
    }
    Some(mu)
}

fn cluster_at(c: &[Complex64], pts: &[Complex64], radius: f64, out: &mut Vec<Cluster>) {
    let n = pts.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (pts[i] - pts[j]).norm() <= radius * (1.0 + pts[i].norm()) {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for i in 0..n {
        let r = find(&mut label, i);
        groups.entry(r).or_default().push(pts[i]);
    }
    for (_, members) in groups {
        match validate(c, &members, radius) {
            Some(mu) => out.push(Cluster { root: mu, multiplicity: members.len() }),
            None if radius > 1e-9 => cluster_at(c, &members, radius / 10.0, out),
            None => out.extend(members.into_iter().map(|z| Cluster { root: z, multiplicity: 1 })),
        }
    }
}

/// Roots grouped by multiplicity.
pub fn clustered_roots(coeffs: &[Complex64]) -> Vec<Cluster> {
    let c = trim(coeffs);
    let raw = raw_roots(c);
    let mut out = Vec::new();
    cluster_at(c, &raw, 1e-2, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
        roots.iter().fold(vec![Complex64::new(1.0, 0.0)], |c, &r| mul_linear(&c, r))
    }

    #[test]
    fn simple_roots() {
        let rs = [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.5), Complex64::new(0.3, -0.7)];
        let cl = clustered_roots(&poly_from_roots(&rs));
        assert_eq!(cl.len(), 3);
        for r in rs {
            assert!(cl.iter().any(|c| (c.root - r).norm() < 1e-12 && c.multiplicity == 1));
        }
    }

    #[test]
    fn fourfold_root_on_unit_circle() {
        let z = Complex64::from_polar(1.0, 0.7);
        let rs = [z, z, z, z, Complex64::new(0.4, 0.1), Complex64::new(2.5, 0.25)];
        let cl = clustered_roots(&poly_from_roots(&rs));
        let four = cl.iter().find(|c| c.multiplicity == 4).expect("fourfold cluster");
        assert!((four.root - z).norm() < 1e-10);
        assert!(four.root.norm().ln().abs() < 1e-9);
        assert_eq!(cl.iter().map(|c| c.multiplicity).sum::<usize>(), 6);
    }

    #[test]
    fn near_double_root_is_not_merged() {
        let rs = [Complex64::new(1.0, 1e-4), Complex64::new(1.0, -1e-4)];
        let cl = clustered_roots(&poly_from_roots(&rs));
        assert_eq!(cl.len(), 2);
    }
}
