//! Norm comparison constants on ℝ[y]_{≤m}: the sup norm on [−1, 1] against
//! the max-coefficient norm `c(·)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::circle::chebyshev_t_f64;
use super::univariate::UnivariatePoly;

/// Constants with `‖f‖ ≤ alpha·c(f)` and `c(f) ≤ beta·‖f‖` on ℝ[y]_{≤m}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBounds {
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
}

pub const BETA_SAFETY: f64 = 1.05;

/// `max |f|` on `[−1, 1]`, from endpoints and interior critical points.
pub fn sup_norm(f: &UnivariatePoly<f64>) -> f64 {
    let mut best = f.eval_f64(1.0).abs().max(f.eval_f64(-1.0).abs());
    for r in f.derivative().near_real_roots(1e-6) {
        if r.abs() < 1.0 {
            best = best.max(f.eval_f64(r).abs());
        }
    }
    best
}

/// Rigorous bound from iterating Markov's inequality:
/// `|a_k| = |f^(k)(0)|/k! ≤ Π_{j<k}(m−j)²/k! · ‖f‖`.
pub fn markov_beta(m: usize) -> f64 {
    let mut best = 1.0f64;
    let mut prod = 1.0f64;
    for k in 1..=m {
        prod *= ((m - k + 1) as f64).powi(2) / k as f64;
        best = best.max(prod);
    }
    best
}

fn ratio(coeffs: &[f64]) -> f64 {
    let f = UnivariatePoly::new(coeffs.to_vec());
    let s = sup_norm(&f);
    if s == 0.0 {
        0.0
    } else {
        f.max_coeff() / s
    }
}

/// Largest `c(f)/‖f‖` found over Chebyshev-type candidates, random
/// polynomials and local hill climbing. A lower estimate of the true maximum.
fn search_beta(m: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ m as u64);
    let mut starts: Vec<Vec<f64>> = chebyshev_t_f64(m)
        .into_iter()
        .map(|t| {
            let mut c = t.into_coeffs();
            c.resize(m + 1, 0.0);
            c
        })
        .collect();
    for _ in 0..200 {
        starts.push((0..=m).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    let mut scored: Vec<(f64, Vec<f64>)> = starts.into_iter().map(|c| (ratio(&c), c)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].0;
    for (r0, c0) in scored.into_iter().take(6) {
        let (mut r, mut c) = (r0, c0);
        let mut step = 0.1;
        for _ in 0..600 {
            let cand: Vec<f64> = c.iter().map(|v| v + step * rng.gen_range(-1.0..1.0)).collect();
            let rc = ratio(&cand);
            if rc > r {
                r = rc;
                c = cand;
            } else {
                step *= 0.995;
            }
        }
        best = best.max(r);
    }
    best
}

/// Norm constants for degree bound `m`; `beta` is cached per `m`.
pub fn norm_bounds(m: usize) -> NormBounds {
    static CACHE: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();
    let beta = if m <= 1 {
        // ‖a + by‖ = |a| + |b| ≥ max(|a|, |b|)
        1.0
    } else {
        let cache = CACHE.get_or_init(Default::default);
        let cached = cache.lock().unwrap().get(&m).copied();
        match cached {
            Some(b) => b,
            None => {
                let b = (BETA_SAFETY * search_beta(m)).min(markov_beta(m));
                cache.lock().unwrap().insert(m, b);
                b
            }
        }
    };
    NormBounds {
        m,
        alpha: (m + 1) as f64,
        beta,
    }
}

/// Bound on `c(Σgᵢ² − Σfᵢ²)` when `c(gᵢ − fᵢ) ≤ eps` for `k` pairs of
/// degree ≤ `m` and `‖Σfᵢ²‖ = fsup`.
pub fn perturbation_bound(k: usize, m: usize, eps: f64, fsup: f64) -> f64 {
    let b = norm_bounds(m);
    (m + 1) as f64 * k as f64 * eps * (eps + 2.0 * b.beta * fsup.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_degree_constants() {
        assert_eq!(norm_bounds(0), NormBounds { m: 0, alpha: 1.0, beta: 1.0 });
        let b = norm_bounds(1);
        assert_eq!((b.alpha, b.beta), (2.0, 1.0));
    }

    #[test]
    fn zero_eps_gives_zero_bound() {
        assert_eq!(perturbation_bound(3, 4, 0.0, 7.0), 0.0);
    }

    #[test]
    fn beta_between_chebyshev_and_markov() {
        for m in 2..=6 {
            let b = norm_bounds(m).beta;
            let t = chebyshev_t_f64(m).pop().unwrap();
            assert!(b >= t.max_coeff(), "m={m} beta={b}");
            assert!(b <= markov_beta(m) + 1e-12);
        }
    }

    #[test]
    fn sup_norm_of_chebyshev_is_one() {
        for t in chebyshev_t_f64(7) {
            assert!((sup_norm(&t) - 1.0).abs() < 1e-9);
        }
    }
}
