//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N: PASS|FAIL ...` line straight to stderr, so the line shows
//! up even when the harness captures output.

use std::f64::consts::TAU;
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cylinder_sos::cylinder::CylinderPoly;
use cylinder_sos::envelope::{separated_lower_bound, EnvelopeConfig};
use cylinder_sos::pipeline::{
    assemble_pieces, certify_exact, certify_preorder, check, choose_c_exact, s_poly, t_poly, theorem2_certify,
    PipelineConfig, Provenance, SosCertificate,
};
use cylinder_sos::poly::{circle_sos, factor_real_zero_part, CirclePoly, UnivariatePoly};
use cylinder_sos::scalar::ratio;
use cylinder_sos::sos::{bounded_remainder_sos, expand_double_cover, univariate_sos_exact, SolverConfig};
use cylinder_sos::verify::{parse_poly, verify_certificate, VerifyMode};
use cylinder_sos::{Error, Rational};

fn report(n: usize, ok: bool, detail: String) {
    let _ = writeln!(std::io::stderr(), "criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

/// Direct evaluation from the canonical terms, independent of the
/// library's evaluators.
fn ev(f: &CylinderPoly<f64>, th: f64, y: f64) -> f64 {
    f.terms().iter().map(|&(c, a, b, l)| c * th.cos().powi(a as i32) * th.sin().powi(b as i32) * y.powi(l as i32)).sum()
}

fn evc(h: &CirclePoly<f64>, th: f64) -> f64 {
    ev(&CylinderPoly::from_circle(h.clone()), th, 0.0)
}

fn poly(text: &str) -> CylinderPoly<f64> {
    parse_poly(text).unwrap().to_f64()
}

fn circle(text: &str) -> CirclePoly<f64> {
    poly(text).coeff(0)
}

fn corpus() -> Vec<(&'static str, CylinderPoly<f64>)> {
    [
        "y^2 + 1",
        "y^4 + 1",
        "y^2 + ((1 - x1)^2 + x2^2)/2",
        "(1 - x1)*(y^2 + 1)",
        "((1 - x1)*y - x2)^2",
        "x2^2*(y^2 + 1)",
        "(x2*y - 1)^2 + (1 - x1)*y^2",
    ]
    .into_iter()
    .map(|t| (t, poly(t)))
    .collect()
}

#[test]
fn criterion_01_circle_sos_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut max_squares = 0;
    for _ in 0..50 {
        let rand_trig = |rng: &mut ChaCha8Rng| {
            let cos: Vec<f64> = (0..=4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sin: Vec<f64> = (0..=4).map(|k| if k == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
            CirclePoly::from_trig(&cos, &sin)
        };
        let u = rand_trig(&mut rng);
        let v = rand_trig(&mut rng);
        let eps = rng.gen_range(1e-3..1e-1);
        let a = &(&(&u * &u) + &(&v * &v)) + &CirclePoly::constant(eps);
        let squares = circle_sos(&a).unwrap();
        max_squares = max_squares.max(squares.len());
        for k in 0..10_000 {
            let th = TAU * k as f64 / 10_000.0;
            let sum: f64 = squares.iter().map(|s| evc(s, th).powi(2)).sum();
            worst = worst.max((sum - evc(&a, th)).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(1, max_squares <= 2 && worst <= 1e-8 && secs <= 5.0, format!("max squares {max_squares}, sup residual {worst:.2e}, {secs:.2} s"));
}

#[test]
fn criterion_02_tangent_factorization() {
    let one_minus = circle("1 - x1");
    let two_plus = circle("2 + x1");
    let a = &one_minus * &two_plus;
    let (b, c) = factor_real_zero_part(&a).unwrap();
    // oracle: each factor is a positive multiple of the constructed one
    let multiple = |p: &CirclePoly<f64>, q: &CirclePoly<f64>| {
        let r = evc(p, 2.0) / evc(q, 2.0);
        let dev = (0..64).map(|k| (evc(p, k as f64 * 0.1) - r * evc(q, k as f64 * 0.1)).abs()).fold(0.0, f64::max);
        (r, dev)
    };
    let (rb, db) = multiple(&b, &one_minus);
    let (rc, dc) = multiple(&c, &two_plus);
    let prod = (&(&b * &c) - &a).max_coeff();
    let ok = rb > 0.0 && rc > 0.0 && db <= 1e-8 && dc <= 1e-8 && prod <= 1e-8;
    report(2, ok, format!("scales {rb:.3}/{rc:.3}, shape deviation {:.1e}, product residual {prod:.1e}", db.max(dc)));
}

#[test]
fn criterion_03_piece_identity_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = parse_poly("1 - x1 + x1^2/4").unwrap().coeff(0); // (1 − x1/2)², positive weight with a shape
    let mut failures = Vec::new();
    let mut trials = 0;
    for m in 1..=3usize {
        let s = s_poly::<Rational>(m);
        let t = t_poly::<Rational>(m);
        let c = choose_c_exact(&s, &t).unwrap().c;
        for _ in 0..20 {
            trials += 1;
            // b_i = (c/3)·p·w_i with |w_i| ≤ 1 on the circle
            let b: Vec<CirclePoly<Rational>> = (0..=2 * m)
                .map(|_| {
                    let mut w = [0i64; 3];
                    for x in &mut w {
                        *x = rng.gen_range(-100..=100);
                    }
                    let norm = w.iter().map(|x| x.abs()).sum::<i64>().max(1);
                    let wpoly = &(&CirclePoly::constant(ratio(w[0], norm)) + &CirclePoly::x1().scale(&ratio(w[1], norm)))
                        + &CirclePoly::x2().scale(&ratio(w[2], norm));
                    (&p * &wpoly).scale(&(c.clone() / Rational::from_integer(3.into())))
                })
                .collect();
            let pieces = assemble_pieces(&b, &c, &p, &s, &t).unwrap();
            // oracle: c·t·p + Σ b_i yⁱ built directly; the last piece is (p, s − c·t)
            let mut want = CylinderPoly::from_univariate(&t).scale_circle(&p).scale(&c);
            for (i, bi) in b.iter().enumerate() {
                want = &want + &CylinderPoly::monomial(bi.clone(), i);
            }
            let got = pieces[..=2 * m].iter().fold(CylinderPoly::zero(), |acc, pc| &acc + &pc.value());
            let diff = &got - &want;
            let last = &pieces[2 * m + 1];
            let last_ok = last.coefficient == p && last.factor == &s - &t.scale(&c);
            let nonneg = pieces.iter().all(|pc| {
                let cf = pc.coefficient.to_f64();
                (0..1024).all(|k| evc(&cf, TAU * k as f64 / 1024.0) >= 0.0)
            });
            if !diff.is_zero() || !last_ok || !nonneg {
                failures.push(format!("m={m}: zero residual {}, nonneg {nonneg}", diff.is_zero()));
            }
        }
    }
    report(3, failures.is_empty(), format!("{trials} trials, failures {failures:?}"));
}

#[test]
fn criterion_04_choose_c_exact() {
    let s = UnivariatePoly::new(vec![ratio(1, 1), ratio(0, 1), ratio(1, 1)]);
    let t = UnivariatePoly::new(vec![ratio(3, 1), ratio(1, 1), ratio(3, 1)]);
    let ch = choose_c_exact(&s, &t).unwrap();
    // oracle: s/t at y = ±1 is 2/7 and 2/5
    let star_ok = ch.c_star == ratio(2, 7);
    let u = &s - &t.scale(&ch.c_star);
    let seventh = UnivariatePoly::new(vec![ratio(1, 7), ratio(-2, 7), ratio(1, 7)]);
    let sq = univariate_sos_exact(&u).unwrap();
    let recon = sq.iter().fold(UnivariatePoly::zero(), |acc, (w, q)| &acc + &(q * q).scale(w));
    let ok = star_ok && u == seventh && recon == u;
    report(4, ok, format!("c* = {}, s − c*t = (y−1)²/7: {}, exact SOS residual zero: {}", ch.c_star, u == seventh, recon == u));
}

/// Dense grid minimum of `f − p_sq·s` over 512 angles and 512 heights
/// `y = tan(πu − π/2)`.
fn grid_min(f: &CylinderPoly<f64>, s: &CylinderPoly<f64>, p_sq: &CirclePoly<f64>) -> f64 {
    let mut worst = f64::INFINITY;
    for i in 0..512 {
        let th = TAU * i as f64 / 512.0;
        let pv = evc(p_sq, th);
        for j in 0..512 {
            let y = (std::f64::consts::PI * (j as f64 + 0.5) / 512.0 - std::f64::consts::FRAC_PI_2).tan();
            let v = ev(f, th, y) - pv * ev(s, th, y);
            worst = worst.min(v);
        }
    }
    worst
}

#[test]
fn criterion_05_separated_lower_bound() {
    let f = poly("y^2 + 1 - x1");
    let s = s_poly::<f64>(1);
    let sc = CylinderPoly::from_univariate(&s);
    let bound = separated_lower_bound(&f, &s, &EnvelopeConfig::default()).unwrap();
    let got = grid_min(&f, &sc, &bound.p_sq);
    let reference = circle("(1 - x1)^2/4");
    let ref_min = grid_min(&f, &sc, &reference);
    let nontrivial = bound.p_sq.max_coeff() > 0.0;
    let ok = got >= -1e-9 && ref_min >= -1e-9 && nontrivial;
    report(5, ok, format!("grid min with returned p² {got:.2e}, with (1−x1)²/4 {ref_min:.2e}"));
}

#[test]
fn criterion_06_end_to_end_corpus() {
    let cfg = PipelineConfig::default();
    let mut lines = Vec::new();
    let mut ok = true;
    for (text, f) in corpus() {
        let start = Instant::now();
        let outcome = theorem2_certify(&f, &cfg).and_then(|c| verify_certificate(&f, &c, VerifyMode::Interval).map(|r| (c, r)));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok((c, r)) => {
                let good = r.passed() && r.identity_residual <= 1e-6 && secs <= 60.0;
                ok &= good;
                lines.push(format!("[{text}: {} terms, residual {:.1e}, {secs:.1} s{}]", c.terms.len(), r.identity_residual, if good { "" } else { " NOT OK" }));
            }
            Err(e) => {
                ok = false;
                lines.push(format!("[{text}: error {e}]"));
            }
        }
    }
    report(6, ok, lines.join(" "));
}

#[test]
fn criterion_07_negativity_soundness() {
    let mut ok = true;
    let mut lines = Vec::new();
    for text in ["y^2 - x1", "-1", "x1*y^2"] {
        let f = poly(text);
        let w = check(&f, None);
        let value = w.map(|w| ev(&f, w.angle, w.y));
        let witness_ok = value.is_some_and(|v| v < 0.0);
        let mut child = Command::new(env!("CARGO_BIN_EXE_cylsos"))
            .args(["certify", "-"])
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
        let code = child.wait().unwrap().code();
        ok &= witness_ok && code == Some(1);
        lines.push(format!("[{text}: f(witness) = {:.3e}, certify exit {code:?}]", value.unwrap_or(f64::NAN)));
    }
    report(7, ok, lines.join(" "));
}

#[test]
fn criterion_08_preorder_on_an_arc() {
    let f = poly("1 + x1*y^2");
    let h = circle("x1");
    let cert = certify_preorder(&f, &h, &PipelineConfig::default()).unwrap();
    let r = verify_certificate(&f, &cert, VerifyMode::Interval).unwrap();
    let shape = cert.generators.len() == 2 && cert.terms.iter().any(|t| t.multiplier == 1);
    let dc = expand_double_cover(&[(CylinderPoly::<Rational>::one(), parse_poly("y").unwrap())]);
    let cover_ok = dc.g0 == CylinderPoly::one() && dc.g1 == parse_poly("y^2").unwrap();
    let ok = r.passed() && r.identity_residual <= 1e-8 && shape && cover_ok;
    report(8, ok, format!("residual {:.1e}, σ1 used {shape}, double cover (1, y²) {cover_ok}", r.identity_residual));
}

#[test]
fn criterion_09_bounded_remainder_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let rho = 0.5;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut all_verified = true;
    let mut errors = Vec::new();
    for _ in 0..10 {
        // F = Σ q_k² with q_k of y-degree 2 and trig degree 1
        let mut big_f = CylinderPoly::zero();
        for _ in 0..3 {
            let coeffs: Vec<CirclePoly<f64>> = (0..=2)
                .map(|_| {
                    CirclePoly::from_trig(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], &[0.0, rng.gen_range(-1.0..1.0)])
                })
                .collect();
            let q = CylinderPoly::new(coeffs);
            big_f = &big_f + &q.square();
        }
        let r = match bounded_remainder_sos(&big_f, &CirclePoly::constant(rho), 2, &SolverConfig::default()) {
            Ok(r) => r,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        for bi in &r.b {
            for k in 0..1024 {
                worst_excess = worst_excess.max(evc(bi, TAU * k as f64 / 1024.0).abs() - rho);
            }
        }
        let mut g_target = big_f.clone();
        for (i, bi) in r.b.iter().enumerate() {
            g_target = &g_target - &CylinderPoly::monomial(bi.clone(), i);
        }
        let mut cert = SosCertificate::new(g_target.clone(), false);
        for w in &r.g.squares {
            cert.push(0, w.weight, w.square.clone(), Provenance::Gram);
        }
        all_verified &= verify_certificate(&g_target, &cert, VerifyMode::Interval).unwrap().passed();
    }
    let infeasible = matches!(
        bounded_remainder_sos(&CylinderPoly::y(), &CirclePoly::constant(0.5), 0, &SolverConfig::default()),
        Err(Error::Infeasible { .. })
    );
    let ok = errors.is_empty() && worst_excess <= 1e-8 && all_verified && infeasible;
    report(
        9,
        ok,
        format!("max |b_i| − ρ = {worst_excess:.1e}, g verified {all_verified}, F=y reported infeasible {infeasible}, errors {errors:?}"),
    );
}

/// Adds `delta` to one coefficient `(a, b, l)` of `f`.
fn bump<T: cylinder_sos::Scalar>(f: &CylinderPoly<T>, (a, b, l): (usize, usize, usize), delta: T) -> CylinderPoly<T> {
    let mono = if b == 0 {
        CirclePoly::new(UnivariatePoly::monomial(delta, a), UnivariatePoly::zero())
    } else {
        CirclePoly::new(UnivariatePoly::zero(), UnivariatePoly::monomial(delta, a))
    };
    f + &CylinderPoly::monomial(mono, l)
}

fn pick<T: Clone>(rng: &mut ChaCha8Rng, v: &[T]) -> T {
    v[rng.gen_range(0..v.len())].clone()
}

#[test]
fn criterion_10_verifier_fuzzing() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cfg = PipelineConfig::default();
    let float_certs: Vec<SosCertificate<f64>> = corpus()
        .iter()
        .map(|(_, f)| theorem2_certify(f, &cfg).unwrap())
        .collect();
    let exact_certs: Vec<SosCertificate<Rational>> = ["y^2 + 1", "y^4 + 1", "y^2 + 2 + x1", "(y + x1)^2 + 1"]
        .iter()
        .map(|t| certify_exact(&parse_poly(t).unwrap(), &cfg).unwrap())
        .collect();
    let mut clean_ok = float_certs.iter().all(|c| verify_certificate(&c.target, c, VerifyMode::Interval).unwrap().passed());
    clean_ok &= exact_certs.iter().all(|c| verify_certificate(&c.target, c, VerifyMode::Exact).unwrap().passed());
    let mut accepted = 0;
    let trials = 1000;
    for k in 0..trials {
        let magnitude = 10f64.powf(rng.gen_range(-5.0..-2.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let passed = if k % 2 == 0 {
            // float certificate: one coefficient of the asserted target
            let cert = pick(&mut rng, &float_certs);
            let exps: Vec<_> = cert.target.terms().iter().map(|&(_, a, b, l)| (a, b, l)).collect();
            let mut bad = cert.clone();
            bad.target = bump(&cert.target, pick(&mut rng, &exps), magnitude);
            verify_certificate(&bad.target, &bad, VerifyMode::Interval).unwrap().passed()
        } else {
            // exact certificate: one coefficient of the target or of a square
            let cert = pick(&mut rng, &exact_certs);
            let delta = Rational::from_float(magnitude).unwrap();
            let mut bad = cert.clone();
            if rng.gen_bool(0.5) {
                let exps: Vec<_> = cert.target.terms().iter().map(|&(_, a, b, l)| (a, b, l)).collect();
                bad.target = bump(&cert.target, pick(&mut rng, &exps), delta);
            } else {
                let j = rng.gen_range(0..bad.terms.len());
                let exps: Vec<_> = bad.terms[j].square.terms().iter().map(|&(_, a, b, l)| (a, b, l)).collect();
                bad.terms[j].square = bump(&bad.terms[j].square, pick(&mut rng, &exps), delta);
            }
            verify_certificate(&bad.target, &bad, VerifyMode::Exact).unwrap().passed()
        };
        accepted += passed as usize;
    }
    report(10, clean_ok && accepted == 0, format!("{trials} perturbations, {accepted} accepted, unperturbed pass {clean_ok}"));
}
