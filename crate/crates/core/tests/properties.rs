use cylinder_sos::cylinder::CylinderPoly;
use cylinder_sos::pipeline::{Provenance, SosCertificate};
use cylinder_sos::verify::sparse::{Coeff, Interval, Sparse};
use cylinder_sos::verify::{self, format_poly, parse_poly, CertificateFile, VerifyMode};
use cylinder_sos::Rational;
use num_bigint::BigInt;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn poly(max_y: usize) -> impl Strategy<Value = CylinderPoly<Rational>> {
    prop::collection::vec((rational(), 0usize..4, 0usize..2, 0..=max_y), 1..8).prop_map(|terms| {
        let mut s = Sparse::zero();
        for (c, a, b, l) in terms {
            s.add_term((a, b, l), c);
        }
        s.to_cylinder()
    })
}

fn certificate(squares: &[CylinderPoly<Rational>], weights: &[Rational]) -> SosCertificate<Rational> {
    let mut cert = SosCertificate::new(CylinderPoly::zero(), true);
    for (q, w) in squares.iter().zip(weights) {
        cert.push(0, w.clone(), q.clone(), Provenance::Gram);
    }
    cert.target = cert.sum();
    cert
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printed_polynomials_parse_back(f in poly(3)) {
        prop_assert_eq!(parse_poly(&format_poly(&f)).unwrap(), f);
    }

    #[test]
    fn certificate_files_round_trip(
        squares in prop::collection::vec(poly(2), 1..4),
        weights in prop::collection::vec((1i64..9, 1i64..9), 4),
    ) {
        let w: Vec<Rational> = weights.iter().map(|&(n, d)| Rational::new(n.into(), d.into())).collect();
        let cert = certificate(&squares, &w);
        let file = CertificateFile::from_certificate(&cert);
        let back = CertificateFile::from_json(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        let report = verify::verify_file(&file.to_json(), VerifyMode::Exact, 0.0).unwrap();
        prop_assert!(report.passed());
    }

    #[test]
    fn any_target_perturbation_is_caught_exactly(
        squares in prop::collection::vec(poly(2), 1..4),
        shift in rational().prop_filter("nonzero", |r| *r != Rational::from_integer(0.into())),
        at in (0usize..4, 0usize..2, 0usize..5),
    ) {
        let w = vec![Rational::from_integer(1.into()); squares.len()];
        let mut cert = certificate(&squares, &w);
        let mut s = Sparse::from_cylinder(&cert.target);
        s.add_term(at, shift);
        cert.target = s.to_cylinder();
        let report = verify::verify_certificate(&cert.target, &cert, VerifyMode::Exact).unwrap();
        prop_assert!(!report.passed());
    }

    #[test]
    fn interval_products_enclose_the_rational_result(a in rational(), b in rational(), c in rational()) {
        let (ia, ib, ic) = (Interval::enclose(&a), Interval::enclose(&b), Interval::enclose(&c));
        let exact = a * b + c;
        let got = ia.mul(&ib).add(&ic);
        let lo = Rational::from_float(got.lo).unwrap();
        let hi = Rational::from_float(got.hi).unwrap();
        prop_assert!(lo <= exact && exact <= hi, "{:?} misses {}", got, exact);
    }
}
