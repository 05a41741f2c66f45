use nevlab::cli::combine_exit_codes;
use nevlab::cli::expr::parse_exp_poly;
use nevlab::nevanlinna::{counting_from_atlas, counting_integral};
use nevlab::theorems::{evaluate_degeneracy_criterion, MultiplicityProfile, Verdict};
use nevlab::zero_locator::{locate_zeros_analytic, locate_zeros_polynomial, zero_order};
use nevlab::{wronskian, ExpPoly, UnivariatePoly, C64};
use proptest::prelude::*;

fn complex(bound: f64) -> impl Strategy<Value = C64> {
    (-bound..bound, -bound..bound).prop_map(|(re, im)| C64::new(re, im))
}

fn poly(max_deg: usize) -> impl Strategy<Value = UnivariatePoly> {
    prop::collection::vec(complex(2.0), 1..=max_deg + 1).prop_map(UnivariatePoly::new)
}

/// Sums of at most three terms with small integer frequencies.
fn exp_poly() -> impl Strategy<Value = ExpPoly> {
    let freq = (-2i32..=2, -1i32..=1).prop_map(|(a, b)| C64::new(a as f64, b as f64));
    prop::collection::vec((freq, poly(2)), 1..=3).prop_map(ExpPoly::from_terms)
}

fn close(a: C64, b: C64, scale: f64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_operations_agree_with_evaluation(a in exp_poly(), b in exp_poly(), c in exp_poly(), z in complex(1.5)) {
        let (va, vb, vc) = (a.evaluate(z), b.evaluate(z), c.evaluate(z));
        let scale = (va.norm() + 1.0) * (vb.norm() + vc.norm() + 1.0);
        prop_assert!(close((&a * &(&b + &c)).evaluate(z), va * (vb + vc), scale));
        prop_assert!(close((&a - &b).evaluate(z), va - vb, scale));
    }

    #[test]
    fn derivative_obeys_leibniz(a in exp_poly(), b in exp_poly(), z in complex(1.0)) {
        let lhs = (&a * &b).differentiate().evaluate(z);
        let rhs = (&a.differentiate() * &b + &a * &b.differentiate()).evaluate(z);
        prop_assert!(close(lhs, rhs, lhs.norm().max(rhs.norm())));
    }

    #[test]
    fn wronskian_is_alternating(a in exp_poly(), b in exp_poly(), z in complex(1.0)) {
        let w = wronskian(&[a.clone(), b.clone()]).evaluate(z);
        let s = wronskian(&[b, a]).evaluate(z);
        prop_assert!(close(w, -s, w.norm()));
    }

    #[test]
    fn display_round_trips(a in exp_poly(), z in complex(1.0)) {
        let parsed = parse_exp_poly(&a.to_string()).expect("printed form parses");
        let (x, y) = (a.evaluate(z), parsed.evaluate(z));
        prop_assert!(close(x, y, x.norm()), "{} -> {}", a, parsed);
    }

    #[test]
    fn jensen_route_matches_direct_count(
        roots in prop::collection::vec(complex(3.0), 1..6),
        r in 0.5f64..6.0,
        cap in prop::option::of(1u32..3),
    ) {
        let p = UnivariatePoly::from_roots(&roots);
        let atlas = locate_zeros_polynomial(&p, 7.0).unwrap();
        let a = counting_from_atlas(&atlas, r, cap);
        let b = counting_integral(&atlas, r, cap);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn backends_agree_on_polynomials(roots in prop::collection::vec(complex(2.0), 1..5)) {
        let p = UnivariatePoly::from_roots(&roots);
        let exact = locate_zeros_polynomial(&p, 4.0).unwrap();
        let analytic = locate_zeros_analytic(&ExpPoly::polynomial(p), 4.0).unwrap();
        prop_assert_eq!(exact.total_multiplicity(), analytic.total_multiplicity());
        prop_assert_eq!(exact.total_multiplicity(), roots.len() as u64);
    }

    #[test]
    fn atlas_is_sorted(roots in prop::collection::vec(complex(2.0), 1..6)) {
        let atlas = locate_zeros_polynomial(&UnivariatePoly::from_roots(&roots), 4.0).unwrap();
        for w in atlas.zeros.windows(2) {
            prop_assert_ne!(zero_order(&w[0].location, &w[1].location), std::cmp::Ordering::Greater);
        }
    }

    #[test]
    fn degeneracy_thresholds_nest(ls in prop::collection::vec(prop::option::of(1u32..20), 3..6)) {
        let q = ls.len() - 1;
        let out = evaluate_degeneracy_criterion(&MultiplicityProfile::new(ls), q).unwrap();
        prop_assert!(!out.below_proof || out.below_statement);
        prop_assert_eq!(out.verdict == Verdict::DegeneracyImplied, out.below_proof);
        prop_assert_eq!(out.flagged, out.verdict == Verdict::ThresholdDependent);
    }

    #[test]
    fn exit_codes_aggregate(codes in prop::collection::vec(prop::sample::select(vec![0, 1, 2]), 0..8)) {
        let agg = combine_exit_codes(codes.clone());
        let expected = if codes.contains(&1) { 1 } else if codes.contains(&2) { 2 } else { 0 };
        prop_assert_eq!(agg, expected);
    }
}
