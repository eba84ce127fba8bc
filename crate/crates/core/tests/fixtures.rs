use smoothability::examples_search::{build_example, reproduce, FixtureError, Params, EXAMPLE_IDS};
use smoothability::invariant_subspace::{CyclicMults, InvolutionUV, KleinPQRS, RepDecomposition};
use smoothability::obstruction::{regenerate_w_top, CheckOptions, Conclusion, Verdict};
use std::collections::BTreeMap;

fn params(pairs: &[(&str, i64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn verdict(id: &str, p: &[(&str, i64)]) -> (Conclusion, Verdict) {
    let (fx, v) = reproduce(id, &params(p), &CheckOptions::default()).unwrap();
    (fx.expected, v.unwrap())
}

fn assert_certified(v: &Verdict) {
    if v.conclusion == Conclusion::Obstructed {
        assert_eq!(v.invariants.w_top, Some(1));
        assert_eq!(regenerate_w_top(v), Some(1));
    }
}

#[test]
fn every_fixture_but_printed_order4_reproduces_its_conclusion() {
    for id in EXAMPLE_IDS.iter().filter(|&&id| id != "order4") {
        let (expected, v) = verdict(id, &[]);
        assert_eq!(v.conclusion, expected, "{id}\n{}", v.certificate);
        assert_certified(&v);
    }
}

#[test]
fn printed_order4_data_fail_the_order_hypothesis() {
    let (expected, v) = verdict("order4", &[]);
    assert_eq!(expected, Conclusion::Obstructed);
    assert_eq!(v.conclusion, Conclusion::HypothesisFailed);
    assert!(!v.hypothesis("order").unwrap().passed());
    assert_eq!((v.invariants.sigma, v.invariants.c_squared), (-9, -1));
}

#[test]
fn corrected_order4_witness() {
    let (expected, v) = verdict("order4", &[("corrected", 1)]);
    assert_eq!(v.conclusion, expected);
    let i = &v.invariants;
    assert_eq!((i.sigma, i.c_squared, i.c_squared_minus_sigma), (-9, -1, 8));
    let mults = CyclicMults::new(4, 0, 1, BTreeMap::from([(1, 1)]));
    assert_eq!(i.decomposition, Some(RepDecomposition::Cyclic(mults.clone())));
    assert_eq!(mults.to_string(), "ℝ₋ ⊕ ℂ₁");
    assert_eq!(i.base.as_deref(), Some("L^3(4)"));
    assert_eq!(i.w_top, Some(1));
}

#[test]
fn spin_and_z2k_invariants() {
    let (_, v) = verdict("z2-spin", &[("a", 4), ("b", 1)]);
    assert_eq!(v.conclusion, Conclusion::Obstructed);
    assert_eq!((v.invariants.sigma, v.invariants.c_squared), (-16, 0));
    assert_eq!(v.invariants.decomposition, Some(RepDecomposition::Involution(InvolutionUV { u: 0, v: 4 })));

    let (_, v) = verdict("z2k", &[("a", 3), ("k", 3), ("b", 1)]);
    assert_eq!(v.conclusion, Conclusion::Obstructed);
    assert_eq!(v.invariants.sigma, -48);
    let mults = CyclicMults::new(6, 0, 3, BTreeMap::new());
    assert_eq!(v.invariants.decomposition, Some(RepDecomposition::Cyclic(mults)));
}

#[test]
fn commuting_pair_and_its_flip() {
    let (_, v) = verdict("commuting-pair", &[]);
    assert_eq!(v.conclusion, Conclusion::Obstructed);
    match v.invariants.decomposition {
        Some(RepDecomposition::Eps(ref e)) => {
            assert_eq!(e.eps, vec![vec![1, 0], vec![0, 1]]);
            assert_eq!(e.det_f2(), Some(1));
        }
        ref other => panic!("unexpected decomposition {other:?}"),
    }
    let (expected, v) = verdict("commuting-pair", &[("flip", 1)]);
    assert_eq!(expected, Conclusion::Inconclusive);
    assert_eq!(v.conclusion, Conclusion::Inconclusive);
}

#[test]
fn klein_default_witnesses_split_three_nine() {
    let (_, v) = verdict("klein", &[("a", 3), ("b", 3), ("c", 1)]);
    assert_eq!(v.conclusion, Conclusion::Obstructed);
    let i = &v.invariants;
    assert_eq!((i.sigma, i.c_squared), (-33, -9));
    assert_eq!(i.c_squared_minus_sigma.rem_euclid(16), 8);
    assert_eq!(i.decomposition, Some(RepDecomposition::Klein(KleinPQRS { p: 0, q: 3, r: 3, s: 6 })));
    assert_eq!(i.split, Some([3, 9]));
}

#[test]
fn parameter_sweeps() {
    for a in 1..=5 {
        for b in 1..=2 {
            let (e, v) = verdict("z2-spin", &[("a", a), ("b", b)]);
            assert_eq!(v.conclusion, e, "z2-spin a={a} b={b}");
            assert_certified(&v);
        }
    }
    for (a, k, b) in [(1, 3, 1), (3, 3, 1), (5, 3, 1), (1, 5, 1), (3, 3, 2)] {
        let (e, v) = verdict("z2k", &[("a", a), ("k", k), ("b", b)]);
        assert_eq!(v.conclusion, e, "z2k a={a} k={k} b={b}");
        assert_certified(&v);
    }
    for (a, b, c) in [(1, 1, 1), (3, 1, 1), (1, 3, 1), (2, 2, 1), (3, 3, 2)] {
        let (e, v) = verdict("klein", &[("a", a), ("b", b), ("c", c)]);
        assert_eq!(v.conclusion, e, "klein a={a} b={b} c={c}\n{}", v.certificate);
        assert_certified(&v);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    for (id, p) in [
        ("z2k", params(&[("a", 2)])),
        ("z2k", params(&[("k", 4)])),
        ("z2-spin", params(&[("b", 0)])),
        ("klein", params(&[("c", 0)])),
        ("order4", params(&[("corrected", 2)])),
        ("klein", params(&[("d", 1)])),
    ] {
        assert!(matches!(build_example(id, &p), Err(FixtureError::InvalidParams(_))), "{id} {p:?}");
    }
    assert!(matches!(build_example("cp2", &Params::new()), Err(FixtureError::UnknownId(_))));
}
