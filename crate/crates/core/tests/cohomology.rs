use std::collections::BTreeMap;

use proptest::prelude::*;
use smoothability::char_classes::{
    sw_biproj, sw_lens, sw_rp, sw_torus, CohomClass, RingDescriptor,
};
use smoothability::invariant_subspace::{CyclicMults, EpsMatrix, KleinPQRS};

fn binom_odd(n: usize, k: usize) -> bool {
    // Lucas: C(n, k) is odd iff the bits of k are a subset of those of n
    k <= n && (n & k) == k
}

/// Determinant over F2 by the Leibniz expansion.
fn leibniz_det_f2(m: &[Vec<u8>]) -> u8 {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    let n = m.len();
    perms(n).iter().map(|p| (0..n).map(|i| m[i][p[i]]).product::<u8>()).sum::<u8>() % 2
}

fn ring_strategy() -> impl Strategy<Value = RingDescriptor> {
    prop_oneof![
        (0usize..7).prop_map(|d| RingDescriptor::RP { d }),
        (0usize..4, prop::sample::select(vec![2u64, 4, 6, 8]))
            .prop_map(|(u, k)| RingDescriptor::Lens { u, k }),
        (0usize..5).prop_map(|d| RingDescriptor::Torus { d }),
        (0usize..4, 0usize..4).prop_map(|(d1, d2)| RingDescriptor::BiProj { d1, d2 }),
    ]
}

fn class_in(ring: RingDescriptor, bits: &[bool]) -> CohomClass {
    let coeffs = (0..ring.basis_len()).map(|i| bits[i % bits.len()]).collect();
    CohomClass::from_coeffs(ring, coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn multiplication_is_commutative_and_associative(
        ring in ring_strategy(),
        a in proptest::collection::vec(any::<bool>(), 1..17),
        b in proptest::collection::vec(any::<bool>(), 1..17),
        c in proptest::collection::vec(any::<bool>(), 1..17),
    ) {
        let (a, b, c) = (class_in(ring, &a), class_in(ring, &b), class_in(ring, &c));
        prop_assert_eq!(a.multiply(&b).unwrap(), b.multiply(&a).unwrap());
        prop_assert_eq!(
            a.multiply(&b).unwrap().multiply(&c).unwrap(),
            a.multiply(&b.multiply(&c).unwrap()).unwrap()
        );
        // distributivity over addition
        prop_assert_eq!(
            a.multiply(&b.add(&c).unwrap()).unwrap(),
            a.multiply(&b).unwrap().add(&a.multiply(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn whitney_rp(d in 0usize..9, split in any::<(u8, u8)>()) {
        let v = split.0 as usize % (d + 1);
        let v1 = split.1 as usize % (v + 1);
        let v2 = v - v1;
        let whole = sw_rp(d, d - v, v).unwrap();
        let parts = sw_rp(d, d - v1, v1).unwrap().multiply(&sw_rp(d, d - v2, v2).unwrap()).unwrap();
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn whitney_lens(
        u in 0usize..4,
        k in prop::sample::select(vec![4u64, 6, 8]),
        labels in proptest::collection::vec(1u64..4, 0..4),
        cut in 0usize..4,
    ) {
        // R- plus up to u rotation planes, padded with trivial summands
        let half = k / 2;
        let rot: Vec<u64> = labels.into_iter().map(|j| 1 + (j - 1) % (half - 1)).take(u).collect();
        let mults = |sign: usize, planes: &[u64]| {
            let mut m = BTreeMap::new();
            for &j in planes {
                *m.entry(j).or_insert(0) += 1;
            }
            let used = sign + 2 * planes.len();
            CyclicMults::new(k, 2 * u + 1 - used, sign, m)
        };
        let cut = cut.min(rot.len());
        let whole = sw_lens(u, k, &mults(1, &rot)).unwrap();
        let left = sw_lens(u, k, &mults(1, &rot[..cut])).unwrap();
        let right = sw_lens(u, k, &mults(0, &rot[cut..])).unwrap();
        prop_assert_eq!(whole, left.multiply(&right).unwrap());
    }

    #[test]
    fn whitney_torus(d in 1usize..6, bits in proptest::collection::vec(0u8..2, 25), cut in 0usize..6) {
        let cut = cut.min(d);
        let full: Vec<Vec<u8>> = (0..d).map(|i| (0..d).map(|j| bits[i * 5 + j]).collect()).collect();
        let masked = |keep: &dyn Fn(usize) -> bool| EpsMatrix {
            eps: full.iter().map(|row| row.iter().enumerate().map(|(j, &b)| if keep(j) { b } else { 0 }).collect()).collect(),
        };
        let whole = sw_torus(&EpsMatrix { eps: full.clone() }).unwrap();
        let left = sw_torus(&masked(&|j| j < cut)).unwrap();
        let right = sw_torus(&masked(&|j| j >= cut)).unwrap();
        prop_assert_eq!(whole, left.multiply(&right).unwrap());
    }

    #[test]
    fn whitney_biproj(q in 0usize..3, r in 0usize..3, s in 0usize..3, q2 in 0usize..3, r2 in 0usize..3, s2 in 0usize..3, d1 in 0usize..13) {
        let total = q + r + s + q2 + r2 + s2;
        let d1 = d1 % (total + 1);
        let d2 = total - d1;
        let pad = |p: usize, q: usize, r: usize, s: usize| KleinPQRS { p, q, r, s };
        let whole = sw_biproj(d1, d2, &pad(0, q + q2, r + r2, s + s2)).unwrap();
        let left = sw_biproj(d1, d2, &pad(q2 + r2 + s2, q, r, s)).unwrap();
        let right = sw_biproj(d1, d2, &pad(q + r + s, q2, r2, s2)).unwrap();
        prop_assert_eq!(whole, left.multiply(&right).unwrap());
    }

    #[test]
    fn torus_top_is_a_determinant_random(d in 4usize..6, bits in proptest::collection::vec(0u8..2, 25)) {
        let eps: Vec<Vec<u8>> = (0..d).map(|i| (0..d).map(|j| bits[i * 5 + j]).collect()).collect();
        let e = EpsMatrix { eps: eps.clone() };
        prop_assert_eq!(sw_torus(&e).unwrap().top_component(), leibniz_det_f2(&eps));
        prop_assert_eq!(e.det_f2(), Some(leibniz_det_f2(&eps)));
    }
}

#[test]
fn rp_top_is_one_iff_v_equals_d() {
    for d in 0..=8 {
        for v in 0..=d {
            let top = sw_rp(d, d - v, v).unwrap().top_component();
            assert_eq!(top == 1, binom_odd(v, d), "d = {d}, v = {v}");
            assert_eq!(top == 1, v == d, "d = {d}, v = {v}");
        }
    }
}

#[test]
fn lens_relation() {
    for k in [2u64, 4, 6, 8, 10, 12] {
        let ring = RingDescriptor::lens(2, k).unwrap();
        let one = CohomClass::one(ring);
        let sq = one.add(&CohomClass::alpha(ring)).unwrap().pow(2);
        let expected = if (k / 2) % 2 == 1 { one.add(&CohomClass::beta(ring)).unwrap() } else { one };
        assert_eq!(sq, expected, "k = {k}");
    }
}

#[test]
fn lens_top_is_the_product_of_labels() {
    for k in [4u64, 6, 8] {
        let half = k / 2;
        for u in 0..=3usize {
            // every multiset of u labels from 1..half
            let mut labels = vec![1u64; u];
            loop {
                let mut m = BTreeMap::new();
                for &j in &labels {
                    *m.entry(j).or_insert(0) += 1;
                }
                let w = sw_lens(u, k, &CyclicMults::new(k, 0, 1, m)).unwrap();
                let expected = labels.iter().all(|j| j % 2 == 1);
                assert_eq!(w.top_component() == 1, expected, "k = {k}, labels = {labels:?}");
                // advance to the next non-decreasing tuple
                let Some(pos) = (0..u).rev().find(|&i| labels[i] + 1 < half) else { break };
                let next = labels[pos] + 1;
                for l in labels[pos..].iter_mut() {
                    *l = next;
                }
            }
        }
    }
}

#[test]
fn torus_top_is_a_determinant_exhaustive() {
    for d in 1..=3usize {
        for mask in 0u32..(1 << (d * d)) {
            let eps: Vec<Vec<u8>> =
                (0..d).map(|i| (0..d).map(|j| ((mask >> (i * d + j)) & 1) as u8).collect()).collect();
            let top = sw_torus(&EpsMatrix { eps: eps.clone() }).unwrap().top_component();
            assert_eq!(top, leibniz_det_f2(&eps), "eps = {eps:?}");
        }
    }
}

#[test]
fn biproj_top_matches_the_binomial_expansion() {
    for total in 0..=8usize {
        for p in 0..=total {
            for q in 0..=total - p {
                for r in 0..=total - p - q {
                    let s = total - p - q - r;
                    for d1 in 0..=total {
                        let d2 = total - d1;
                        let w = sw_biproj(d1, d2, &KleinPQRS { p, q, r, s }).unwrap();
                        // top part of x^q y^r (x + y)^s is C(s, d1 - q) x^d1 y^d2
                        let expected = p == 0 && d1 >= q && d2 >= r && binom_odd(s, d1 - q);
                        assert_eq!(w.top_component() == 1, expected, "pqrs = {p},{q},{r},{s}, split = {d1},{d2}");
                    }
                }
            }
        }
    }
}
