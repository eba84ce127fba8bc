mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use smoothability::examples_search::{
    canonical_sign, find_characteristic, find_orthogonal_square2_system,
    find_orthogonal_square2_system_in, SearchBox, SearchMode,
};
use smoothability::isometry::reflection;
use smoothability::lattice::{Lattice, Summand, Vector};

use common::{random_lattice, rng};

const ALL: SearchMode = SearchMode::All { limit: None };

fn box_vectors(n: usize, bound: i64) -> Vec<Vector> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vector| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn small_lattice(seed: u64) -> Lattice {
    let mut r = rng(seed);
    loop {
        let l = random_lattice(&mut r, false);
        if l.rank() <= 6 {
            return l;
        }
    }
}

fn c_e1e2() -> (Lattice, Vector, Vector, Vector) {
    let l = Lattice::diagonal(2, 11).unwrap();
    let c = vec![3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1];
    let e1 = vec![0, 2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0];
    let e2 = vec![6, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 1];
    (l, c, e1, e2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn characteristic_search_is_complete(seed in any::<u64>(), bound in 1i64..=2, lo in -6i64..=2, width in 0i64..6) {
        let l = small_lattice(seed);
        let hi = lo + width;
        let found = find_characteristic(&l, bound, (lo, hi)).unwrap();
        let naive: BTreeSet<Vector> = box_vectors(l.rank(), bound)
            .into_iter()
            .filter(|v| l.is_characteristic(v).unwrap())
            .filter(|v| (lo..=hi).contains(&l.square(v).unwrap()))
            .map(|v| canonical_sign(&v))
            .collect();
        prop_assert_eq!(found, naive.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn square2_search_is_complete_and_fixes_c(seed in any::<u64>(), bound in 1i64..=2) {
        let l = small_lattice(seed);
        prop_assume!(l.b_plus() >= 1);
        let mut r = rng(seed ^ 0x5eed);
        let c = common::random_characteristic(&mut r, &l, 1);
        let found = find_orthogonal_square2_system(&l, &c, 1, bound, ALL).unwrap();
        let naive: BTreeSet<Vector> = box_vectors(l.rank(), bound)
            .into_iter()
            .filter(|v| l.square(v).unwrap() == 2 && l.inner(v, &c).unwrap() == 0)
            .map(|v| canonical_sign(&v))
            .collect();
        let got: Vec<Vector> = found.iter().map(|s| s[0].clone()).collect();
        prop_assert_eq!(got, naive.into_iter().collect::<Vec<_>>());
        for system in &found {
            for e in system {
                prop_assert_eq!(reflection(&l, e).unwrap().apply(&c), c.clone());
            }
        }
    }

    #[test]
    fn pairs_are_orthogonal_and_increasing(seed in any::<u64>(), minus in 0usize..4) {
        let l = Lattice::diagonal(2 + (seed % 2) as usize, minus).unwrap();
        let c = common::random_characteristic(&mut rng(seed), &l, 1);
        for system in find_orthogonal_square2_system(&l, &c, 2, 1, ALL).unwrap() {
            prop_assert!(system[0] < system[1]);
            prop_assert_eq!(l.inner(&system[0], &system[1]).unwrap(), 0);
        }
    }
}

#[test]
fn finds_the_printed_characteristic_vector() {
    let (l, c, _, _) = c_e1e2();
    let found = find_characteristic(&l, 3, (-8, 0)).unwrap();
    assert!(found.contains(&c));
    assert_eq!(l.square(&c).unwrap(), -1);
    for v in &found {
        assert!(l.is_characteristic(v).unwrap());
        assert!((-8..=0).contains(&l.square(v).unwrap()));
    }
}

#[test]
fn recovers_the_printed_pair() {
    let (l, c, e1, e2) = c_e1e2();
    let mut lo = vec![0; 13];
    let mut hi = vec![2; 13];
    hi[0] = 6;
    hi[1] = 6;
    lo[0] = 0;
    let sbox = SearchBox { lo, hi };
    let systems = find_orthogonal_square2_system_in(&l, &c, 2, &sbox, ALL).unwrap();
    assert!(systems.contains(&vec![e1, e2]));
    for s in systems.iter().take(500) {
        for e in s {
            assert_eq!(reflection(&l, e).unwrap().apply(&c), c);
        }
    }
}

#[test]
fn diagonal_odd_bound_one_is_all_signs() {
    let l = Lattice::diagonal(2, 3).unwrap();
    let found = find_characteristic(&l, 1, (-3, 1)).unwrap();
    // every coordinate is ±1, so the square is always 2 - 3 = -1
    assert_eq!(found.len(), 16);
    assert!(found.iter().all(|v| v[0] == 1 && v.iter().all(|x| x.abs() == 1)));
}

#[test]
fn even_lattice_with_e8() {
    let l = Lattice::new(vec![Summand::e8(-1, 1), Summand::hyperbolic(1)]).unwrap();
    let found = find_characteristic(&l, 1, (0, 0)).unwrap();
    assert!(found.contains(&vec![0; 10]));
}

#[test]
fn first_mode_stops_at_one() {
    let (l, c, _, _) = c_e1e2();
    let got = find_orthogonal_square2_system(&l, &c, 1, 2, SearchMode::First).unwrap();
    assert_eq!(got.len(), 1);
    let limited = find_orthogonal_square2_system(&l, &c, 1, 1, SearchMode::All { limit: Some(3) }).unwrap();
    assert!(limited.len() <= 3);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let l = Lattice::diagonal(3, 6).unwrap();
    let c = vec![1; 9];
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| find_orthogonal_square2_system(&l, &c, 3, 2, ALL).unwrap())
    };
    let single = run(1);
    assert!(!single.is_empty());
    assert_eq!(single, run(4));
    let limited = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                find_orthogonal_square2_system(&l, &c, 3, 2, SearchMode::All { limit: Some(7) }).unwrap()
            })
    };
    assert_eq!(limited(4), single[..7.min(single.len())].to_vec());
}
