#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smoothability::isometry::{reflection, Isometry};
use smoothability::lattice::{Lattice, Summand, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small random unimodular lattice assembled from diagonal, hyperbolic
/// and (optionally) E8 pieces.
pub fn random_lattice(r: &mut ChaCha8Rng, allow_e8: bool) -> Lattice {
    let mut summands = Vec::new();
    let plus = r.gen_range(0..3);
    let minus = r.gen_range(0..4);
    if plus + minus > 0 {
        let mut entries = vec![1; plus];
        entries.extend(std::iter::repeat_n(-1, minus));
        summands.push(Summand::diag(entries));
    }
    let h = r.gen_range(0..3);
    if h > 0 || summands.is_empty() {
        summands.push(Summand::hyperbolic(h.max(1)));
    }
    if allow_e8 && r.gen_bool(0.3) {
        summands.push(Summand::e8(if r.gen_bool(0.5) { 1 } else { -1 }, 1));
    }
    Lattice::new(summands).expect("unimodular pieces")
}

/// A random vector with entries in `-1..=1` whose reflection is integral,
/// optionally orthogonal to `avoid`.
pub fn random_root(r: &mut ChaCha8Rng, l: &Lattice, orth: &[Vector]) -> Option<Vector> {
    let n = l.rank();
    for _ in 0..400 {
        let e: Vector = (0..n).map(|_| r.gen_range(-1..=1)).collect();
        let sq = l.square(&e).unwrap();
        if ![-2, -1, 1, 2].contains(&sq) {
            continue;
        }
        if orth.iter().all(|c| l.inner(c, &e).unwrap() == 0) {
            return Some(e);
        }
    }
    None
}

/// A product of random reflections: an integral isometry of `l`.
pub fn random_isometry(r: &mut ChaCha8Rng, l: &Lattice, reflections: usize) -> Isometry {
    let mut g = Isometry::identity(l.rank());
    for _ in 0..reflections {
        if let Some(e) = random_root(r, l, &[]) {
            g = reflection(l, &e).unwrap().compose(&g);
        }
    }
    g
}

/// `g f g⁻¹`.
pub fn conjugate(g: &Isometry, f: &Isometry) -> Isometry {
    g.compose(f).compose(&g.inverse())
}

/// A random characteristic vector with entries bounded by about `2 * spread + 1`.
pub fn random_characteristic(r: &mut ChaCha8Rng, l: &Lattice, spread: i64) -> Vector {
    l.characteristic_residue()
        .iter()
        .map(|&w| i64::from(w) + 2 * r.gen_range(-spread..=spread))
        .collect()
}
