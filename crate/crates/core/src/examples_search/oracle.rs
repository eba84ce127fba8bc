//! An exact reference for the representation type of a finite order matrix.
//!
//! The characteristic polynomial is computed over ℚ and divided by cyclotomic
//! polynomials, which fixes how many eigenvalues of each exact order occur.
//! Within one Galois class the split into `ℂ_j` summands comes from character
//! sums over exact traces of powers, and the two counts must agree.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::invariant_subspace::CyclicMults;
use crate::isometry::{reflection, Isometry};
use crate::lattice::{Lattice, Vector};
use crate::{IntMatrix, QMatrix, Rational};

/// Allowed distance of a character sum from the nearest integer. The traces
/// are exact, so only the cosines carry rounding error.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("order must be even (got {0})")]
    OddOrder(u64),
    #[error("matrix does not satisfy M^{k} = I")]
    NotFiniteOrder { k: u64 },
    #[error("character sum for j = {j} is {value}, not a non-negative integer")]
    NotIntegral { j: u64, value: f64 },
    #[error("inconsistent decomposition: {0}")]
    Inconsistent(String),
}

/// Coefficients, constant term first.
pub type Poly = Vec<Rational>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

fn poly_divrem(num: &Poly, den: &Poly) -> (Poly, Poly) {
    let den = trim(den.clone());
    let dl = den.len() - 1;
    let lead = den[dl].clone();
    let mut rem = trim(num.clone());
    if rem.len() <= dl {
        return (vec![Rational::zero()], rem);
    }
    let mut quo = vec![Rational::zero(); rem.len() - dl];
    for i in (0..quo.len()).rev() {
        let coef = &rem[i + dl] / &lead;
        for (t, d) in den.iter().enumerate() {
            rem[i + t] -= &coef * d;
        }
        quo[i] = coef;
    }
    rem.truncate(dl.max(1));
    (trim(quo), trim(rem))
}

/// Characteristic polynomial `det(λI − M)` by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(m: &QMatrix) -> Poly {
    let n = m.nrows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut aux = QMatrix::zeros(n, n);
    for step in 1..=n {
        aux = (m * &aux).shift_diagonal(&-coeffs[n - step + 1].clone());
        let am = m * &aux;
        coeffs[n - step] = -am.trace() / Rational::from_integer((step as i64).into());
    }
    coeffs
}

/// The `d`-th cyclotomic polynomial.
pub fn cyclotomic(d: u64) -> Poly {
    let mut p: Poly = vec![Rational::zero(); d as usize + 1];
    p[0] = -Rational::one();
    p[d as usize] = Rational::one();
    for e in 1..d {
        if d % e == 0 {
            p = poly_divrem(&p, &cyclotomic(e)).0;
        }
    }
    p
}

fn is_identity(m: &QMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|r| (0..n).all(|c| m[(r, c)] == if r == c { Rational::one() } else { Rational::zero() }))
}

fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Multiplicities of `ℝ`, `ℝ₋` and `ℂ_j` (`0 < j < k/2`) in the real
/// representation generated by `m`, which must satisfy `m^k = I`.
pub fn oracle_rep_decomposition(m: &QMatrix, k: u64) -> Result<CyclicMults, OracleError> {
    if !m.is_square() {
        return Err(OracleError::NotSquare);
    }
    if k == 0 || k % 2 == 1 {
        return Err(OracleError::OddOrder(k));
    }
    let n = m.nrows();
    let mut traces = Vec::with_capacity(k as usize);
    let mut power = QMatrix::identity(n);
    for _ in 0..k {
        traces.push(power.trace());
        power = &power * m;
    }
    if !is_identity(&power) {
        return Err(OracleError::NotFiniteOrder { k });
    }

    // exact orders of eigenvalues: e_d copies of each primitive d-th root
    let mut rest = characteristic_polynomial(m);
    let mut e = BTreeMap::new();
    let mut covered = 0usize;
    for d in (1..=k).filter(|d| k % d == 0) {
        let phi = cyclotomic(d);
        let mut count = 0usize;
        loop {
            let (q, r) = poly_divrem(&rest, &phi);
            if !r.iter().all(Zero::is_zero) {
                break;
            }
            rest = q;
            count += 1;
        }
        covered += count * (phi.len() - 1);
        e.insert(d, count);
    }
    if covered != n {
        return Err(OracleError::Inconsistent(format!(
            "cyclotomic factors cover degree {covered} of {n}"
        )));
    }

    let half = k / 2;
    let mut mult = vec![0usize; half as usize + 1];
    for j in 0..=half {
        let value = traces
            .iter()
            .enumerate()
            .map(|(t, tr)| to_f64(tr) * (2.0 * PI * ((j * t as u64) % k) as f64 / k as f64).cos())
            .sum::<f64>()
            / k as f64;
        let rounded = value.round();
        if (value - rounded).abs() > ORACLE_TOLERANCE || rounded < 0.0 {
            return Err(OracleError::NotIntegral { j, value });
        }
        mult[j as usize] = rounded as usize;
    }

    for (&d, &count) in &e {
        let phi_d = cyclotomic(d).len() - 1;
        let from_chars: usize = match d {
            1 => mult[0],
            2 => mult[half as usize],
            _ => (1..half).filter(|&j| k / j.gcd(&k) == d).map(|j| 2 * mult[j as usize]).sum(),
        };
        if from_chars != count * phi_d {
            return Err(OracleError::Inconsistent(format!(
                "order {d}: characteristic polynomial gives {} eigenvalues, characters give {from_chars}",
                count * phi_d
            )));
        }
    }

    let m_d = (1..half).map(|j| (j, mult[j as usize])).collect();
    Ok(CyclicMults::new(k, mult[0], mult[half as usize], m_d))
}

/// A finite order isometry together with the exact matrix of its action on
/// one invariant positive definite subspace.
#[derive(Debug, Clone)]
pub struct CyclicInstance {
    pub lattice: Lattice,
    pub f: Isometry,
    pub k: u64,
    /// Matrix of `f` on the basis `basis`.
    pub restriction: QMatrix,
    pub basis: Vec<Vector>,
}

/// Signed cycle `e_{i_0} → s_0 e_{i_1} → …`; its order is the cycle length,
/// doubled when the sign product is `−1`.
fn signed_cycle(m: &mut IntMatrix, coords: &[usize], signs: &[i64]) {
    let len = coords.len();
    for t in 0..len {
        m[(coords[(t + 1) % len], coords[t])] = signs[t];
    }
}

fn random_signed_cycles(rng: &mut ChaCha8Rng, m: &mut IntMatrix, coords: &[usize], k: u64) {
    let mut rest = coords;
    while !rest.is_empty() {
        let fits: Vec<(usize, i64)> = (1..=rest.len().min(4))
            .flat_map(|len| [(len, 1), (len, -1)])
            .filter(|&(len, prod)| {
                let ord = if prod == 1 { len as u64 } else { 2 * len as u64 };
                k % ord == 0
            })
            .collect();
        let &(len, prod) = fits.choose(rng).expect("a fixed point always fits");
        let mut signs: Vec<i64> = (0..len).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        if signs.iter().product::<i64>() != prod {
            signs[0] = -signs[0];
        }
        signed_cycle(m, &rest[..len], &signs);
        rest = &rest[len..];
    }
}

fn random_root(rng: &mut ChaCha8Rng, l: &Lattice) -> Option<Vector> {
    (0..400).find_map(|_| {
        let e: Vector = (0..l.rank()).map(|_| rng.gen_range(-1..=1)).collect();
        let sq = l.square(&e).ok()?;
        [-2, -1, 1, 2].contains(&sq).then_some(e)
    })
}

/// Random instance of exact order `k` (even, at most 8) and rank at most 10:
/// a block diagonal signed permutation on `p(1) ⊕ q(−1)`, conjugated by a
/// product of reflections. The positive basis is further mixed by a random
/// unimodular change of basis and the restriction is recomputed exactly
/// from the conjugated isometry.
pub fn random_cyclic_instance(seed: u64, k: u64) -> CyclicInstance {
    assert!(k >= 2 && k % 2 == 0 && k <= 8, "k must be 2, 4, 6 or 8");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = (k / 2) as usize;
    let exact_in_plus = half <= 4 && rng.gen_bool(0.5);
    let plus = if exact_in_plus { rng.gen_range(half..=4) } else { rng.gen_range(1..=4) };
    let minus_min = if exact_in_plus { 0 } else { half };
    let minus = rng.gen_range(minus_min..=(10 - plus).max(minus_min));
    let n = plus + minus;
    let lattice = Lattice::diagonal(plus, minus).expect("diagonal lattice");

    let mut seed_matrix = IntMatrix::zeros(n, n);
    let (exact_range, plus_rest, minus_rest) = if exact_in_plus {
        ((0..half).collect::<Vec<_>>(), (half..plus).collect::<Vec<_>>(), (plus..n).collect::<Vec<_>>())
    } else {
        ((plus..plus + half).collect(), (0..plus).collect(), (plus + half..n).collect())
    };
    let mut signs = vec![1i64; half];
    signs[rng.gen_range(0..half)] = -1;
    signed_cycle(&mut seed_matrix, &exact_range, &signs);
    random_signed_cycles(&mut rng, &mut seed_matrix, &plus_rest, k);
    random_signed_cycles(&mut rng, &mut seed_matrix, &minus_rest, k);
    let seed_f = Isometry::from_matrix_unchecked(seed_matrix);

    let mut g = Isometry::identity(n);
    for _ in 0..3 {
        if let Some(e) = random_root(&mut rng, &lattice) {
            g = reflection(&lattice, &e).expect("integral reflection").compose(&g);
        }
    }
    let f = g.compose(&seed_f).compose(&g.inverse());

    // unimodular mixing of the positive coordinate basis
    let mut q = IntMatrix::identity(plus);
    for _ in 0..2 * plus {
        let (i, j) = (rng.gen_range(0..plus), rng.gen_range(0..plus));
        if i != j {
            let t = rng.gen_range(-2..=2);
            for r in 0..plus {
                let v = q[(r, j)];
                q[(r, i)] += t * v;
            }
        }
    }
    let basis: Vec<Vector> = (0..plus)
        .map(|col| {
            let mixed: Vector = (0..n).map(|r| if r < plus { q[(r, col)] } else { 0 }).collect();
            g.apply(&mixed)
        })
        .collect();
    let b = QMatrix::from_columns(n, &basis.iter().map(|v| to_q(v)).collect::<Vec<_>>());
    let bt = b.transpose();
    let normal = (&bt * &b).inverse().expect("basis is independent");
    let restriction = &(&normal * &bt) * &(&f.to_rational() * &b);
    CyclicInstance { lattice, f, k, restriction, basis }
}

fn to_q(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_integer(x.into())).collect()
}
