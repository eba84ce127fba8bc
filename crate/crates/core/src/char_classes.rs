//! Mod-2 cohomology of the four base spaces and total Stiefel-Whitney
//! classes of the flat bundles `H⁺` over them.
//!
//! Each ring is a small monomial table with its own rewrite rule:
//!
//! | ring            | basis                      | relation                         |
//! |-----------------|----------------------------|----------------------------------|
//! | `RP(d)`         | `xⁱ`, `i ≤ d`              | `x^{d+1} = 0`                    |
//! | `Lens(u, k)`    | `βⁱ`, `αβⁱ`, `i ≤ u`       | `α² = (k/2 mod 2)·β`, `β^{u+1} = 0` |
//! | `Torus(d)`      | squarefree `x_S`           | `xᵢ² = 0`                        |
//! | `BiProj(d1,d2)` | `xⁱyʲ`, `i ≤ d1`, `j ≤ d2` | `x^{d1+1} = y^{d2+1} = 0`        |
//!
//! For `k/2` even the rule `α² = 0` is the standard `α² = (k/2)β` reduced
//! mod 2.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::invariant_subspace::{CyclicMults, EpsMatrix, KleinPQRS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomError {
    #[error("classes live in different rings ({0} and {1})")]
    RingMismatch(String, String),
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("lens space cohomology needs an even order, got {0}")]
    OddOrder(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RingDescriptor {
    RP { d: usize },
    /// Lens space `L^{2u+1}(k)`.
    Lens { u: usize, k: u64 },
    Torus { d: usize },
    BiProj { d1: usize, d2: usize },
}

impl RingDescriptor {
    pub fn lens(u: usize, k: u64) -> Result<Self, CohomError> {
        if k == 0 || k % 2 != 0 {
            return Err(CohomError::OddOrder(k));
        }
        Ok(RingDescriptor::Lens { u, k })
    }

    /// Dimension of the base manifold.
    pub fn base_dim(&self) -> usize {
        match *self {
            RingDescriptor::RP { d } | RingDescriptor::Torus { d } => d,
            RingDescriptor::Lens { u, .. } => 2 * u + 1,
            RingDescriptor::BiProj { d1, d2 } => d1 + d2,
        }
    }

    pub fn basis_len(&self) -> usize {
        match *self {
            RingDescriptor::RP { d } => d + 1,
            RingDescriptor::Lens { u, .. } => 2 * (u + 1),
            RingDescriptor::Torus { d } => 1 << d,
            RingDescriptor::BiProj { d1, d2 } => (d1 + 1) * (d2 + 1),
        }
    }

    /// Degree of the basis monomial with the given index.
    pub fn degree(&self, idx: usize) -> usize {
        match *self {
            RingDescriptor::RP { .. } => idx,
            RingDescriptor::Lens { .. } => idx % 2 + 2 * (idx / 2),
            RingDescriptor::Torus { .. } => idx.count_ones() as usize,
            RingDescriptor::BiProj { d2, .. } => idx / (d2 + 1) + idx % (d2 + 1),
        }
    }

    /// Index of the top-degree monomial.
    pub fn top_index(&self) -> usize {
        self.basis_len() - 1
    }

    /// Product of two basis monomials, `None` when it vanishes.
    fn mul_monomials(&self, a: usize, b: usize) -> Option<usize> {
        match *self {
            RingDescriptor::RP { d } => (a + b <= d).then_some(a + b),
            RingDescriptor::Lens { u, k } => {
                let (ea, ia) = (a % 2, a / 2);
                let (eb, ib) = (b % 2, b / 2);
                let (e, extra) = match ea + eb {
                    2 if (k / 2) % 2 == 1 => (0, 1),
                    2 => return None,
                    e => (e, 0),
                };
                let i = ia + ib + extra;
                (i <= u).then_some(2 * i + e)
            }
            RingDescriptor::Torus { .. } => (a & b == 0).then_some(a | b),
            RingDescriptor::BiProj { d1, d2 } => {
                let w = d2 + 1;
                let (i, j) = (a / w + b / w, a % w + b % w);
                (i <= d1 && j <= d2).then_some(i * w + j)
            }
        }
    }

    fn monomial_name(&self, idx: usize) -> String {
        fn power(name: &str, e: usize) -> Option<String> {
            match e {
                0 => None,
                1 => Some(name.to_string()),
                e => Some(format!("{name}^{e}")),
            }
        }
        let factors: Vec<String> = match *self {
            RingDescriptor::RP { .. } => power("x", idx).into_iter().collect(),
            RingDescriptor::Lens { .. } => {
                power("alpha", idx % 2).into_iter().chain(power("beta", idx / 2)).collect()
            }
            RingDescriptor::Torus { d } => {
                (0..d).filter(|i| idx >> i & 1 == 1).map(|i| format!("x{}", i + 1)).collect()
            }
            RingDescriptor::BiProj { d2, .. } => power("x", idx / (d2 + 1))
                .into_iter()
                .chain(power("y", idx % (d2 + 1)))
                .collect(),
        };
        if factors.is_empty() {
            "1".into()
        } else {
            factors.join("*")
        }
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RingDescriptor::RP { d } => write!(f, "RP^{d}"),
            RingDescriptor::Lens { u, k } => write!(f, "L^{}({k})", 2 * u + 1),
            RingDescriptor::Torus { d } => write!(f, "T^{d}"),
            RingDescriptor::BiProj { d1, d2 } => write!(f, "RP^{d1} x RP^{d2}"),
        }
    }
}

/// Element of one of the rings, stored as its `F₂` coefficient vector over
/// the monomial basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CohomClass {
    ring: RingDescriptor,
    coeffs: Vec<bool>,
}

impl CohomClass {
    pub fn zero(ring: RingDescriptor) -> Self {
        CohomClass { ring, coeffs: vec![false; ring.basis_len()] }
    }

    pub fn one(ring: RingDescriptor) -> Self {
        Self::monomial(ring, 0)
    }

    /// The basis monomial with index `idx`.
    pub fn monomial(ring: RingDescriptor, idx: usize) -> Self {
        let mut c = Self::zero(ring);
        c.coeffs[idx] = true;
        c
    }

    pub fn from_coeffs(ring: RingDescriptor, coeffs: Vec<bool>) -> Result<Self, CohomError> {
        if coeffs.len() != ring.basis_len() {
            return Err(CohomError::BadDimensions(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                ring.basis_len()
            )));
        }
        Ok(CohomClass { ring, coeffs })
    }

    /// `x` in `RP(d)` or `BiProj`.
    pub fn x(ring: RingDescriptor) -> Self {
        match ring {
            RingDescriptor::BiProj { d1, d2 } if d1 >= 1 => Self::monomial(ring, d2 + 1),
            RingDescriptor::RP { d } if d >= 1 => Self::monomial(ring, 1),
            _ => Self::zero(ring),
        }
    }

    /// `y` in `BiProj`.
    pub fn y(ring: RingDescriptor) -> Self {
        match ring {
            RingDescriptor::BiProj { d2, .. } if d2 >= 1 => Self::monomial(ring, 1),
            _ => Self::zero(ring),
        }
    }

    /// `α` in `Lens`.
    pub fn alpha(ring: RingDescriptor) -> Self {
        Self::monomial(ring, 1)
    }

    /// `β` in `Lens`.
    pub fn beta(ring: RingDescriptor) -> Self {
        match ring {
            RingDescriptor::Lens { u, .. } if u >= 1 => Self::monomial(ring, 2),
            _ => Self::zero(ring),
        }
    }

    /// `xᵢ` (0-based `i`) in `Torus`.
    pub fn torus_generator(ring: RingDescriptor, i: usize) -> Self {
        Self::monomial(ring, 1 << i)
    }

    pub fn ring(&self) -> RingDescriptor {
        self.ring
    }

    pub fn coeffs(&self) -> &[bool] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| !c)
    }

    fn check_ring(&self, other: &Self) -> Result<(), CohomError> {
        if self.ring != other.ring {
            return Err(CohomError::RingMismatch(self.ring.to_string(), other.ring.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CohomError> {
        self.check_ring(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a ^ b).collect();
        Ok(CohomClass { ring: self.ring, coeffs })
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, CohomError> {
        self.check_ring(other)?;
        let mut out = Self::zero(self.ring);
        for (a, _) in self.coeffs.iter().enumerate().filter(|(_, c)| **c) {
            for (b, _) in other.coeffs.iter().enumerate().filter(|(_, c)| **c) {
                if let Some(m) = self.ring.mul_monomials(a, b) {
                    out.coeffs[m] ^= true;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.ring);
        for _ in 0..e {
            acc = acc.multiply(self).expect("same ring");
        }
        acc
    }

    /// Coefficient of the top-degree monomial.
    pub fn top_component(&self) -> u8 {
        u8::from(self.coeffs[self.ring.top_index()])
    }

    /// Homogeneous component of degree `deg`.
    pub fn component(&self, deg: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c && self.ring.degree(i) == deg)
            .collect();
        CohomClass { ring: self.ring, coeffs }
    }

    /// Monomials with coefficient 1, ordered by degree then basis index.
    pub fn terms(&self) -> Vec<String> {
        let mut idx: Vec<usize> = (0..self.coeffs.len()).filter(|&i| self.coeffs[i]).collect();
        idx.sort_by_key(|&i| (self.ring.degree(i), i));
        idx.into_iter().map(|i| self.ring.monomial_name(i)).collect()
    }
}

impl fmt::Display for CohomClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

impl Serialize for CohomClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.terms().serialize(s)
    }
}

fn product(ring: RingDescriptor, factors: impl IntoIterator<Item = (CohomClass, usize)>) -> CohomClass {
    factors.into_iter().fold(CohomClass::one(ring), |acc, (f, e)| {
        acc.multiply(&f.pow(e)).expect("same ring")
    })
}

/// `(1 + x)^v` in `RP(d)`.
pub fn sw_rp(d: usize, u: usize, v: usize) -> Result<CohomClass, CohomError> {
    if u + v != d {
        return Err(CohomError::BadDimensions(format!("u + v = {} but d = {d}", u + v)));
    }
    let ring = RingDescriptor::RP { d };
    let one = CohomClass::one(ring);
    Ok(one.add(&CohomClass::x(ring))?.pow(v))
}

/// `(1 + α)^{m₋} · Π_d (1 + dβ)^{m_d}` in the cohomology of `L^{2u+1}(k)`.
pub fn sw_lens(u: usize, k: u64, mults: &CyclicMults) -> Result<CohomClass, CohomError> {
    let ring = RingDescriptor::lens(u, k)?;
    if mults.k != k {
        return Err(CohomError::BadDimensions(format!(
            "multiplicities are for k = {}, ring has k = {k}",
            mults.k
        )));
    }
    if mults.dim() != 2 * u + 1 {
        return Err(CohomError::BadDimensions(format!(
            "representation has dimension {}, base has dimension {}",
            mults.dim(),
            2 * u + 1
        )));
    }
    let one = CohomClass::one(ring);
    let beta = CohomClass::beta(ring);
    let sign = one.add(&CohomClass::alpha(ring))?;
    let rotations = mults.m_d.iter().map(|(&d, &m)| {
        let factor = if d % 2 == 1 { one.add(&beta).expect("same ring") } else { one.clone() };
        (factor, m)
    });
    Ok(product(ring, std::iter::once((sign, mults.m_sign)).chain(rotations)))
}

/// `Π_j (Σ_i eps[i][j] xᵢ)` in the cohomology of `T^d`.
pub fn sw_torus(eps: &EpsMatrix) -> Result<CohomClass, CohomError> {
    let d = eps.rows();
    if eps.eps.iter().any(|r| r.len() != d) {
        return Err(CohomError::BadDimensions(format!("eps must be {d}x{d}")));
    }
    let ring = RingDescriptor::Torus { d };
    let one = CohomClass::one(ring);
    let factors = (0..d).map(|j| {
        let linear = (0..d)
            .filter(|&i| eps.eps[i][j] == 1)
            .fold(CohomClass::zero(ring), |acc, i| {
                acc.add(&CohomClass::torus_generator(ring, i)).expect("same ring")
            });
        (one.add(&linear).expect("same ring"), 1)
    });
    Ok(product(ring, factors))
}

/// `(1 + x)^q (1 + y)^r (1 + x + y)^s` in the cohomology of
/// `RP^{d1} × RP^{d2}`.
pub fn sw_biproj(d1: usize, d2: usize, pqrs: &KleinPQRS) -> Result<CohomClass, CohomError> {
    if pqrs.dim() != d1 + d2 {
        return Err(CohomError::BadDimensions(format!(
            "p + q + r + s = {} but d1 + d2 = {}",
            pqrs.dim(),
            d1 + d2
        )));
    }
    let ring = RingDescriptor::BiProj { d1, d2 };
    let one = CohomClass::one(ring);
    let x = CohomClass::x(ring);
    let y = CohomClass::y(ring);
    let factors = [
        (one.add(&x)?, pqrs.q),
        (one.add(&y)?, pqrs.r),
        (one.add(&x)?.add(&y)?, pqrs.s),
    ];
    Ok(product(ring, factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn truncation_in_rp() {
        let ring = RingDescriptor::RP { d: 3 };
        let x = CohomClass::x(ring);
        assert!(x.multiply(&x.pow(3)).unwrap().is_zero());
        assert_eq!(x.pow(3).terms(), vec!["x^3"]);
    }

    #[test]
    fn lens_relation_depends_on_half_order() {
        let odd = RingDescriptor::lens(2, 6).unwrap();
        let a = CohomClass::alpha(odd);
        assert_eq!(a.multiply(&a).unwrap(), CohomClass::beta(odd));
        let even = RingDescriptor::lens(2, 4).unwrap();
        let a = CohomClass::alpha(even);
        assert!(a.multiply(&a).unwrap().is_zero());
        assert_eq!(RingDescriptor::lens(1, 5), Err(CohomError::OddOrder(5)));
    }

    #[test]
    fn torus_is_exterior() {
        let ring = RingDescriptor::Torus { d: 2 };
        let x1 = CohomClass::torus_generator(ring, 0);
        let x2 = CohomClass::torus_generator(ring, 1);
        assert!(x1.multiply(&x1).unwrap().is_zero());
        assert_eq!(x1.multiply(&x2).unwrap().terms(), vec!["x1*x2"]);
    }

    #[test]
    fn ring_mismatch() {
        let a = CohomClass::one(RingDescriptor::RP { d: 2 });
        let b = CohomClass::one(RingDescriptor::RP { d: 3 });
        assert!(matches!(a.multiply(&b), Err(CohomError::RingMismatch(..))));
    }

    #[test]
    fn rp_examples() {
        assert_eq!(sw_rp(3, 1, 2).unwrap().terms(), vec!["1", "x^2"]);
        assert_eq!(sw_rp(3, 0, 3).unwrap().top_component(), 1);
        assert_eq!(sw_rp(3, 3, 0).unwrap().terms(), vec!["1"]);
        assert!(sw_rp(3, 1, 1).is_err());
    }

    #[test]
    fn lens_examples() {
        // ℝ₋ ⊕ ℂ₁ over L³(4)
        let m = CyclicMults::new(4, 0, 1, BTreeMap::from([(1, 1)]));
        let w = sw_lens(1, 4, &m).unwrap();
        assert_eq!(w.terms(), vec!["1", "alpha", "beta", "alpha*beta"]);
        assert_eq!(w.top_component(), 1);
        // ℝ₋³ over L³(6)
        let m = CyclicMults::new(6, 0, 3, BTreeMap::new());
        assert_eq!(sw_lens(1, 6, &m).unwrap().top_component(), 1);
        // an even rotation kills the top class
        let m = CyclicMults::new(8, 0, 1, BTreeMap::from([(2, 1)]));
        assert_eq!(sw_lens(1, 8, &m).unwrap().top_component(), 0);
        let m = CyclicMults::new(8, 3, 0, BTreeMap::new());
        assert_eq!(sw_lens(1, 8, &m).unwrap().terms(), vec!["1"]);
    }

    #[test]
    fn torus_examples() {
        let id = EpsMatrix { eps: vec![vec![1, 0], vec![0, 1]] };
        assert_eq!(sw_torus(&id).unwrap().component(2).terms(), vec!["x1*x2"]);
        let singular = EpsMatrix { eps: vec![vec![1, 1], vec![1, 1]] };
        assert_eq!(sw_torus(&singular).unwrap().top_component(), 0);
        let zero = EpsMatrix { eps: vec![vec![0, 0], vec![0, 0]] };
        assert_eq!(sw_torus(&zero).unwrap().terms(), vec!["1"]);
        let empty = EpsMatrix { eps: vec![] };
        assert_eq!(sw_torus(&empty).unwrap().top_component(), 1);
    }

    #[test]
    fn biproj_examples() {
        let pqrs = KleinPQRS { p: 0, q: 3, r: 3, s: 6 };
        assert_eq!(sw_biproj(3, 9, &pqrs).unwrap().top_component(), 1);
        let pqrs = KleinPQRS { p: 1, q: 2, r: 1, s: 2 };
        for d1 in 1..6 {
            assert_eq!(sw_biproj(d1, 6 - d1, &pqrs).unwrap().top_component(), 0);
        }
        let pqrs = KleinPQRS { p: 4, q: 0, r: 0, s: 0 };
        assert_eq!(sw_biproj(2, 2, &pqrs).unwrap().terms(), vec!["1"]);
        // (1 + x + y)² = 1 + x² + y² = 1 when x² = y² = 0
        assert_eq!(
            sw_biproj(1, 1, &KleinPQRS { p: 0, q: 0, r: 0, s: 2 }).unwrap().terms(),
            vec!["1"]
        );
        let w = sw_biproj(1, 1, &KleinPQRS { p: 0, q: 1, r: 1, s: 0 }).unwrap();
        assert_eq!(w.terms(), vec!["1", "y", "x", "x*y"]);
    }

    #[test]
    fn serializes_as_term_list() {
        let w = sw_rp(3, 0, 3).unwrap();
        assert_eq!(serde_json::to_string(&w).unwrap(), r#"["1","x","x^2","x^3"]"#);
        assert_eq!(RingDescriptor::lens(1, 4).unwrap().to_string(), "L^3(4)");
    }
}
