//! Integral unimodular intersection forms assembled from named summands.
//!
//! The summand order fixes the basis: every vector and matrix elsewhere in
//! the crate is written in the assembled basis. Each summand copy is further
//! split into *blocks* (one per `±1` diagonal entry, one per `H`, one per
//! `±E8`, one per Gram copy); block indices are what isometry constructors
//! refer to.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Inertia, Matrix};
use crate::{IntMatrix, Rational};

pub type Vector = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("summand {summand}: Gram matrix is not symmetric")]
    NonSymmetric { summand: usize },
    #[error("summand {summand}: Gram matrix has determinant {det}, expected ±1")]
    NonUnimodular { summand: usize, det: String },
    #[error("summand {summand}: Gram matrix is empty or not square")]
    BadGramShape { summand: usize },
    #[error("summand {summand}: diagonal entries must be +1 or -1, found {entry}")]
    BadDiagEntry { summand: usize, entry: i64 },
    #[error("summand {summand}: E8 sign must be +1 or -1, found {sign}")]
    BadSign { summand: usize, sign: i64 },
    #[error("summand {summand}: count must be positive")]
    ZeroCount { summand: usize },
    #[error("lattice has no summands")]
    Empty,
    #[error("dimension mismatch: expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SummandKind {
    Diag(Vec<i64>),
    H,
    E8 { sign: i64 },
    Gram(IntMatrix),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub kind: SummandKind,
    pub count: usize,
}

impl Summand {
    pub fn diag(entries: Vec<i64>) -> Self {
        Summand { kind: SummandKind::Diag(entries), count: 1 }
    }

    /// `n` copies of `(sign)`, i.e. `n(1)` or `n(-1)`.
    pub fn units(sign: i64, n: usize) -> Self {
        Summand { kind: SummandKind::Diag(vec![sign; n]), count: 1 }
    }

    pub fn hyperbolic(count: usize) -> Self {
        Summand { kind: SummandKind::H, count }
    }

    pub fn e8(sign: i64, count: usize) -> Self {
        Summand { kind: SummandKind::E8 { sign }, count }
    }

    pub fn gram(matrix: IntMatrix) -> Self {
        Summand { kind: SummandKind::Gram(matrix), count: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// One indecomposable piece of the assembled basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub summand: usize,
    pub offset: usize,
    pub gram: IntMatrix,
}

impl Block {
    pub fn size(&self) -> usize {
        self.gram.nrows()
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.size()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    summands: Vec<Summand>,
    blocks: Vec<Block>,
    gram: IntMatrix,
    b_plus: usize,
    b_minus: usize,
    parity: Parity,
}

/// The E8 root lattice Gram matrix (Cartan matrix, Bourbaki labelling:
/// chain 1-3-4-5-6-7-8 with node 2 attached to node 4).
pub fn e8_gram() -> IntMatrix {
    const EDGES: [(usize, usize); 7] = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    let mut m = IntMatrix::zeros(8, 8);
    for i in 0..8 {
        m[(i, i)] = 2;
    }
    for (a, b) in EDGES {
        m[(a, b)] = -1;
        m[(b, a)] = -1;
    }
    m
}

pub fn hyperbolic_gram() -> IntMatrix {
    Matrix::from_rows(vec![vec![0, 1], vec![1, 0]]).expect("2x2")
}

fn summand_blocks(index: usize, s: &Summand) -> Result<Vec<IntMatrix>, LatticeError> {
    if s.count == 0 {
        return Err(LatticeError::ZeroCount { summand: index });
    }
    let one: Vec<IntMatrix> = match &s.kind {
        SummandKind::Diag(entries) => {
            if entries.is_empty() {
                return Err(LatticeError::BadGramShape { summand: index });
            }
            entries
                .iter()
                .map(|&e| {
                    if e == 1 || e == -1 {
                        Ok(IntMatrix::from_diagonal(&[e]))
                    } else {
                        Err(LatticeError::BadDiagEntry { summand: index, entry: e })
                    }
                })
                .collect::<Result<_, _>>()?
        }
        SummandKind::H => vec![hyperbolic_gram()],
        SummandKind::E8 { sign } => match sign {
            1 => vec![e8_gram()],
            -1 => vec![e8_gram().map(|v| -v)],
            other => return Err(LatticeError::BadSign { summand: index, sign: *other }),
        },
        SummandKind::Gram(m) => {
            if m.nrows() == 0 || !m.is_square() {
                return Err(LatticeError::BadGramShape { summand: index });
            }
            if !m.is_symmetric() {
                return Err(LatticeError::NonSymmetric { summand: index });
            }
            let det = m.to_rational().determinant();
            if det != Rational::from_integer(1.into()) && det != Rational::from_integer((-1).into())
            {
                return Err(LatticeError::NonUnimodular { summand: index, det: det.to_string() });
            }
            vec![m.clone()]
        }
    };
    Ok(std::iter::repeat_n(one, s.count).flatten().collect())
}

impl Lattice {
    /// Assembles the block-diagonal form and computes its signature and parity.
    pub fn new(summands: Vec<Summand>) -> Result<Self, LatticeError> {
        if summands.is_empty() {
            return Err(LatticeError::Empty);
        }
        let mut blocks = Vec::new();
        let mut offset = 0;
        for (i, s) in summands.iter().enumerate() {
            for gram in summand_blocks(i, s)? {
                let size = gram.nrows();
                blocks.push(Block { summand: i, offset, gram });
                offset += size;
            }
        }
        let grams: Vec<IntMatrix> = blocks.iter().map(|b| b.gram.clone()).collect();
        let gram = IntMatrix::block_diagonal(&grams);
        let Inertia { positive, negative, zero } = gram.to_rational().inertia();
        debug_assert_eq!(zero, 0, "unimodular blocks cannot be degenerate");
        let parity = if (0..gram.nrows()).all(|i| gram[(i, i)] % 2 == 0) {
            Parity::Even
        } else {
            Parity::Odd
        };
        Ok(Lattice { summands, blocks, gram, b_plus: positive, b_minus: negative, parity })
    }

    /// `m(1) ⊕ n(-1)`.
    pub fn diagonal(plus: usize, minus: usize) -> Result<Self, LatticeError> {
        let mut s = Vec::new();
        if plus > 0 {
            s.push(Summand::units(1, plus));
        }
        if minus > 0 {
            s.push(Summand::units(-1, minus));
        }
        Lattice::new(s)
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn b_plus(&self) -> usize {
        self.b_plus
    }

    pub fn b_minus(&self) -> usize {
        self.b_minus
    }

    pub fn sigma(&self) -> i64 {
        self.b_plus as i64 - self.b_minus as i64
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn determinant(&self) -> Rational {
        self.gram.to_rational().determinant()
    }

    pub fn check_dim(&self, v: &[i64]) -> Result<(), LatticeError> {
        if v.len() == self.rank() {
            Ok(())
        } else {
            Err(LatticeError::DimensionMismatch { expected: self.rank(), found: v.len() })
        }
    }

    pub fn inner(&self, u: &[i64], v: &[i64]) -> Result<i64, LatticeError> {
        self.check_dim(u)?;
        self.check_dim(v)?;
        Ok(self.gram.bilinear(u, v))
    }

    pub fn square(&self, v: &[i64]) -> Result<i64, LatticeError> {
        self.inner(v, v)
    }

    /// `⟨c, bᵢ⟩ ≡ ⟨bᵢ, bᵢ⟩ (mod 2)` on every standard basis vector.
    ///
    /// On a unimodular lattice `x ↦ ⟨x,x⟩ mod 2` is F2-linear, so the basis
    /// test is equivalent to the congruence for all `x`.
    pub fn is_characteristic(&self, c: &[i64]) -> Result<bool, LatticeError> {
        self.check_dim(c)?;
        let gc = self.gram.mul_vec(c);
        Ok(gc.iter().enumerate().all(|(i, v)| (v - self.gram[(i, i)]).rem_euclid(2) == 0))
    }

    /// The unique residue mod 2 of every characteristic vector: the solution
    /// of `G w ≡ diag(G) (mod 2)`, which exists because `G` is invertible over F2.
    pub fn characteristic_residue(&self) -> Vec<u8> {
        let n = self.rank();
        let mut aug: Vec<Vec<u8>> = (0..n)
            .map(|r| {
                let mut row: Vec<u8> =
                    (0..n).map(|c| self.gram[(r, c)].rem_euclid(2) as u8).collect();
                row.push(self.gram[(r, r)].rem_euclid(2) as u8);
                row
            })
            .collect();
        let mut row = 0;
        let mut pivots = Vec::with_capacity(n);
        for col in 0..n {
            let Some(p) = (row..n).find(|&r| aug[r][col] == 1) else {
                continue;
            };
            aug.swap(row, p);
            for r in 0..n {
                if r != row && aug[r][col] == 1 {
                    let pivot_row = aug[row].clone();
                    for (x, y) in aug[r].iter_mut().zip(&pivot_row) {
                        *x ^= y;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        assert_eq!(pivots.len(), n, "unimodular form is invertible mod 2");
        let mut w = vec![0u8; n];
        for (r, &c) in pivots.iter().enumerate() {
            w[c] = aug[r][n];
        }
        w
    }

    pub fn block_of(&self, coord: usize) -> usize {
        self.blocks.iter().position(|b| b.range().contains(&coord)).expect("coordinate in range")
    }
}

// ---------------------------------------------------------------------------
// JSON fragment
// ---------------------------------------------------------------------------

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind")]
pub enum SummandSpec {
    #[serde(rename = "diag")]
    Diag {
        entries: Vec<i64>,
        #[serde(default = "one")]
        count: usize,
    },
    #[serde(rename = "H", alias = "h")]
    H {
        #[serde(default = "one")]
        count: usize,
    },
    #[serde(rename = "E8", alias = "e8")]
    E8 {
        sign: i64,
        #[serde(default = "one")]
        count: usize,
    },
    #[serde(rename = "gram")]
    Gram {
        matrix: Vec<Vec<i64>>,
        #[serde(default = "one")]
        count: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct LatticeSpec {
    pub summands: Vec<SummandSpec>,
}

impl From<&Summand> for SummandSpec {
    fn from(s: &Summand) -> Self {
        match &s.kind {
            SummandKind::Diag(e) => SummandSpec::Diag { entries: e.clone(), count: s.count },
            SummandKind::H => SummandSpec::H { count: s.count },
            SummandKind::E8 { sign } => SummandSpec::E8 { sign: *sign, count: s.count },
            SummandKind::Gram(m) => SummandSpec::Gram { matrix: m.to_rows(), count: s.count },
        }
    }
}

impl LatticeSpec {
    pub fn build(&self) -> Result<Lattice, LatticeError> {
        let summands = self
            .summands
            .iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(match s {
                    SummandSpec::Diag { entries, count } => {
                        Summand { kind: SummandKind::Diag(entries.clone()), count: *count }
                    }
                    SummandSpec::H { count } => Summand::hyperbolic(*count),
                    SummandSpec::E8 { sign, count } => Summand::e8(*sign, *count),
                    SummandSpec::Gram { matrix, count } => {
                        let m = IntMatrix::from_rows(matrix.clone())
                            .ok_or(LatticeError::BadGramShape { summand: i })?;
                        Summand { kind: SummandKind::Gram(m), count: *count }
                    }
                })
            })
            .collect::<Result<Vec<_>, LatticeError>>()?;
        Lattice::new(summands)
    }
}

impl From<&Lattice> for LatticeSpec {
    fn from(l: &Lattice) -> Self {
        LatticeSpec { summands: l.summands.iter().map(SummandSpec::from).collect() }
    }
}
