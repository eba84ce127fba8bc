//! Integer isometries of a [`Lattice`] and finite group actions built from them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{Lattice, LatticeError, Vector};
use crate::{IntMatrix, QMatrix, Rational};

/// Bound on the order search used when no explicit bound is given.
pub const DEFAULT_MAX_ORDER: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsometryError {
    #[error("not an isometry: (MᵀGM)[{row}][{col}] = {found}, expected {expected}")]
    NotAnIsometry { row: usize, col: usize, expected: i64, found: i64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("reflection in a vector of square zero is undefined")]
    ZeroNormVector,
    #[error("reflection in a vector of square {square} is not integral (basis vector {coord})")]
    NonIntegralReflection { square: i64, coord: usize },
    #[error("no power f^n = I with n <= {bound}")]
    OrderExceedsBound { bound: u64 },
    #[error("incompatible blocks: {0}")]
    IncompatibleBlocks(String),
    #[error("group shape violated: {0}")]
    ShapeViolation(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Isometry {
    matrix: IntMatrix,
}

impl Isometry {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn identity(n: usize) -> Self {
        Isometry { matrix: IntMatrix::identity(n) }
    }

    pub fn apply(&self, v: &[i64]) -> Vector {
        self.matrix.mul_vec(v)
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Isometry { matrix: &self.matrix * &other.matrix }
    }

    pub fn pow(&self, n: u64) -> Isometry {
        Isometry { matrix: self.matrix.pow(n) }
    }

    pub fn negate(&self) -> Isometry {
        Isometry { matrix: self.matrix.map(|v| -v) }
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn is_involution(&self) -> bool {
        (&self.matrix * &self.matrix).is_identity()
    }

    pub fn to_rational(&self) -> QMatrix {
        self.matrix.to_rational()
    }

    /// Inverse isometry; integral because isometries of a unimodular form are
    /// unimodular.
    pub fn inverse(&self) -> Isometry {
        let inv = self.to_rational().inverse().expect("isometries are invertible");
        Isometry { matrix: inv.map(|q| q.to_integer().try_into().expect("integral inverse")) }
    }

    /// Wraps a matrix without checking the Gram identity. Callers that own the
    /// lattice should prefer [`verify_isometry`].
    pub fn from_matrix_unchecked(matrix: IntMatrix) -> Self {
        Isometry { matrix }
    }
}

/// Accepts `m` iff `mᵀ · G · m = G`.
pub fn verify_isometry(l: &Lattice, m: IntMatrix) -> Result<Isometry, IsometryError> {
    let n = l.rank();
    if m.nrows() != n || m.ncols() != n {
        return Err(IsometryError::DimensionMismatch {
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    let pulled = &(&m.transpose() * l.gram()) * &m;
    for row in 0..n {
        for col in 0..n {
            if pulled[(row, col)] != l.gram()[(row, col)] {
                return Err(IsometryError::NotAnIsometry {
                    row,
                    col,
                    expected: l.gram()[(row, col)],
                    found: pulled[(row, col)],
                });
            }
        }
    }
    Ok(Isometry { matrix: m })
}

/// `x ↦ x − (2⟨x,e⟩ / e²) e`; for `e² = 2` this is `x ↦ x − ⟨x,e⟩ e`.
pub fn reflection(l: &Lattice, e: &[i64]) -> Result<Isometry, IsometryError> {
    let square = l.square(e)?;
    if square == 0 {
        return Err(IsometryError::ZeroNormVector);
    }
    let ge = l.gram().mul_vec(e);
    let n = l.rank();
    let mut m = IntMatrix::identity(n);
    for (j, gej) in ge.iter().enumerate() {
        let num = 2 * gej;
        if num % square != 0 {
            return Err(IsometryError::NonIntegralReflection { square, coord: j });
        }
        let coef = num / square;
        for (i, ei) in e.iter().enumerate() {
            m[(i, j)] -= coef * ei;
        }
    }
    verify_isometry(l, m)
}

/// Least `n ≥ 1` with `fⁿ = I`.
pub fn order(f: &Isometry, max_order: u64) -> Result<u64, IsometryError> {
    let mut power = f.matrix.clone();
    for n in 1..=max_order {
        if power.is_identity() {
            return Ok(n);
        }
        power = &power * &f.matrix;
    }
    Err(IsometryError::OrderExceedsBound { bound: max_order })
}

pub fn commute(f: &Isometry, g: &Isometry) -> Result<bool, IsometryError> {
    if f.dim() != g.dim() {
        return Err(IsometryError::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    Ok(&f.matrix * &g.matrix == &g.matrix * &f.matrix)
}

/// Rational basis of `ker(f − I)`.
pub fn fixed_sublattice(f: &Isometry) -> Vec<Vec<Rational>> {
    f.to_rational().shift_diagonal(&Rational::from_integer(1.into())).kernel()
}

/// One step of [`block_builder`]. Block indices refer to [`Lattice::blocks`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockOp {
    /// `−Id` on the listed blocks.
    MinusIdOn(Vec<usize>),
    /// Exchange two isomorphic blocks.
    Swap(usize, usize),
    /// `b₀ → b₁ → … → b₀` on isomorphic blocks.
    Cycle(Vec<usize>),
    /// Reflection in a full-length vector.
    Reflection(Vector),
    /// Full-rank matrix in the assembled basis.
    Matrix(Vec<Vec<i64>>),
    /// Matrix acting on a single block, identity elsewhere.
    Local { block: usize, rows: Vec<Vec<i64>> },
}

fn block_permutation(l: &Lattice, images: &[(usize, usize)]) -> Result<IntMatrix, IsometryError> {
    let blocks = l.blocks();
    let mut m = IntMatrix::identity(l.rank());
    for &(src, dst) in images {
        let (Some(a), Some(b)) = (blocks.get(src), blocks.get(dst)) else {
            return Err(IsometryError::IncompatibleBlocks(format!(
                "block index out of range ({} blocks)",
                blocks.len()
            )));
        };
        if a.gram != b.gram {
            return Err(IsometryError::IncompatibleBlocks(format!(
                "blocks {src} and {dst} are not isomorphic"
            )));
        }
    }
    for &(src, _) in images {
        let a = &blocks[src];
        for t in 0..a.size() {
            m[(a.offset + t, a.offset + t)] = 0;
        }
    }
    for &(src, dst) in images {
        let (a, b) = (&blocks[src], &blocks[dst]);
        for t in 0..a.size() {
            m[(b.offset + t, a.offset + t)] = 1;
        }
    }
    Ok(m)
}

fn op_matrix(l: &Lattice, op: &BlockOp) -> Result<IntMatrix, IsometryError> {
    let n = l.rank();
    let blocks = l.blocks();
    let block = |i: usize| {
        blocks.get(i).ok_or_else(|| {
            IsometryError::IncompatibleBlocks(format!(
                "block index {i} out of range ({} blocks)",
                blocks.len()
            ))
        })
    };
    match op {
        BlockOp::MinusIdOn(indices) => {
            let mut m = IntMatrix::identity(n);
            for &i in indices {
                for c in block(i)?.range() {
                    m[(c, c)] = -1;
                }
            }
            Ok(m)
        }
        BlockOp::Swap(i, j) => {
            if i == j {
                return Err(IsometryError::IncompatibleBlocks(format!("swap({i}, {j})")));
            }
            block_permutation(l, &[(*i, *j), (*j, *i)])
        }
        BlockOp::Cycle(idx) => {
            let mut seen = idx.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != idx.len() {
                return Err(IsometryError::IncompatibleBlocks("cycle repeats a block".into()));
            }
            let images: Vec<(usize, usize)> =
                (0..idx.len()).map(|s| (idx[s], idx[(s + 1) % idx.len()])).collect();
            block_permutation(l, &images)
        }
        BlockOp::Reflection(e) => Ok(reflection(l, e)?.matrix),
        BlockOp::Matrix(rows) => IntMatrix::from_rows(rows.clone())
            .filter(|m| m.nrows() == n && m.ncols() == n)
            .ok_or(IsometryError::DimensionMismatch { expected: n, found: rows.len() }),
        BlockOp::Local { block: b, rows } => {
            let blk = block(*b)?;
            let local = IntMatrix::from_rows(rows.clone())
                .filter(|m| m.nrows() == blk.size() && m.ncols() == blk.size())
                .ok_or(IsometryError::DimensionMismatch {
                    expected: blk.size(),
                    found: rows.len(),
                })?;
            let mut m = IntMatrix::identity(n);
            for r in 0..blk.size() {
                for c in 0..blk.size() {
                    m[(blk.offset + r, blk.offset + c)] = local[(r, c)];
                }
            }
            Ok(m)
        }
    }
}

/// Composes block operations in list order (the first op is applied first)
/// and verifies the result.
pub fn block_builder(l: &Lattice, ops: &[BlockOp]) -> Result<Isometry, IsometryError> {
    let mut acc = IntMatrix::identity(l.rank());
    for op in ops {
        let m = op_matrix(l, op)?;
        acc = &m * &acc;
    }
    verify_isometry(l, acc)
}

// ---------------------------------------------------------------------------
// Group actions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupShape {
    Z2,
    /// Cyclic of exact even order `k ≥ 4`.
    CyclicEven(u64),
    /// `d` commuting generators.
    FreeAbelian(usize),
    KleinFour,
}

impl GroupShape {
    pub fn generator_count(&self) -> Option<usize> {
        match self {
            GroupShape::Z2 | GroupShape::CyclicEven(_) => Some(1),
            GroupShape::FreeAbelian(d) => Some(*d),
            GroupShape::KleinFour => Some(2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAction {
    pub shape: GroupShape,
    pub generators: Vec<Isometry>,
}

impl GroupAction {
    /// Checks generator count and dimensions only; the algebraic shape
    /// conditions are reported by [`GroupAction::shape_issues`] so checkers
    /// can record them as failed hypotheses.
    pub fn new(
        l: &Lattice,
        shape: GroupShape,
        generators: Vec<Isometry>,
    ) -> Result<Self, IsometryError> {
        if let Some(n) = shape.generator_count() {
            if generators.len() != n {
                return Err(IsometryError::ShapeViolation(format!(
                    "{shape:?} needs {n} generator(s), found {}",
                    generators.len()
                )));
            }
        }
        for g in &generators {
            if g.dim() != l.rank() {
                return Err(IsometryError::DimensionMismatch { expected: l.rank(), found: g.dim() });
            }
        }
        Ok(GroupAction { shape, generators })
    }

    /// Violations of the declared shape's algebraic conditions.
    pub fn shape_issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let gens = &self.generators;
        let pairwise_commuting = || {
            (0..gens.len()).all(|i| {
                (i + 1..gens.len()).all(|j| commute(&gens[i], &gens[j]).unwrap_or(false))
            })
        };
        match self.shape {
            GroupShape::Z2 => {
                if !gens[0].is_involution() {
                    issues.push("generator does not square to the identity".into());
                }
                if gens[0].is_identity() {
                    issues.push("generator is the identity".into());
                }
            }
            GroupShape::CyclicEven(k) => {
                if k < 4 || k % 2 != 0 {
                    issues.push(format!("order {k} is not an even integer >= 4"));
                }
                match order(&gens[0], DEFAULT_MAX_ORDER) {
                    Ok(o) if o == k => {}
                    Ok(o) => issues.push(format!("generator has order {o}, expected {k}")),
                    Err(e) => issues.push(e.to_string()),
                }
            }
            GroupShape::FreeAbelian(_) => {
                if !pairwise_commuting() {
                    issues.push("generators do not commute pairwise".into());
                }
            }
            GroupShape::KleinFour => {
                if !gens.iter().all(Isometry::is_involution) {
                    issues.push("a generator does not square to the identity".into());
                }
                if !pairwise_commuting() {
                    issues.push("generators do not commute".into());
                }
            }
        }
        issues
    }

    pub fn check_invariants(&self) -> Result<(), IsometryError> {
        match self.shape_issues().into_iter().next() {
            None => Ok(()),
            Some(issue) => Err(IsometryError::ShapeViolation(issue)),
        }
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Matrix { rows: Vec<Vec<i64>> },
    Reflection { vector: Vector },
    Blocks { ops: Vec<BlockOp> },
}

impl GeneratorSpec {
    pub fn build(&self, l: &Lattice) -> Result<Isometry, IsometryError> {
        match self {
            GeneratorSpec::Matrix { rows } => {
                let m = IntMatrix::from_rows(rows.clone()).ok_or(
                    IsometryError::DimensionMismatch { expected: l.rank(), found: rows.len() },
                )?;
                verify_isometry(l, m)
            }
            GeneratorSpec::Reflection { vector } => reflection(l, vector),
            GeneratorSpec::Blocks { ops } => block_builder(l, ops),
        }
    }
}

impl From<&Isometry> for GeneratorSpec {
    fn from(f: &Isometry) -> Self {
        GeneratorSpec::Matrix { rows: f.matrix.to_rows() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape")]
pub enum ShapeSpec {
    #[serde(rename = "Z2", alias = "z2")]
    Z2,
    #[serde(rename = "cyclic")]
    Cyclic { k: u64 },
    #[serde(rename = "free-abelian")]
    FreeAbelian { d: usize },
    #[serde(rename = "klein")]
    Klein,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSpec {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    pub generators: Vec<GeneratorSpec>,
}

impl From<ShapeSpec> for GroupShape {
    fn from(s: ShapeSpec) -> Self {
        match s {
            ShapeSpec::Z2 => GroupShape::Z2,
            ShapeSpec::Cyclic { k } => GroupShape::CyclicEven(k),
            ShapeSpec::FreeAbelian { d } => GroupShape::FreeAbelian(d),
            ShapeSpec::Klein => GroupShape::KleinFour,
        }
    }
}

impl From<GroupShape> for ShapeSpec {
    fn from(s: GroupShape) -> Self {
        match s {
            GroupShape::Z2 => ShapeSpec::Z2,
            GroupShape::CyclicEven(k) => ShapeSpec::Cyclic { k },
            GroupShape::FreeAbelian(d) => ShapeSpec::FreeAbelian { d },
            GroupShape::KleinFour => ShapeSpec::Klein,
        }
    }
}

impl ActionSpec {
    /// Builds the action; errors carry the index of the failing generator.
    pub fn build(&self, l: &Lattice) -> Result<GroupAction, (Option<usize>, IsometryError)> {
        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| g.build(l).map_err(|e| (Some(i), e)))
            .collect::<Result<Vec<_>, _>>()?;
        GroupAction::new(l, self.shape.into(), generators).map_err(|e| (None, e))
    }
}

impl From<&GroupAction> for ActionSpec {
    fn from(a: &GroupAction) -> Self {
        ActionSpec {
            shape: a.shape.into(),
            generators: a.generators.iter().map(GeneratorSpec::from).collect(),
        }
    }
}
