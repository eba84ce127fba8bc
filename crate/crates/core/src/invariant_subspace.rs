//! Group-invariant maximal positive definite subspaces and the real
//! representation they carry.
//!
//! Actions generated by commuting involutions are handled exactly: the
//! simultaneous `±1` eigenspaces are rational, pairwise orthogonal for the
//! form, and the positive part of each one is found by congruence
//! diagonalization. Every other finite abelian action goes through a numeric
//! path: average an auxiliary positive definite form over the group, split
//! the lattice form against it, and read the representation off the
//! eigenvalues of the restricted generator. That path validates itself and
//! fails loudly instead of rounding.
//!
//! The representation type is computed on one invariant `V`. It does not
//! depend on that choice: the form restricts nondegenerately to every
//! isotypic component, so the positive index of each component is fixed.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::isometry::{commute, order, GroupAction, Isometry, DEFAULT_MAX_ORDER};
use crate::lattice::Lattice;
use crate::linalg::Matrix;
use crate::scalar::{Field, Scalar};
use crate::{IntMatrix, QMatrix, Rational};

/// Generalized eigenvalues of the lattice form against the averaged form
/// must stay at least this far from zero.
pub const SPLIT_TOLERANCE: f64 = 1e-8;
/// Relative size below which a singular value counts as zero, and the
/// allowed relative residual of numeric invariance checks.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;
/// Character-sum multiplicities must lie this close to an integer.
pub const MULTIPLICITY_TOLERANCE: f64 = 1e-6;
/// Largest group the numeric path will average over.
pub const MAX_GROUP_ELEMENTS: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubspaceError {
    #[error("the form has no positive directions (b+ = 0)")]
    NoPositiveDirections,
    #[error("generator {generator} does not have finite order")]
    NotFiniteOrder { generator: usize },
    #[error("the generated group has more than {bound} elements")]
    GroupTooLarge { bound: usize },
    #[error("generator {generator} is not an involution")]
    NotInvolution { generator: usize },
    #[error("generators {0} and {1} do not commute")]
    NotCommuting(usize, usize),
    #[error("expected order {expected}, found {found}")]
    WrongOrder { expected: u64, found: u64 },
    #[error("order {0} is not even")]
    OddOrder(u64),
    #[error("generator {generator} has an eigenvalue other than ±1 on V")]
    EigenvalueNotPlusMinusOne { generator: usize },
    #[error("the generators are not simultaneously diagonalizable on V")]
    NotSimultaneouslyDiagonalizable,
    #[error("multiplicity of {label} is {value}, not an integer")]
    MultiplicityNotIntegral { label: String, value: f64 },
    #[error("numeric validation failed: {0}")]
    InternalToleranceFailure(String),
}

// ---------------------------------------------------------------------------
// Subspaces
// ---------------------------------------------------------------------------

/// A subspace of `H² ⊗ ℝ` given by basis columns, intended to be positive
/// definite for the lattice form.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveSubspace<T> {
    basis: Vec<Vec<T>>,
}

impl<T: Field> PositiveSubspace<T> {
    pub fn new(basis: Vec<Vec<T>>) -> Self {
        PositiveSubspace { basis }
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gram(&self, l: &Lattice) -> Matrix<T> {
        l.gram().to_field::<T>().restrict_form(&self.basis)
    }

    pub fn is_positive_definite(&self, l: &Lattice) -> bool {
        self.dim() == 0 || self.gram(l).is_positive_definite()
    }

    /// Matrix of `f|V` in this basis, or `None` if `f` does not preserve the
    /// span (up to the scalar type's tolerance).
    pub fn restrict(&self, f: &Isometry) -> Option<Matrix<T>> {
        if self.basis.is_empty() {
            return Some(Matrix::zeros(0, 0));
        }
        let n = f.dim();
        let b = Matrix::from_columns(n, &self.basis);
        let fb = &f.matrix().to_field::<T>() * &b;
        b.solve(&fb)
    }

    pub fn is_invariant(&self, f: &Isometry) -> bool {
        self.restrict(f).is_some()
    }

    pub fn to_f64(&self) -> PositiveSubspace<f64> {
        PositiveSubspace {
            basis: self.basis.iter().map(|v| v.iter().map(Field::to_f64).collect()).collect(),
        }
    }
}

/// Invariant maximal positive subspace, tagged by how it was computed.
#[derive(Debug, Clone, PartialEq)]
pub enum InvariantSubspace {
    Exact(PositiveSubspace<Rational>),
    Numeric(PositiveSubspace<f64>),
}

impl InvariantSubspace {
    pub fn dim(&self) -> usize {
        match self {
            InvariantSubspace::Exact(v) => v.dim(),
            InvariantSubspace::Numeric(v) => v.dim(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, InvariantSubspace::Exact(_))
    }

    pub fn to_f64(&self) -> PositiveSubspace<f64> {
        match self {
            InvariantSubspace::Exact(v) => v.to_f64(),
            InvariantSubspace::Numeric(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceOptions {
    /// `None` averages the identity form; `Some(seed)` averages a seeded
    /// random integral positive definite form instead.
    pub seed: Option<u64>,
    pub max_order: u64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        SubspaceOptions { seed: None, max_order: DEFAULT_MAX_ORDER }
    }
}

// ---------------------------------------------------------------------------
// Decompositions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvolutionUV {
    pub u: usize,
    pub v: usize,
}

/// Multiplicities of `ℝ`, `ℝ₋` and `ℂ_d` (`0 < d < k/2`) for `ℤ_k`.
/// Only nonzero `ℂ_d` multiplicities are stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicMults {
    pub k: u64,
    pub m_triv: usize,
    pub m_sign: usize,
    /// Serialised as `[[d, m], ...]`: integer map keys do not survive the
    /// buffering of an internally tagged enum.
    #[serde(with = "pairs")]
    pub m_d: BTreeMap<u64, usize>,
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u64, usize>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u64, usize>, D::Error> {
        Ok(Vec::<(u64, usize)>::deserialize(d)?.into_iter().collect())
    }
}

impl CyclicMults {
    pub fn new(k: u64, m_triv: usize, m_sign: usize, m_d: BTreeMap<u64, usize>) -> Self {
        let m_d = m_d.into_iter().filter(|&(_, m)| m > 0).collect();
        CyclicMults { k, m_triv, m_sign, m_d }
    }

    pub fn dim(&self) -> usize {
        self.m_triv + self.m_sign + 2 * self.m_d.values().sum::<usize>()
    }

    pub fn mult(&self, d: u64) -> usize {
        self.m_d.get(&d).copied().unwrap_or(0)
    }
}

/// Row `i` holds the signs of generator `i` on the common eigenbasis of `V`
/// (`1` for `−1`). Columns are sorted in descending lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsMatrix {
    pub eps: Vec<Vec<u8>>,
}

impl EpsMatrix {
    pub fn rows(&self) -> usize {
        self.eps.len()
    }

    pub fn cols(&self) -> usize {
        self.eps.first().map_or(0, Vec::len)
    }

    /// Builds the matrix from `(pattern, multiplicity)` pairs, where bit `i`
    /// of a pattern records whether generator `i` acts by `−1`.
    pub fn from_patterns(d: usize, patterns: &[(Vec<bool>, usize)]) -> Self {
        let mut cols: Vec<Vec<u8>> = Vec::new();
        for (pattern, mult) in patterns {
            for _ in 0..*mult {
                cols.push(pattern.iter().map(|&b| u8::from(b)).collect());
            }
        }
        cols.sort_by(|a, b| b.cmp(a));
        let eps = (0..d).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        EpsMatrix { eps }
    }

    /// Determinant over `F₂`; `None` unless square.
    pub fn det_f2(&self) -> Option<u8> {
        let n = self.rows();
        if self.cols() != n {
            return None;
        }
        let mut m: Vec<Vec<u8>> = self.eps.clone();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| m[r][col] == 1) else {
                return Some(0);
            };
            m.swap(col, p);
            for r in col + 1..n {
                if m[r][col] == 1 {
                    for c in col..n {
                        m[r][c] ^= m[col][c];
                    }
                }
            }
        }
        Some(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KleinPQRS {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub s: usize,
}

impl KleinPQRS {
    pub fn dim(&self) -> usize {
        self.p + self.q + self.r + self.s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RepDecomposition {
    Involution(InvolutionUV),
    Cyclic(CyclicMults),
    Eps(EpsMatrix),
    Klein(KleinPQRS),
}

fn subscript(n: impl fmt::Display) -> String {
    n.to_string()
        .chars()
        .map(|c| char::from_u32(0x2080 + c.to_digit(10).unwrap_or(0)).unwrap_or(c))
        .collect()
}

fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    if n == 1 {
        return String::new();
    }
    n.to_string().chars().map(|c| DIGITS[c.to_digit(10).unwrap_or(0) as usize]).collect()
}

fn join_terms(terms: Vec<String>) -> String {
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" ⊕ ")
    }
}

impl fmt::Display for InvolutionUV {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(u, v) = ({}, {})", self.u, self.v)
    }
}

impl fmt::Display for CyclicMults {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        if self.m_triv > 0 {
            terms.push(format!("ℝ{}", superscript(self.m_triv)));
        }
        if self.m_sign > 0 {
            terms.push(format!("ℝ₋{}", superscript(self.m_sign)));
        }
        for (d, m) in &self.m_d {
            terms.push(format!("ℂ{}{}", subscript(d), superscript(*m)));
        }
        f.write_str(&join_terms(terms))
    }
}

impl fmt::Display for EpsMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .eps
            .iter()
            .map(|r| r.iter().map(u8::to_string).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "eps = [{}]", rows.join("; "))
    }
}

impl fmt::Display for KleinPQRS {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p, q, r, s) = ({}, {}, {}, {})", self.p, self.q, self.r, self.s)
    }
}

impl fmt::Display for RepDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepDecomposition::Involution(d) => d.fmt(f),
            RepDecomposition::Cyclic(d) => d.fmt(f),
            RepDecomposition::Eps(d) => d.fmt(f),
            RepDecomposition::Klein(d) => d.fmt(f),
        }
    }
}

// ---------------------------------------------------------------------------
// Exact path
// ---------------------------------------------------------------------------

/// A simultaneous eigenspace of commuting involutions together with the
/// positive vectors extracted from it.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBlock {
    /// `true` at position `i` when generator `i` acts by `−1`.
    pub pattern: Vec<bool>,
    pub basis: Vec<Vec<Rational>>,
    pub positive: Vec<Vec<Rational>>,
}

/// `ker((f − sI) B)` mapped back through `B`.
fn eigen_restrict(f: &QMatrix, basis: &[Vec<Rational>], sign: i64) -> Vec<Vec<Rational>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let n = f.nrows();
    let b = Matrix::from_columns(n, basis);
    let shifted = f.shift_diagonal(&Rational::from_i64(sign));
    let coeffs = (&shifted * &b).kernel();
    coeffs.iter().map(|a| b.mul_vec(a)).collect()
}

fn positive_part(l: &Lattice, basis: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    if basis.is_empty() {
        return Vec::new();
    }
    let gram = l.gram().to_rational().restrict_form(basis);
    let (p, d) = gram.congruence_diagonalize();
    let b = Matrix::from_columns(l.rank(), basis);
    d.iter()
        .enumerate()
        .filter(|(_, x)| x.is_positive())
        .map(|(i, _)| b.mul_vec(&p.column(i)))
        .collect()
}

fn require_commuting_involutions(fs: &[Isometry]) -> Result<(), SubspaceError> {
    for (i, f) in fs.iter().enumerate() {
        if !f.is_involution() {
            return Err(SubspaceError::NotInvolution { generator: i });
        }
    }
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            if !commute(&fs[i], &fs[j]).unwrap_or(false) {
                return Err(SubspaceError::NotCommuting(i, j));
            }
        }
    }
    Ok(())
}

/// Nonzero simultaneous eigenspaces of commuting involutions, ordered
/// lexicographically by sign pattern (generator 0 first, `+` before `−`).
pub fn simultaneous_eigenspaces(
    l: &Lattice,
    fs: &[Isometry],
) -> Result<Vec<EigenBlock>, SubspaceError> {
    require_commuting_involutions(fs)?;
    let n = l.rank();
    let start: Vec<Vec<Rational>> = (0..n)
        .map(|i| (0..n).map(|j| Rational::from_i64(i64::from(i == j))).collect())
        .collect();
    let mut blocks = vec![(Vec::new(), start)];
    for f in fs {
        let fq = f.to_rational();
        let mut next = Vec::new();
        for (pattern, basis) in blocks {
            for (negated, sign) in [(false, 1), (true, -1)] {
                let sub = eigen_restrict(&fq, &basis, sign);
                if !sub.is_empty() {
                    let mut p: Vec<bool> = pattern.clone();
                    p.push(negated);
                    next.push((p, sub));
                }
            }
        }
        blocks = next;
    }
    Ok(blocks
        .into_iter()
        .map(|(pattern, basis)| {
            let positive = positive_part(l, &basis);
            EigenBlock { pattern, basis, positive }
        })
        .collect())
}

fn exact_subspace(blocks: &[EigenBlock]) -> PositiveSubspace<Rational> {
    PositiveSubspace::new(blocks.iter().flat_map(|b| b.positive.iter().cloned()).collect())
}

// ---------------------------------------------------------------------------
// Numeric path
// ---------------------------------------------------------------------------

/// All elements of the group generated by `fs`, identity first.
pub fn group_elements(
    fs: &[Isometry],
    max_order: u64,
    bound: usize,
) -> Result<Vec<Isometry>, SubspaceError> {
    let n = fs.first().map_or(0, Isometry::dim);
    for (i, f) in fs.iter().enumerate() {
        order(f, max_order).map_err(|_| SubspaceError::NotFiniteOrder { generator: i })?;
    }
    let id = Isometry::identity(n);
    let mut seen: HashSet<Isometry> = HashSet::from([id.clone()]);
    let mut out = vec![id];
    let mut frontier = 0;
    while frontier < out.len() {
        let h = out[frontier].clone();
        frontier += 1;
        for f in fs {
            let next = f.compose(&h);
            if seen.insert(next.clone()) {
                if out.len() == bound {
                    return Err(SubspaceError::GroupTooLarge { bound });
                }
                out.push(next);
            }
        }
    }
    Ok(out)
}

fn auxiliary_form(n: usize, seed: Option<u64>) -> IntMatrix {
    let Some(seed) = seed else {
        return IntMatrix::identity(n);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = IntMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            a[(r, c)] = rng.gen_range(-2..=2);
        }
    }
    (&a.transpose() * &a).shift_diagonal(&-1)
}

fn to_dmatrix(m: &IntMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] as f64)
}

/// LLL reduction of a positive definite integer Gram matrix `a`, returning
/// the unimodular change of basis `u` (columns are the reduced vectors).
///
/// The Gram matrix is updated exactly in `i128`; only the Gram-Schmidt data
/// used for decisions are floating point. A step cap keeps the loop finite;
/// the partial result is still a valid unimodular basis.
fn lll_reduce(a: &IntMatrix) -> Vec<Vec<i128>> {
    const DELTA: f64 = 0.99;
    const MAX_STEPS: usize = 200_000;
    let n = a.nrows();
    let mut g: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)] as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect();
    let gso = |g: &[Vec<i128>]| {
        let mut mu = vec![vec![0.0f64; n]; n];
        let mut b = vec![0.0f64; n];
        for i in 0..n {
            for j in 0..i {
                let mut x = g[i][j] as f64;
                for l in 0..j {
                    x -= mu[j][l] * mu[i][l] * b[l];
                }
                mu[i][j] = x / b[j];
            }
            let mut x = g[i][i] as f64;
            for l in 0..i {
                x -= mu[i][l] * mu[i][l] * b[l];
            }
            b[i] = x;
        }
        (mu, b)
    };
    let (mut mu, mut b) = gso(&g);
    let mut k = 1;
    let mut steps = 0;
    while k < n && steps < MAX_STEPS {
        steps += 1;
        let mut changed = false;
        for j in (0..k).rev() {
            if mu[k][j].abs() <= 0.5 {
                continue;
            }
            let q = mu[k][j].round();
            let qi = q as i128;
            // b_k -= q b_j: column then row operation on the Gram matrix
            for row in g.iter_mut() {
                row[k] -= qi * row[j];
            }
            for col in 0..n {
                g[k][col] -= qi * g[j][col];
            }
            for row in u.iter_mut() {
                row[k] -= qi * row[j];
            }
            for l in 0..j {
                mu[k][l] -= q * mu[j][l];
            }
            mu[k][j] -= q;
            changed = true;
        }
        if changed {
            (mu, b) = gso(&g);
        }
        if b[k] < (DELTA - mu[k][k - 1] * mu[k][k - 1]) * b[k - 1] {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            for row in u.iter_mut() {
                row.swap(k, k - 1);
            }
            (mu, b) = gso(&g);
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    u
}

/// Averages the auxiliary form over `elements` and returns the `b⁺`
/// generalized eigenvectors of the lattice form with positive eigenvalue,
/// orthonormal for the averaged form.
///
/// The averaged form is an exact integer matrix whose condition number grows
/// like the square of the entries of the group elements. The eigenproblem is
/// solved in an LLL-reduced basis of it, where it is well conditioned, and the
/// result is mapped back.
fn numeric_subspace(
    l: &Lattice,
    elements: &[Isometry],
    seed: Option<u64>,
) -> Result<PositiveSubspace<f64>, SubspaceError> {
    let n = l.rank();
    let g0 = auxiliary_form(n, seed);
    let mut sum = IntMatrix::zeros(n, n);
    for h in elements {
        sum = sum.add(&(&(&h.matrix().transpose() * &g0) * h.matrix()));
    }
    let u = lll_reduce(&sum);
    let u_f = DMatrix::from_fn(n, n, |r, c| u[r][c] as f64);
    // exact congruences into the reduced basis
    let congruent = |m: &IntMatrix| {
        DMatrix::from_fn(n, n, |i, j| {
            let mut acc = 0i128;
            for a in 0..n {
                if u[a][i] == 0 {
                    continue;
                }
                for b in 0..n {
                    acc += u[a][i] * m[(a, b)] as i128 * u[b][j];
                }
            }
            acc as f64
        })
    };
    let g = congruent(&sum) / elements.len() as f64;
    let chol = nalgebra::Cholesky::new(g).ok_or_else(|| {
        SubspaceError::InternalToleranceFailure("averaged form is not positive definite".into())
    })?;
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| SubspaceError::InternalToleranceFailure("singular Cholesky factor".into()))?;
    let form = congruent(l.gram());
    let m = &l_inv * form * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(m);
    if let Some(bad) = eig.eigenvalues.iter().find(|v| v.abs() <= SPLIT_TOLERANCE) {
        return Err(SubspaceError::InternalToleranceFailure(format!(
            "generalized eigenvalue {bad:e} within {SPLIT_TOLERANCE:e} of zero"
        )));
    }
    let positive: Vec<usize> =
        (0..n).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    if positive.len() != l.b_plus() {
        return Err(SubspaceError::InternalToleranceFailure(format!(
            "found {} positive directions, expected b+ = {}",
            positive.len(),
            l.b_plus()
        )));
    }
    let back = u_f * l_inv.transpose();
    let basis = positive
        .iter()
        .map(|&i| {
            let v = &back * eig.eigenvectors.column(i);
            v.iter().copied().collect()
        })
        .collect();
    Ok(PositiveSubspace::new(basis))
}

/// Matrix of `f|V` from the normal equations, with a residual check.
pub fn restrict_numeric(
    f: &Isometry,
    v: &PositiveSubspace<f64>,
) -> Result<DMatrix<f64>, SubspaceError> {
    let n = f.dim();
    let d = v.dim();
    if d == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let b = DMatrix::from_fn(n, d, |r, c| v.basis()[c][r]);
    let fb = to_dmatrix(f.matrix()) * &b;
    let normal = b.transpose() * &b;
    let r = normal
        .lu()
        .solve(&(b.transpose() * &fb))
        .ok_or_else(|| SubspaceError::InternalToleranceFailure("degenerate basis of V".into()))?;
    let residual = (&fb - &b * &r).amax();
    let scale = fb.amax().max(1.0);
    if residual > CLUSTER_TOLERANCE * scale {
        return Err(SubspaceError::InternalToleranceFailure(format!(
            "V is not invariant (residual {residual:e})"
        )));
    }
    Ok(r)
}

/// Computes an invariant maximal positive definite subspace.
pub fn invariant_positive_subspace(
    l: &Lattice,
    action: &GroupAction,
    opts: &SubspaceOptions,
) -> Result<InvariantSubspace, SubspaceError> {
    if l.b_plus() == 0 {
        return Err(SubspaceError::NoPositiveDirections);
    }
    let gens = &action.generators;
    if require_commuting_involutions(gens).is_ok() {
        let blocks = simultaneous_eigenspaces(l, gens)?;
        return Ok(InvariantSubspace::Exact(exact_subspace(&blocks)));
    }
    let elements = group_elements(gens, opts.max_order, MAX_GROUP_ELEMENTS)?;
    let v = numeric_subspace(l, &elements, opts.seed)?;
    for f in gens {
        restrict_numeric(f, &v)?;
    }
    Ok(InvariantSubspace::Numeric(v))
}

/// `(u, v)`: positive indices of the form on `ker(f − I)` and `ker(f + I)`.
pub fn decompose_involution(l: &Lattice, f: &Isometry) -> Result<InvolutionUV, SubspaceError> {
    let blocks = simultaneous_eigenspaces(l, std::slice::from_ref(f))?;
    let count = |neg: bool| {
        blocks.iter().filter(|b| b.pattern[0] == neg).map(|b| b.positive.len()).sum()
    };
    Ok(InvolutionUV { u: count(false), v: count(true) })
}

/// `(p, q, r, s)`: positive indices on `E₊₊, E₋₊, E₊₋, E₋₋`, the first sign
/// being that of `f1`.
pub fn decompose_klein(
    l: &Lattice,
    f1: &Isometry,
    f2: &Isometry,
) -> Result<KleinPQRS, SubspaceError> {
    let blocks = simultaneous_eigenspaces(l, &[f1.clone(), f2.clone()])?;
    let count = |a: bool, b: bool| {
        blocks
            .iter()
            .filter(|blk| blk.pattern == [a, b])
            .map(|blk| blk.positive.len())
            .sum()
    };
    Ok(KleinPQRS {
        p: count(false, false),
        q: count(true, false),
        r: count(false, true),
        s: count(true, true),
    })
}

/// Multiplicities of the real irreducibles of `ℤ_k` in a real matrix `r`
/// with `r^k = I`, from kernel dimensions of the real factors of `x^k − 1`,
/// cross-checked against the character inner products.
pub fn cyclic_multiplicities(r: &DMatrix<f64>, k: u64) -> Result<CyclicMults, SubspaceError> {
    if k % 2 != 0 {
        return Err(SubspaceError::OddOrder(k));
    }
    let m = k / 2;
    let kf = k as f64;
    let dim = r.nrows();
    let id = DMatrix::<f64>::identity(dim, dim);
    // r^k = I makes r semisimple, so the eigenvalue count at e^{±iθ} is the
    // nullity of r² − 2cos(θ) r + I (halved for a conjugate pair)
    let mut counts = vec![0usize; k as usize];
    for j in 0..=m {
        let theta = 2.0 * PI * j as f64 / kf;
        let factor = match j {
            0 => r - &id,
            j if j == m => r + &id,
            _ => r * r - r * (2.0 * theta.cos()) + &id,
        };
        let n = nullity(&factor);
        counts[j as usize] = if j == 0 || j == m { n } else { n / 2 };
        if j != 0 && j != m {
            if n % 2 != 0 {
                return Err(SubspaceError::InternalToleranceFailure(format!(
                    "odd kernel dimension {n} at angle 2π·{j}/{k}"
                )));
            }
            counts[(k - j) as usize] = n / 2;
        }
    }
    let located: usize = counts.iter().sum();
    if located != dim {
        return Err(SubspaceError::InternalToleranceFailure(format!(
            "only {located} of {dim} eigenvalues are {k}-th roots of unity"
        )));
    }
    // character inner products from traces of powers
    let mut traces = Vec::with_capacity(k as usize);
    let mut power = DMatrix::<f64>::identity(dim, dim);
    for _ in 0..k {
        traces.push(power.trace());
        power = &power * r;
    }
    let character = |j: u64| -> f64 {
        traces
            .iter()
            .enumerate()
            .map(|(t, tr)| tr * (2.0 * PI * (j * t as u64) as f64 / kf).cos())
            .sum::<f64>()
            / kf
    };
    let label = |j: u64| match j {
        0 => "ℝ".to_string(),
        j if j == m => "ℝ₋".to_string(),
        j => format!("ℂ{}", subscript(j)),
    };
    for j in 0..=m {
        let value = character(j);
        let rounded = value.round();
        if (value - rounded).abs() > MULTIPLICITY_TOLERANCE || rounded < 0.0 {
            return Err(SubspaceError::MultiplicityNotIntegral { label: label(j), value });
        }
        let clustered = counts[j as usize];
        if rounded as usize != clustered {
            return Err(SubspaceError::InternalToleranceFailure(format!(
                "character gives {} copies of {}, eigenvalues give {clustered}",
                rounded,
                label(j)
            )));
        }
    }
    let m_d = (1..m).map(|d| (d, counts[d as usize])).collect();
    Ok(CyclicMults::new(k, counts[0], counts[m as usize], m_d))
}

fn nullity(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let scale = sv.max().max(1.0);
    sv.iter().filter(|&&s| s <= CLUSTER_TOLERANCE * scale).count()
}

/// Representation type of `⟨f⟩ ≅ ℤ_k` on the invariant subspace `v`.
pub fn decompose_cyclic<T: Field>(
    f: &Isometry,
    k: u64,
    v: &PositiveSubspace<T>,
) -> Result<CyclicMults, SubspaceError> {
    if k % 2 != 0 {
        return Err(SubspaceError::OddOrder(k));
    }
    let found = order(f, DEFAULT_MAX_ORDER.max(k)).unwrap_or(0);
    if found != k {
        return Err(SubspaceError::WrongOrder { expected: k, found });
    }
    let r = restrict_numeric(f, &v.to_f64())?;
    cyclic_multiplicities(&r, k)
}

/// Simultaneous `±1` eigenbasis of commuting generators on `V`.
pub fn decompose_diagonal_commuting(
    l: &Lattice,
    fs: &[Isometry],
    v: &InvariantSubspace,
) -> Result<EpsMatrix, SubspaceError> {
    let d = fs.len();
    for i in 0..d {
        for j in i + 1..d {
            if !commute(&fs[i], &fs[j]).unwrap_or(false) {
                return Err(SubspaceError::NotCommuting(i, j));
            }
        }
    }
    if require_commuting_involutions(fs).is_ok() {
        let blocks = simultaneous_eigenspaces(l, fs)?;
        let patterns: Vec<(Vec<bool>, usize)> =
            blocks.into_iter().map(|b| (b.pattern, b.positive.len())).collect();
        return Ok(EpsMatrix::from_patterns(d, &patterns));
    }
    let vf = v.to_f64();
    let dim = vf.dim();
    let mut reps = Vec::with_capacity(d);
    for (i, f) in fs.iter().enumerate() {
        let r = restrict_numeric(f, &vf)?;
        let sq = &r * &r - DMatrix::<f64>::identity(dim, dim);
        if sq.amax() > CLUSTER_TOLERANCE {
            return Err(SubspaceError::EigenvalueNotPlusMinusOne { generator: i });
        }
        reps.push(r);
    }
    // projector onto the joint eigenspace with a given sign pattern
    let mut patterns = Vec::new();
    for bits in 0..(1u64 << d) {
        let pattern: Vec<bool> = (0..d).map(|i| bits >> i & 1 == 1).collect();
        let mut p = DMatrix::<f64>::identity(dim, dim);
        for (r, &neg) in reps.iter().zip(&pattern) {
            let s = if neg { -1.0 } else { 1.0 };
            p = p * ((DMatrix::identity(dim, dim) + r * s) * 0.5);
        }
        let t = p.trace();
        if (t - t.round()).abs() > MULTIPLICITY_TOLERANCE {
            return Err(SubspaceError::NotSimultaneouslyDiagonalizable);
        }
        if t.round() >= 1.0 {
            patterns.push((pattern, t.round() as usize));
        }
    }
    if patterns.iter().map(|(_, m)| m).sum::<usize>() != dim {
        return Err(SubspaceError::NotSimultaneouslyDiagonalizable);
    }
    Ok(EpsMatrix::from_patterns(d, &patterns))
}

/// True iff `v` has dimension `b⁺`, is positive definite and is preserved by
/// every generator.
pub fn validate_subspace<T: Field>(
    l: &Lattice,
    action: &GroupAction,
    v: &PositiveSubspace<T>,
) -> bool {
    v.dim() == l.b_plus()
        && v.is_positive_definite(l)
        && action.generators.iter().all(|f| v.is_invariant(f))
}

impl CyclicMults {
    /// The involution decomposition read as a `ℤ₂` representation.
    pub fn from_involution(uv: InvolutionUV) -> Self {
        CyclicMults::new(2, uv.u, uv.v, BTreeMap::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::{block_builder, reflection, BlockOp, GroupShape};
    use crate::lattice::Summand;

    fn z2_spin() -> (Lattice, Isometry) {
        let l = Lattice::new(vec![Summand::hyperbolic(4), Summand::e8(-1, 2)]).unwrap();
        let f = block_builder(&l, &[BlockOp::MinusIdOn(vec![0, 1, 2, 3]), BlockOp::Swap(4, 5)])
            .unwrap();
        (l, f)
    }

    fn order4() -> (Lattice, Isometry) {
        let l = Lattice::diagonal(3, 12).unwrap();
        let x = vec![0, 2, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        let y = vec![6, 0, 0, 1, 0, 1, 0, 2, 2, 2, 2, 2, 2, 2, 2];
        let z = vec![0, 0, 2, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0];
        let f = reflection(&l, &x)
            .unwrap()
            .compose(&reflection(&l, &y).unwrap())
            .compose(&reflection(&l, &z).unwrap());
        (l, f)
    }

    #[test]
    fn spin_involution_negates_the_positive_part() {
        let (l, f) = z2_spin();
        assert_eq!(decompose_involution(&l, &f).unwrap(), InvolutionUV { u: 0, v: 4 });
        let action = GroupAction::new(&l, GroupShape::Z2, vec![f]).unwrap();
        let v = invariant_positive_subspace(&l, &action, &SubspaceOptions::default()).unwrap();
        let InvariantSubspace::Exact(v) = v else { panic!("expected the exact path") };
        assert_eq!(v.dim(), 4);
        assert!(validate_subspace(&l, &action, &v));
    }

    #[test]
    fn identity_involution() {
        let l = Lattice::diagonal(2, 5).unwrap();
        let id = Isometry::identity(7);
        assert_eq!(decompose_involution(&l, &id).unwrap(), InvolutionUV { u: 2, v: 0 });
        assert_eq!(
            decompose_klein(&l, &id, &id).unwrap(),
            KleinPQRS { p: 2, q: 0, r: 0, s: 0 }
        );
        let neg = id.negate();
        assert_eq!(
            decompose_klein(&l, &neg, &neg).unwrap(),
            KleinPQRS { p: 0, q: 0, r: 0, s: 2 }
        );
    }

    #[test]
    fn coxeter_element_is_sign_plus_rotation() {
        let (l, f) = order4();
        let action = GroupAction::new(&l, GroupShape::CyclicEven(4), vec![f.clone()]).unwrap();
        let v = invariant_positive_subspace(&l, &action, &SubspaceOptions::default()).unwrap();
        assert!(!v.is_exact());
        let v = v.to_f64();
        assert!(validate_subspace(&l, &action, &v));
        let mults = decompose_cyclic(&f, 4, &v).unwrap();
        assert_eq!(mults, CyclicMults::new(4, 0, 1, BTreeMap::from([(1, 1)])));
        assert_eq!(mults.to_string(), "ℝ₋ ⊕ ℂ₁");
    }

    #[test]
    fn seeds_do_not_change_the_cyclic_type() {
        let (l, f) = order4();
        let action = GroupAction::new(&l, GroupShape::CyclicEven(4), vec![f.clone()]).unwrap();
        let base = {
            let v = invariant_positive_subspace(&l, &action, &SubspaceOptions::default()).unwrap();
            decompose_cyclic(&f, 4, &v.to_f64()).unwrap()
        };
        for seed in [1, 7, 99] {
            let opts = SubspaceOptions { seed: Some(seed), ..Default::default() };
            let v = invariant_positive_subspace(&l, &action, &opts).unwrap();
            assert_eq!(decompose_cyclic(&f, 4, &v.to_f64()).unwrap(), base);
        }
    }

    #[test]
    fn wrong_order_is_reported() {
        let (l, f) = order4();
        let v = PositiveSubspace::<f64>::new(vec![vec![0.0; l.rank()]; 0]);
        assert_eq!(
            decompose_cyclic(&f, 6, &v),
            Err(SubspaceError::WrongOrder { expected: 6, found: 4 })
        );
        assert_eq!(decompose_cyclic(&f, 3, &v), Err(SubspaceError::OddOrder(3)));
    }

    #[test]
    fn commuting_reflections_give_identity_eps() {
        let l = Lattice::diagonal(2, 11).unwrap();
        let e1 = vec![0, 2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        let e2 = vec![6, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 1];
        let fs = vec![reflection(&l, &e1).unwrap(), reflection(&l, &e2).unwrap()];
        let action = GroupAction::new(&l, GroupShape::FreeAbelian(2), fs.clone()).unwrap();
        let v = invariant_positive_subspace(&l, &action, &SubspaceOptions::default()).unwrap();
        let eps = decompose_diagonal_commuting(&l, &fs, &v).unwrap();
        assert_eq!(eps.eps, vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(eps.det_f2(), Some(1));
        let same = vec![fs[0].clone(), fs[0].clone()];
        let eps = decompose_diagonal_commuting(&l, &same, &v).unwrap();
        assert_eq!(eps.det_f2(), Some(0));
    }

    #[test]
    fn numeric_eps_for_finite_order_generators() {
        // an order-4 generator squaring to the involution on V
        let l = Lattice::diagonal(1, 2).unwrap();
        let rot = block_builder(
            &l,
            &[BlockOp::Matrix(vec![vec![-1, 0, 0], vec![0, 0, -1], vec![0, 1, 0]])],
        )
        .unwrap();
        let action = GroupAction::new(&l, GroupShape::FreeAbelian(1), vec![rot.clone()]).unwrap();
        let v = invariant_positive_subspace(&l, &action, &SubspaceOptions::default()).unwrap();
        assert!(!v.is_exact());
        let eps = decompose_diagonal_commuting(&l, &[rot], &v).unwrap();
        assert_eq!(eps.eps, vec![vec![1]]);
    }

    #[test]
    fn eigenvalue_outside_plus_minus_one() {
        let l = Lattice::diagonal(2, 1).unwrap();
        let rot = block_builder(
            &l,
            &[BlockOp::Matrix(vec![vec![0, -1, 0], vec![1, 0, 0], vec![0, 0, 1]])],
        )
        .unwrap();
        let action = GroupAction::new(&l, GroupShape::FreeAbelian(1), vec![rot.clone()]).unwrap();
        let v = invariant_positive_subspace(&l, &action, &SubspaceOptions::default()).unwrap();
        assert_eq!(
            decompose_diagonal_commuting(&l, &[rot], &v),
            Err(SubspaceError::EigenvalueNotPlusMinusOne { generator: 0 })
        );
    }

    #[test]
    fn eps_columns_sorted_descending() {
        let eps = EpsMatrix::from_patterns(
            2,
            &[(vec![false, true], 1), (vec![true, true], 1), (vec![true, false], 1)],
        );
        assert_eq!(eps.eps, vec![vec![1, 1, 0], vec![1, 0, 1]]);
        assert_eq!(eps.det_f2(), None);
    }

    #[test]
    fn infinite_order_is_rejected() {
        let l = Lattice::diagonal(3, 12).unwrap();
        let x = vec![0, 2, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
        let y = vec![3, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1];
        let f = reflection(&l, &x).unwrap().compose(&reflection(&l, &y).unwrap());
        let action = GroupAction::new(&l, GroupShape::CyclicEven(4), vec![f]).unwrap();
        let opts = SubspaceOptions { max_order: 50, ..Default::default() };
        assert_eq!(
            invariant_positive_subspace(&l, &action, &opts),
            Err(SubspaceError::NotFiniteOrder { generator: 0 })
        );
    }

    #[test]
    fn lll_reduces_a_skewed_form() {
        // Gram matrix of the basis (1, 0), (1000, 1) for the standard form
        let a = IntMatrix::from_rows(vec![vec![1, 1000], vec![1000, 1_000_001]]).unwrap();
        let u = lll_reduce(&a);
        let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
        assert_eq!(det.abs(), 1);
        let reduced: Vec<Vec<i128>> = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| (0..2).flat_map(|p| (0..2).map(move |q| (p, q))).map(|(p, q)| u[p][i] * a[(p, q)] as i128 * u[q][j]).sum())
                    .collect()
            })
            .collect();
        assert_eq!(reduced, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn lll_keeps_a_reduced_form() {
        let a = IntMatrix::from_rows(vec![vec![2, 1, 0], vec![1, 2, 0], vec![0, 0, 3]]).unwrap();
        let u = lll_reduce(&a);
        assert_eq!(u, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn decomposition_json_is_tagged() {
        let d = RepDecomposition::Klein(KleinPQRS { p: 0, q: 3, r: 3, s: 6 });
        let j = serde_json::to_value(&d).unwrap();
        assert_eq!(j["type"], "klein");
        assert_eq!(j["s"], 6);
        let back: RepDecomposition = serde_json::from_value(j).unwrap();
        assert_eq!(back, d);

        let c = RepDecomposition::Cyclic(CyclicMults::new(6, 0, 1, BTreeMap::from([(1, 2), (2, 1)])));
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains(r#""m_d":[[1,2],[2,1]]"#), "{text}");
        assert_eq!(serde_json::from_str::<RepDecomposition>(&text).unwrap(), c);
    }
}
