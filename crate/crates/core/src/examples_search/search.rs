//! Bounded enumeration of characteristic vectors and of orthogonal systems of
//! square-2 classes.
//!
//! The form is block diagonal, so a vector is enumerated block by block from
//! precomputed per-block candidate lists. Each partial vector carries its
//! square and the values of a few linear functionals; suffix minima and maxima
//! over the remaining blocks prune branches that cannot reach the targets.

use std::ops::ControlFlow;

use rayon::prelude::*;

use thiserror::Error;

use crate::lattice::{Lattice, Vector};

/// Largest number of candidates allowed for a single block.
pub const MAX_BLOCK_CANDIDATES: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("coefficient bound must be at least 1 (got {0})")]
    InvalidBound(i64),
    #[error("search box has {found} coordinates, lattice has rank {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty coordinate range at index {0}")]
    EmptyRange(usize),
    #[error("requested {count} vectors but b+ = {b_plus}")]
    CountExceedsBPlus { count: usize, b_plus: usize },
    #[error("block {block} alone has {count} candidates (limit {limit}); lower the bound")]
    TooLarge { block: usize, count: usize, limit: usize },
    #[error("coordinates too large for the packed inner products; lower the bound")]
    CoefficientOverflow,
}

/// Per-coordinate inclusive bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl SearchBox {
    pub fn symmetric(n: usize, bound: i64) -> Self {
        SearchBox { lo: vec![-bound; n], hi: vec![bound; n] }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.len() == self.lo.len() && v.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    fn validate(&self, n: usize) -> Result<(), SearchError> {
        if self.lo.len() != n || self.hi.len() != n {
            return Err(SearchError::DimensionMismatch {
                expected: n,
                found: self.lo.len().max(self.hi.len()),
            });
        }
        match (0..n).find(|&i| self.lo[i] > self.hi[i]) {
            Some(i) => Err(SearchError::EmptyRange(i)),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    First,
    All { limit: Option<usize> },
}

impl SearchMode {
    fn cap(&self) -> usize {
        match self {
            SearchMode::First => 1,
            SearchMode::All { limit } => limit.unwrap_or(usize::MAX),
        }
    }
}

/// Sign representative: first nonzero coordinate positive.
pub fn canonical_sign(v: &[i64]) -> Vector {
    match v.iter().find(|&&x| x != 0) {
        Some(&x) if x < 0 => v.iter().map(|y| -y).collect(),
        _ => v.to_vec(),
    }
}

fn is_canonical(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_none_or(|&x| x > 0)
}

struct Candidate {
    coords: Vec<i64>,
    square: i64,
}

struct Enumerator {
    rank: usize,
    offsets: Vec<usize>,
    blocks: Vec<Vec<Candidate>>,
    sq_suffix_min: Vec<i64>,
    sq_suffix_max: Vec<i64>,
}

fn block_candidates(
    gram: &crate::IntMatrix,
    lo: &[i64],
    hi: &[i64],
    parity: Option<&[u8]>,
    block: usize,
) -> Result<Vec<Candidate>, SearchError> {
    let ranges: Vec<Vec<i64>> = (0..lo.len())
        .map(|i| {
            (lo[i]..=hi[i])
                .filter(|x| parity.is_none_or(|p| x.rem_euclid(2) as u8 == p[i]))
                .collect()
        })
        .collect();
    let count = ranges.iter().try_fold(1usize, |acc, r| acc.checked_mul(r.len()));
    match count {
        Some(c) if c <= MAX_BLOCK_CANDIDATES => {}
        other => {
            return Err(SearchError::TooLarge {
                block,
                count: other.unwrap_or(usize::MAX),
                limit: MAX_BLOCK_CANDIDATES,
            })
        }
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; ranges.len()];
    if ranges.iter().any(|r| r.is_empty()) {
        return Ok(out);
    }
    loop {
        let coords: Vec<i64> = idx.iter().zip(&ranges).map(|(&i, r)| r[i]).collect();
        let square = gram.bilinear(&coords, &coords);
        out.push(Candidate { coords, square });
        // odometer, last coordinate fastest, so the list is lexicographic
        let mut pos = ranges.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < ranges[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn suffix<F: Fn(&[Candidate]) -> i64>(blocks: &[Vec<Candidate>], f: F) -> Vec<i64> {
    let mut out = vec![0i64; blocks.len() + 1];
    for b in (0..blocks.len()).rev() {
        out[b] = out[b + 1] + f(&blocks[b]);
    }
    out
}

impl Enumerator {
    fn new(l: &Lattice, sbox: &SearchBox, characteristic: bool) -> Result<Self, SearchError> {
        sbox.validate(l.rank())?;
        let residue = characteristic.then(|| l.characteristic_residue());
        let mut blocks = Vec::new();
        let mut offsets = Vec::new();
        for (bi, b) in l.blocks().iter().enumerate() {
            let r = b.range();
            let parity = residue.as_ref().map(|w| &w[r.clone()]);
            blocks.push(block_candidates(&b.gram, &sbox.lo[r.clone()], &sbox.hi[r], parity, bi)?);
            offsets.push(b.offset);
        }
        let sq_suffix_min =
            suffix(&blocks, |c| c.iter().map(|x| x.square).min().unwrap_or(0));
        let sq_suffix_max =
            suffix(&blocks, |c| c.iter().map(|x| x.square).max().unwrap_or(0));
        Ok(Enumerator { rank: l.rank(), offsets, blocks, sq_suffix_min, sq_suffix_max })
    }

    /// Calls `visit` on every vector with square in `[lo, hi]` and
    /// `v · h = 0` for every `h` in `functionals`, in lexicographic order.
    fn run<F>(&self, square: (i64, i64), functionals: &[Vec<i64>], mut visit: F)
    where
        F: FnMut(&[i64]) -> ControlFlow<()>,
    {
        if self.blocks.iter().any(|b| b.is_empty()) {
            return;
        }
        // per functional, per block, per candidate value
        let values: Vec<Vec<Vec<i64>>> = functionals
            .iter()
            .map(|h| {
                self.blocks
                    .iter()
                    .zip(&self.offsets)
                    .map(|(cands, &off)| {
                        cands
                            .iter()
                            .map(|c| c.coords.iter().enumerate().map(|(t, x)| x * h[off + t]).sum())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let bounds: Vec<(Vec<i64>, Vec<i64>)> = values
            .iter()
            .map(|per_block| {
                let n = per_block.len();
                let mut mn = vec![0i64; n + 1];
                let mut mx = vec![0i64; n + 1];
                for b in (0..n).rev() {
                    mn[b] = mn[b + 1] + per_block[b].iter().copied().min().unwrap_or(0);
                    mx[b] = mx[b + 1] + per_block[b].iter().copied().max().unwrap_or(0);
                }
                (mn, mx)
            })
            .collect();
        let mut state = State {
            v: vec![0; self.rank],
            lin: vec![0; functionals.len()],
        };
        let ctx = Ctx { e: self, square, values: &values, bounds: &bounds };
        let _ = ctx.descend(0, 0, &mut state, &mut visit);
    }
}

struct State {
    v: Vec<i64>,
    lin: Vec<i64>,
}

struct Ctx<'a> {
    e: &'a Enumerator,
    square: (i64, i64),
    values: &'a [Vec<Vec<i64>>],
    bounds: &'a [(Vec<i64>, Vec<i64>)],
}

impl Ctx<'_> {
    fn feasible(&self, b: usize, sq: i64, lin: &[i64]) -> bool {
        let e = self.e;
        if sq + e.sq_suffix_min[b] > self.square.1 || sq + e.sq_suffix_max[b] < self.square.0 {
            return false;
        }
        lin.iter()
            .zip(self.bounds)
            .all(|(&x, (mn, mx))| x + mn[b] <= 0 && 0 <= x + mx[b])
    }

    fn descend<F>(&self, b: usize, sq: i64, st: &mut State, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[i64]) -> ControlFlow<()>,
    {
        if b == self.e.blocks.len() {
            return visit(&st.v);
        }
        let off = self.e.offsets[b];
        for (ci, cand) in self.e.blocks[b].iter().enumerate() {
            let nsq = sq + cand.square;
            for (j, vals) in self.values.iter().enumerate() {
                st.lin[j] += vals[b][ci];
            }
            if self.feasible(b + 1, nsq, &st.lin) {
                st.v[off..off + cand.coords.len()].copy_from_slice(&cand.coords);
                let flow = self.descend(b + 1, nsq, st, visit);
                if flow.is_break() {
                    return flow;
                }
            }
            for (j, vals) in self.values.iter().enumerate() {
                st.lin[j] -= vals[b][ci];
            }
        }
        ControlFlow::Continue(())
    }
}

/// Keeps `v` if it is its own sign representative, or if its negation lies
/// outside the box (so the representative would otherwise be lost).
fn sign_filter(sbox: &SearchBox, v: &[i64]) -> Option<Vector> {
    if is_canonical(v) {
        Some(v.to_vec())
    } else {
        let neg: Vector = v.iter().map(|x| -x).collect();
        (!sbox.contains(&neg)).then_some(neg)
    }
}

/// Characteristic vectors with coordinates in `[-bound, bound]` and square
/// in `[lo, hi]`, one per sign pair, in lexicographic order.
pub fn find_characteristic(
    l: &Lattice,
    bound: i64,
    square: (i64, i64),
) -> Result<Vec<Vector>, SearchError> {
    if bound < 1 {
        return Err(SearchError::InvalidBound(bound));
    }
    find_characteristic_in(l, &SearchBox::symmetric(l.rank(), bound), square, SearchMode::All { limit: None })
}

pub fn find_characteristic_in(
    l: &Lattice,
    sbox: &SearchBox,
    square: (i64, i64),
    mode: SearchMode,
) -> Result<Vec<Vector>, SearchError> {
    let e = Enumerator::new(l, sbox, true)?;
    let cap = mode.cap();
    let mut out = Vec::new();
    e.run(square, &[], |v| {
        if let Some(w) = sign_filter(sbox, v) {
            out.push(w);
        }
        if out.len() >= cap {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out.sort();
    out.dedup();
    Ok(out)
}

/// Systems `e_1 < … < e_count` (lexicographic, each sign-canonical) of
/// pairwise orthogonal square-2 vectors orthogonal to `c`.
pub fn find_orthogonal_square2_system(
    l: &Lattice,
    c: &[i64],
    count: usize,
    bound: i64,
    mode: SearchMode,
) -> Result<Vec<Vec<Vector>>, SearchError> {
    if bound < 1 {
        return Err(SearchError::InvalidBound(bound));
    }
    find_orthogonal_square2_system_in(l, c, count, &SearchBox::symmetric(l.rank(), bound), mode)
}

pub fn find_orthogonal_square2_system_in(
    l: &Lattice,
    c: &[i64],
    count: usize,
    sbox: &SearchBox,
    mode: SearchMode,
) -> Result<Vec<Vec<Vector>>, SearchError> {
    let n = l.rank();
    if c.len() != n {
        return Err(SearchError::DimensionMismatch { expected: n, found: c.len() });
    }
    if count > l.b_plus() {
        return Err(SearchError::CountExceedsBPlus { count, b_plus: l.b_plus() });
    }
    let e = Enumerator::new(l, sbox, false)?;
    let gc = l.gram().mul_vec(c);
    let mut level = Vec::new();
    if count > 0 {
        e.run((2, 2), std::slice::from_ref(&gc), |v| {
            if let Some(w) = sign_filter(sbox, v) {
                level.push(w);
            }
            ControlFlow::Continue(())
        });
    }
    level.sort();
    level.dedup();
    let table = DotTable::new(l, &level).ok_or(SearchError::CoefficientOverflow)?;
    Ok(collect_systems(&table, count, mode.cap())
        .into_iter()
        .map(|idx| idx.iter().map(|&i| level[i].clone()).collect())
        .collect())
}

/// Rows of the candidate list and their Gram images, flattened with a
/// padded stride so the inner product loop vectorises.
struct DotTable {
    len: usize,
    stride: usize,
    rows: Vec<i32>,
    images: Vec<i32>,
}

impl DotTable {
    /// `None` when an inner product could overflow `i32`.
    fn new(l: &Lattice, level: &[Vector]) -> Option<Self> {
        let stride = l.rank().div_ceil(8) * 8;
        let images_i64: Vec<Vec<i64>> = level.iter().map(|v| l.gram().mul_vec(v)).collect();
        let max_row = level.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        let max_img = images_i64.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        let worst = (max_row as u128) * (max_img as u128) * (l.rank() as u128);
        if worst > i32::MAX as u128 {
            return None;
        }
        let mut rows = vec![0i32; level.len() * stride];
        let mut images = vec![0i32; level.len() * stride];
        for (i, (v, gv)) in level.iter().zip(&images_i64).enumerate() {
            for t in 0..v.len() {
                rows[i * stride + t] = v[t] as i32;
                images[i * stride + t] = gv[t] as i32;
            }
        }
        Some(DotTable { len: level.len(), stride, rows, images })
    }

    fn orthogonal(&self, i: usize, j: usize) -> bool {
        let a = &self.rows[i * self.stride..(i + 1) * self.stride];
        let b = &self.images[j * self.stride..(j + 1) * self.stride];
        a.iter().zip(b).map(|(x, y)| x * y).sum::<i32>() == 0
    }
}

/// Index tuples `i_1 < ... < i_count` of pairwise orthogonal rows, in
/// lexicographic order, at most `cap` of them.
///
/// Work is split over the first index and merged back in order, so the
/// result does not depend on how rayon schedules the chunks.
fn collect_systems(table: &DotTable, count: usize, cap: usize) -> Vec<Vec<usize>> {
    if count == 0 {
        return vec![Vec::new()];
    }
    const CHUNK: usize = 256;
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut first = 0;
    while first < table.len && out.len() < cap {
        let end = (first + CHUNK).min(table.len);
        let remaining = cap - out.len();
        let per_start: Vec<Vec<Vec<usize>>> = (first..end)
            .into_par_iter()
            .map(|i| {
                let cands: Vec<usize> =
                    (i + 1..table.len).filter(|&j| table.orthogonal(i, j)).collect();
                let mut found = Vec::new();
                let mut chosen = vec![i];
                extend_system(table, &cands, count, remaining, &mut chosen, &mut found);
                found
            })
            .collect();
        for systems in per_start {
            out.extend(systems);
        }
        out.truncate(cap);
        first = end;
    }
    out
}

/// Depth-first clique extension: `cands` are the indices after the last
/// chosen one that are orthogonal to everything chosen so far.
fn extend_system(
    table: &DotTable,
    cands: &[usize],
    count: usize,
    cap: usize,
    chosen: &mut Vec<usize>,
    found: &mut Vec<Vec<usize>>,
) {
    if chosen.len() == count {
        found.push(chosen.clone());
        return;
    }
    for (pos, &j) in cands.iter().enumerate() {
        if found.len() >= cap {
            return;
        }
        let next: Vec<usize> = if chosen.len() + 1 == count {
            Vec::new()
        } else {
            cands[pos + 1..].iter().copied().filter(|&t| table.orthogonal(j, t)).collect()
        };
        chosen.push(j);
        extend_system(table, &next, count, cap, chosen, found);
        chosen.pop();
    }
}
