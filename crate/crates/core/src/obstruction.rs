//! Verdict engine: evaluates the hypotheses of the `H⁺`-bundle obstruction
//! for each supported group shape, computes the top Stiefel-Whitney class of
//! the associated flat bundle and reports a [`Verdict`].
//!
//! The conclusion is one-sided. `Obstructed` means the action on `H²` is not
//! induced by a smooth action of the given shape (with an invariant
//! Spin^c-structure of characteristic `c`) for any smooth structure;
//! `Inconclusive` means the class vanishes and nothing follows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::char_classes::{sw_biproj, sw_lens, sw_rp, sw_torus, CohomClass, CohomError};
use crate::invariant_subspace::{
    decompose_cyclic, decompose_diagonal_commuting, decompose_involution, decompose_klein,
    invariant_positive_subspace, CyclicMults, InvolutionUV, RepDecomposition,
    SubspaceError, SubspaceOptions,
};
use crate::isometry::{commute, order, GroupAction, GroupShape, Isometry, DEFAULT_MAX_ORDER};
use crate::lattice::Lattice;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("characteristic vector has length {found}, lattice has rank {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("internal validation failure: {0}")]
    Internal(#[from] SubspaceError),
    #[error("internal validation failure: {0}")]
    Cohomology(#[from] CohomError),
}

/// The lattice together with the topological assumptions the checkers rely
/// on (`b₁ = 0`, torsion-free `H²`).
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldData {
    pub lattice: Lattice,
    pub assume_simply_connected: bool,
}

impl ManifoldData {
    pub fn new(lattice: Lattice) -> Self {
        ManifoldData { lattice, assume_simply_connected: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    Obstructed,
    Inconclusive,
    Vacuous,
    HypothesisFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub status: Status,
    pub detail: String,
    /// `false` only for the non-vacuity test, whose failure yields
    /// `Vacuous` rather than `HypothesisFailed`.
    pub required: bool,
}

impl Hypothesis {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        Hypothesis {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
            required: true,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    pub sigma: i64,
    pub b_plus: usize,
    pub c_squared: i64,
    pub c_squared_minus_sigma: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decomposition: Option<RepDecomposition>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w_top: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base: Option<String>,
    /// Total Stiefel-Whitney class as a list of monomials.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sw_class: Option<Vec<String>>,
    /// Witnessing split `(d1, d2)` of the Klein four checker.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub conclusion: Conclusion,
    pub hypotheses: Vec<Hypothesis>,
    pub invariants: Invariants,
    pub certificate: String,
}

impl Verdict {
    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Klein four: try every split `d1 + d2 = d` rather than only the
    /// split `(q, r + s)`.
    pub all_splits: bool,
    pub subspace: SubspaceOptions,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { all_splits: true, subspace: SubspaceOptions::default() }
    }
}

// ---------------------------------------------------------------------------
// Shared machinery
// ---------------------------------------------------------------------------

struct Report {
    hypotheses: Vec<Hypothesis>,
    invariants: Invariants,
    trace: String,
}

impl Report {
    fn push(&mut self, h: Hypothesis) {
        self.hypotheses.push(h);
    }

    fn note(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.trace, "{}", line.as_ref());
    }

    fn required_pass(&self) -> bool {
        self.hypotheses.iter().filter(|h| h.required).all(Hypothesis::passed)
    }

    fn record_class(&mut self, w: &CohomClass) {
        self.invariants.w_top = Some(w.top_component());
        self.invariants.base = Some(w.ring().to_string());
        self.invariants.sw_class = Some(w.terms());
        self.note(format!("base B = {}", w.ring()));
        self.note(format!("w(H+) = {w}"));
        self.note(format!("w_{}(H+) = {}", w.ring().base_dim(), w.top_component()));
    }

    fn finish(mut self) -> Verdict {
        let conclusion = if !self.required_pass() {
            Conclusion::HypothesisFailed
        } else if self.hypotheses.iter().any(|h| !h.required && !h.passed()) {
            Conclusion::Vacuous
        } else if self.invariants.w_top == Some(1) {
            Conclusion::Obstructed
        } else {
            Conclusion::Inconclusive
        };
        let why = match conclusion {
            Conclusion::HypothesisFailed => {
                let failed: Vec<&str> = self
                    .hypotheses
                    .iter()
                    .filter(|h| h.required && !h.passed())
                    .map(|h| h.name.as_str())
                    .collect();
                format!("failed hypotheses: {}", failed.join(", "))
            }
            Conclusion::Vacuous => {
                "c != 0 and c^2 >= 0: the family has a nowhere vanishing section, so w_d = 0 a priori"
                    .into()
            }
            Conclusion::Obstructed => {
                "w_d = 1: no smooth realisation of this shape, for any smooth structure".into()
            }
            Conclusion::Inconclusive => "w_d = 0: the obstruction vanishes".into(),
        };
        self.note(format!("conclusion: {conclusion:?} ({why})"));
        Verdict {
            conclusion,
            hypotheses: self.hypotheses,
            invariants: self.invariants,
            certificate: self.trace,
        }
    }
}

fn start(x: &ManifoldData, fs: &[&Isometry], c: &[i64]) -> Result<Report, CheckError> {
    let l = &x.lattice;
    if c.len() != l.rank() {
        return Err(CheckError::DimensionMismatch { expected: l.rank(), found: c.len() });
    }
    let c_sq = l.square(c).expect("length checked");
    let mut r = Report {
        hypotheses: Vec::new(),
        invariants: Invariants {
            sigma: l.sigma(),
            b_plus: l.b_plus(),
            c_squared: c_sq,
            c_squared_minus_sigma: c_sq - l.sigma(),
            decomposition: None,
            w_top: None,
            base: None,
            sw_class: None,
            split: None,
        },
        trace: String::new(),
    };
    r.note(format!(
        "lattice: rank {}, b+ = {}, b- = {}, sigma = {}, {:?}",
        l.rank(),
        l.b_plus(),
        l.b_minus(),
        l.sigma(),
        l.parity()
    ));
    r.note(format!("c = {c:?}, c^2 = {c_sq}, c^2 - sigma = {}", c_sq - l.sigma()));
    for h in shared_hypotheses(x, fs, c) {
        r.note(format!(
            "[{}] {}: {}",
            if h.passed() { "pass" } else { "fail" },
            h.name,
            h.detail
        ));
        r.push(h);
    }
    Ok(r)
}

fn log_push(r: &mut Report, h: Hypothesis) {
    r.note(format!("[{}] {}: {}", if h.passed() { "pass" } else { "fail" }, h.name, h.detail));
    r.push(h);
}

/// Hypotheses common to every checker, in a fixed order. Failures are
/// recorded, never thrown.
pub fn shared_hypotheses(x: &ManifoldData, fs: &[&Isometry], c: &[i64]) -> Vec<Hypothesis> {
    let l = &x.lattice;
    let mut out = Vec::new();
    out.push(Hypothesis::new(
        "simply-connected",
        x.assume_simply_connected,
        if x.assume_simply_connected {
            "assumed: b1 = 0 and H^2 torsion-free"
        } else {
            "the checkers need b1 = 0 and torsion-free H^2"
        },
    ));
    out.push(Hypothesis::new(
        "b-plus-positive",
        l.b_plus() > 0,
        format!("b+ = {}", l.b_plus()),
    ));
    let dims_ok = c.len() == l.rank();
    let characteristic = dims_ok && l.is_characteristic(c).unwrap_or(false);
    out.push(Hypothesis::new(
        "characteristic",
        characteristic,
        if characteristic {
            "<c, x> = x^2 mod 2 for every basis vector x".to_string()
        } else {
            "c is not characteristic, so it is not c(Gamma) of a Spin^c-structure".to_string()
        },
    ));
    let moved: Vec<usize> = fs
        .iter()
        .enumerate()
        .filter(|(_, f)| !dims_ok || f.apply(c) != c)
        .map(|(i, _)| i)
        .collect();
    out.push(Hypothesis::new(
        "c-fixed",
        moved.is_empty(),
        if moved.is_empty() {
            "every generator fixes c, so the Spin^c-structure is invariant".to_string()
        } else {
            format!("generators {moved:?} move c")
        },
    ));
    let (c_sq, sigma) = (l.square(c).unwrap_or(0), l.sigma());
    out.push(Hypothesis::new(
        "c-squared-above-signature",
        c_sq > sigma,
        format!("c^2 = {c_sq}, sigma = {sigma}"),
    ));
    let nonzero = c.iter().any(|&v| v != 0);
    let vacuous = nonzero && c_sq >= 0;
    out.push(Hypothesis {
        name: "non-vacuous".into(),
        status: if vacuous { Status::Fail } else { Status::Pass },
        detail: if vacuous {
            format!("c != 0 with c^2 = {c_sq} >= 0 forces w_d = 0")
        } else {
            "c = 0 or c^2 < 0".into()
        },
        required: false,
    });
    out
}

fn mod16(r: &Report) -> Hypothesis {
    let diff = r.invariants.c_squared_minus_sigma;
    Hypothesis::new(
        "c-squared-minus-sigma-8-mod-16",
        diff.rem_euclid(16) == 8,
        format!("c^2 - sigma = {diff} = {} mod 16", diff.rem_euclid(16)),
    )
}

// ---------------------------------------------------------------------------
// Checkers
// ---------------------------------------------------------------------------

fn involution_class(
    r: &mut Report,
    l: &Lattice,
    f: &Isometry,
) -> Result<(InvolutionUV, CohomClass), CheckError> {
    let uv = decompose_involution(l, f)?;
    let w = sw_rp(l.b_plus(), uv.u, uv.v)?;
    r.note(format!("V: f acts with {uv}"));
    Ok((uv, w))
}

/// `ℤ₂` generated by an involution `f`, base `RP^d` with `d = b⁺`.
pub fn check_involution(x: &ManifoldData, f: &Isometry, c: &[i64]) -> Result<Verdict, CheckError> {
    let l = &x.lattice;
    let mut r = start(x, &[f], c)?;
    let is_inv = f.is_involution();
    log_push(
        &mut r,
        Hypothesis::new(
            "involution",
            is_inv,
            if is_inv { "f^2 = I" } else { "f^2 != I" },
        ),
    );
    if is_inv && l.b_plus() > 0 {
        r.note("Spin^c extension over RP^d: automatic");
        let (uv, w) = involution_class(&mut r, l, f)?;
        r.invariants.decomposition = Some(RepDecomposition::Involution(uv));
        r.record_class(&w);
    }
    Ok(r.finish())
}

/// True iff `mults` has the form `ℝ₋ ⊕ ℂ_{d₁} ⊕ … ⊕ ℂ_{d_u}` with odd `dᵢ`.
fn pattern_a(m: &CyclicMults, u: usize) -> bool {
    m.m_triv == 0
        && m.m_sign == 1
        && m.m_d.keys().all(|d| d % 2 == 1)
        && m.m_d.values().sum::<usize>() == u
}

/// True iff `k/2` is odd and `mults` has the form `ℝ₋^{2a+1} ⊕ ℂ_{d₁} ⊕ … ⊕
/// ℂ_{d_b}` with odd `dᵢ` and `a + b = u`.
fn pattern_b(m: &CyclicMults, u: usize) -> bool {
    (m.k / 2) % 2 == 1
        && m.m_triv == 0
        && m.m_sign % 2 == 1
        && m.m_d.keys().all(|d| d % 2 == 1)
        && (m.m_sign - 1) / 2 + m.m_d.values().sum::<usize>() == u
}

/// `ℤ_k` generated by `f` with `k` even, `k ≥ 4`; base `L^{2u+1}(k)` with
/// `b⁺ = 2u + 1`.
pub fn check_cyclic(
    x: &ManifoldData,
    f: &Isometry,
    k: u64,
    c: &[i64],
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    let l = &x.lattice;
    let mut r = start(x, &[f], c)?;
    let even = k >= 4 && k % 2 == 0;
    log_push(
        &mut r,
        Hypothesis::new("even-order", even, format!("k = {k} (must be even and at least 4)")),
    );
    let found = order(f, DEFAULT_MAX_ORDER.max(k));
    let order_ok = found == Ok(k);
    log_push(
        &mut r,
        Hypothesis::new(
            "order",
            order_ok,
            match found {
                Ok(o) => format!("f has order {o}, expected {k}"),
                Err(e) => format!("{e}, expected order {k}"),
            },
        ),
    );
    let odd = l.b_plus() % 2 == 1;
    log_push(
        &mut r,
        Hypothesis::new("b-plus-odd", odd, format!("b+ = {}", l.b_plus())),
    );
    if even && order_ok && odd {
        r.note("Spin^c extension over the lens space: automatic");
        let action = GroupAction { shape: GroupShape::CyclicEven(k), generators: vec![f.clone()] };
        let v = invariant_positive_subspace(l, &action, &opts.subspace)?;
        let mults = decompose_cyclic(f, k, &v.to_f64())?;
        let u = (l.b_plus() - 1) / 2;
        r.note(format!("V: f acts as {mults}"));
        let w = sw_lens(u, k, &mults)?;
        if pattern_a(&mults, u) {
            r.note("pattern: R- + C_d1 + ... + C_du with all d_i odd");
        } else if pattern_b(&mults, u) {
            r.note("pattern: R-^(2a+1) + C_d1 + ... + C_db with all d_i odd, k/2 odd");
        } else {
            r.note("pattern: not one of the listed forbidden forms");
        }
        r.invariants.decomposition = Some(RepDecomposition::Cyclic(mults));
        r.record_class(&w);
    }
    Ok(r.finish())
}

/// `d = b⁺` commuting generators; base `T^d`.
pub fn check_commuting(
    x: &ManifoldData,
    fs: &[Isometry],
    c: &[i64],
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    let l = &x.lattice;
    let refs: Vec<&Isometry> = fs.iter().collect();
    let mut r = start(x, &refs, c)?;
    let d = fs.len();
    log_push(
        &mut r,
        Hypothesis::new(
            "generator-count",
            d == l.b_plus(),
            format!("{d} generators, b+ = {}", l.b_plus()),
        ),
    );
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
        .filter(|&(i, j)| !commute(&fs[i], &fs[j]).unwrap_or(false))
        .collect();
    log_push(
        &mut r,
        Hypothesis::new(
            "commuting",
            pairs.is_empty(),
            if pairs.is_empty() {
                "generators commute pairwise".to_string()
            } else {
                format!("non-commuting pairs {pairs:?}")
            },
        ),
    );
    if d >= 3 {
        let h = mod16(&r);
        log_push(&mut r, h);
    } else {
        r.note("Spin^c extension over T^d, d <= 2: automatic");
    }
    if d == l.b_plus() && pairs.is_empty() && d > 0 {
        let action = GroupAction { shape: GroupShape::FreeAbelian(d), generators: fs.to_vec() };
        let eps = invariant_positive_subspace(l, &action, &opts.subspace)
            .and_then(|v| decompose_diagonal_commuting(l, fs, &v));
        match eps {
            Ok(eps) => {
                log_push(
                    &mut r,
                    Hypothesis::new("diagonal-on-v", true, "every f_i acts on V by a diagonal +-1 matrix"),
                );
                r.note(format!("V: {eps}"));
                let w = sw_torus(&eps)?;
                let det = eps.det_f2().unwrap_or(0);
                r.note(format!("det(eps) over F2 = {det}"));
                r.invariants.decomposition = Some(RepDecomposition::Eps(eps));
                r.record_class(&w);
            }
            Err(
                e @ (SubspaceError::EigenvalueNotPlusMinusOne { .. }
                | SubspaceError::NotSimultaneouslyDiagonalizable
                | SubspaceError::NotFiniteOrder { .. }
                | SubspaceError::GroupTooLarge { .. }),
            ) => {
                log_push(&mut r, Hypothesis::new("diagonal-on-v", false, e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(r.finish())
}

/// `ℤ₂ × ℤ₂` generated by commuting involutions; base `RP^{d1} × RP^{d2}`.
pub fn check_klein(
    x: &ManifoldData,
    f1: &Isometry,
    f2: &Isometry,
    c: &[i64],
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    let l = &x.lattice;
    let mut r = start(x, &[f1, f2], c)?;
    let h = mod16(&r);
    log_push(&mut r, h);
    let inv = f1.is_involution() && f2.is_involution();
    log_push(
        &mut r,
        Hypothesis::new(
            "involutions",
            inv,
            if inv { "f1^2 = f2^2 = I" } else { "some generator does not square to I" },
        ),
    );
    let comm = commute(f1, f2).unwrap_or(false);
    log_push(
        &mut r,
        Hypothesis::new(
            "commuting",
            comm,
            if comm { "f1 f2 = f2 f1" } else { "f1 f2 != f2 f1" },
        ),
    );
    if !(inv && comm && l.b_plus() > 0) {
        return Ok(r.finish());
    }
    let pqrs = decompose_klein(l, f1, f2)?;
    r.note(format!("V: {pqrs}"));
    r.invariants.decomposition = Some(RepDecomposition::Klein(pqrs));
    let d = l.b_plus();

    // Cases settled by one generator acting on V alone.
    let delegate: Option<(usize, &Isometry)> = if d == 1 {
        None
    } else if pqrs.p == 0 && pqrs.q == 0 {
        Some((2, f2))
    } else if pqrs.p == 0 && pqrs.r == 0 {
        Some((1, f1))
    } else {
        None
    };
    if d == 1 {
        r.note("b+ = 1: apply the involution criterion to f1 and f2 separately");
        let mut best: Option<CohomClass> = None;
        for (i, f) in [(1, f1), (2, f2)] {
            let (uv, w) = involution_class(&mut r, l, f)?;
            r.note(format!("f{i}: {uv}, w_1 = {}", w.top_component()));
            if best.as_ref().is_none_or(|b| b.top_component() < w.top_component()) {
                best = Some(w);
            }
        }
        r.record_class(&best.expect("two generators"));
        return Ok(r.finish());
    }
    if let Some((i, f)) = delegate {
        r.note(format!("f{i} acts as -1 on V: apply the involution criterion to f{i}"));
        let (_, w) = involution_class(&mut r, l, f)?;
        r.record_class(&w);
        return Ok(r.finish());
    }
    let splits: Vec<usize> = if opts.all_splits {
        (1..d).collect()
    } else if pqrs.q >= 1 && pqrs.q < d {
        vec![pqrs.q]
    } else {
        Vec::new()
    };
    let mut chosen: Option<(usize, CohomClass)> = None;
    for d1 in splits {
        let w = sw_biproj(d1, d - d1, &pqrs)?;
        let top = w.top_component();
        r.note(format!("split ({d1}, {}): w_d = {top}", d - d1));
        let better = chosen.as_ref().is_none_or(|(_, b)| b.top_component() < top);
        if better {
            chosen = Some((d1, w));
        }
        if top == 1 {
            break;
        }
    }
    match chosen {
        Some((d1, w)) => {
            r.invariants.split = Some([d1, d - d1]);
            r.record_class(&w);
        }
        None => r.note("no admissible split"),
    }
    Ok(r.finish())
}

/// Dispatches on the action's shape.
pub fn check(
    x: &ManifoldData,
    action: &GroupAction,
    c: &[i64],
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    let g = &action.generators;
    match action.shape {
        GroupShape::Z2 => check_involution(x, &g[0], c),
        GroupShape::CyclicEven(k) => check_cyclic(x, &g[0], k, c, opts),
        GroupShape::FreeAbelian(_) => check_commuting(x, g, c, opts),
        GroupShape::KleinFour => check_klein(x, &g[0], &g[1], c, opts),
    }
}

/// Recomputes `w_top` from a recorded decomposition, independently of the
/// checker that produced it.
pub fn regenerate_w_top(v: &Verdict) -> Option<u8> {
    let d = v.invariants.b_plus;
    let class = match v.invariants.decomposition.as_ref()? {
        RepDecomposition::Involution(uv) => sw_rp(d, uv.u, uv.v).ok()?,
        RepDecomposition::Cyclic(m) => sw_lens((d - 1) / 2, m.k, m).ok()?,
        RepDecomposition::Eps(e) => sw_torus(e).ok()?,
        RepDecomposition::Klein(pqrs) => match v.invariants.split {
            Some([d1, d2]) => sw_biproj(d1, d2, pqrs).ok()?,
            None => {
                // b+ = 1 or delegated: some generator acts by -1 on V
                let top = pqrs.p + pqrs.r == 0 || pqrs.p + pqrs.q == 0;
                return Some(u8::from(top));
            }
        },
    };
    Some(class.top_component())
}
