use std::collections::BTreeMap;

use thiserror::Error;

use crate::isometry::{block_builder, reflection, BlockOp, GroupAction, GroupShape, Isometry};
use crate::lattice::{Lattice, Summand, Vector};
use crate::obstruction::{check, CheckError, CheckOptions, Conclusion, ManifoldData, Verdict};

pub type Params = BTreeMap<String, i64>;

pub const EXAMPLE_IDS: &[&str] =
    &["z2-spin", "z2k", "order4", "commuting-pair", "e1e2-involution", "klein"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FixtureError {
    #[error("unknown example id {0:?} (known: {ids})", ids = EXAMPLE_IDS.join(", "))]
    UnknownId(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("fixture construction failed: {0}")]
    Build(String),
}

#[derive(Debug, Clone)]
pub struct ExampleFixture {
    pub id: String,
    pub params: Params,
    pub lattice: Lattice,
    pub action: GroupAction,
    pub c: Vector,
    pub expected: Conclusion,
    /// Where the data come from and which claims are not checked here.
    pub provenance: String,
}

impl ExampleFixture {
    pub fn manifold(&self) -> ManifoldData {
        ManifoldData::new(self.lattice.clone())
    }
}

struct ParamReader<'a> {
    given: &'a Params,
    used: Vec<&'static str>,
    resolved: Params,
}

impl<'a> ParamReader<'a> {
    fn new(given: &'a Params) -> Self {
        ParamReader { given, used: Vec::new(), resolved: Params::new() }
    }

    fn get(&mut self, name: &'static str, default: i64) -> i64 {
        self.used.push(name);
        let value = self.given.get(name).copied().unwrap_or(default);
        self.resolved.insert(name.to_string(), value);
        value
    }

    fn finish(self) -> Result<Params, FixtureError> {
        if let Some(extra) = self.given.keys().find(|k| !self.used.contains(&k.as_str())) {
            return Err(FixtureError::InvalidParams(format!(
                "unknown parameter {extra:?} (accepted: {})",
                self.used.join(", ")
            )));
        }
        Ok(self.resolved)
    }
}

fn require(ok: bool, msg: impl Into<String>) -> Result<(), FixtureError> {
    if ok {
        Ok(())
    } else {
        Err(FixtureError::InvalidParams(msg.into()))
    }
}

fn build_err(e: impl std::fmt::Display) -> FixtureError {
    FixtureError::Build(e.to_string())
}

/// Builds a named example. Parameters not given take the documented default.
pub fn build_example(id: &str, params: &Params) -> Result<ExampleFixture, FixtureError> {
    let mut reader = ParamReader::new(params);
    let (lattice, action, c, expected, provenance) = match id {
        "z2-spin" => {
            let a = reader.get("a", 4);
            let b = reader.get("b", 1);
            require(a >= 1 && b >= 1, "z2-spin needs a >= 1 and b >= 1")?;
            z2_spin(a as usize, b as usize)?
        }
        "z2k" => {
            let a = reader.get("a", 3);
            let k = reader.get("k", 3);
            let b = reader.get("b", 1);
            require(a >= 1 && a % 2 == 1, "z2k needs odd a >= 1")?;
            require(k >= 3 && k % 2 == 1, "z2k needs odd k >= 3 (group order 2k >= 6)")?;
            require(b >= 1, "z2k needs b >= 1")?;
            z2k(a as usize, k as usize, b as usize)?
        }
        "order4" => {
            let corrected = reader.get("corrected", 0);
            require(corrected == 0 || corrected == 1, "order4 takes corrected=0 or corrected=1")?;
            order4(corrected == 1)?
        }
        "commuting-pair" => {
            let flip = reader.get("flip", 0);
            require(flip == 0 || flip == 1, "commuting-pair takes flip=0 or flip=1")?;
            commuting_pair(flip == 1)?
        }
        "e1e2-involution" => e1e2_involution()?,
        "klein" => {
            let a = reader.get("a", 3);
            let b = reader.get("b", 3);
            let cc = reader.get("c", 1);
            require(a >= 1 && b >= 1 && cc >= 1, "klein needs a, b, c >= 1")?;
            klein(a as usize, b as usize, cc as usize)?
        }
        other => return Err(FixtureError::UnknownId(other.to_string())),
    };
    let params = reader.finish()?;
    Ok(ExampleFixture { id: id.to_string(), params, lattice, action, c, expected, provenance })
}

/// Builds a fixture and runs the public checker on it.
pub fn reproduce(
    id: &str,
    params: &Params,
    opts: &CheckOptions,
) -> Result<(ExampleFixture, Result<Verdict, CheckError>), FixtureError> {
    let fx = build_example(id, params)?;
    let verdict = check(&fx.manifold(), &fx.action, &fx.c, opts);
    Ok((fx, verdict))
}

type Built = (Lattice, GroupAction, Vector, Conclusion, String);

fn z2_spin(a: usize, b: usize) -> Result<Built, FixtureError> {
    let l = Lattice::new(vec![Summand::hyperbolic(a), Summand::e8(-1, 2 * b)]).map_err(build_err)?;
    let mut ops = vec![BlockOp::MinusIdOn((0..a).collect())];
    ops.extend((0..b).map(|i| BlockOp::Swap(a + 2 * i, a + 2 * i + 1)));
    let f = block_builder(&l, &ops).map_err(build_err)?;
    let action = GroupAction::new(&l, GroupShape::Z2, vec![f]).map_err(build_err)?;
    let c = vec![0; l.rank()];
    let note = format!(
        "#{a}(S2xS2) # {}(-E8): f = -Id on {a}H and swaps the -E8 summands in pairs; c = 0. \
         Realisability by a locally linear involution and, for a > 3b, by a diffeomorphism \
         are not checked here.",
        2 * b
    );
    Ok((l, action, c, Conclusion::Obstructed, note))
}

fn z2k(a: usize, k: usize, b: usize) -> Result<Built, FixtureError> {
    let l = Lattice::new(vec![Summand::hyperbolic(a), Summand::e8(-1, 2 * k * b)])
        .map_err(build_err)?;
    let mut ops: Vec<BlockOp> = (0..a)
        .map(|i| BlockOp::Local { block: i, rows: vec![vec![0, -1], vec![-1, 0]] })
        .collect();
    for g in 0..b {
        let start = a + g * 2 * k;
        ops.push(BlockOp::Cycle((start..start + 2 * k).collect()));
    }
    let f = block_builder(&l, &ops).map_err(build_err)?;
    let order = 2 * k as u64;
    let action = GroupAction::new(&l, GroupShape::CyclicEven(order), vec![f]).map_err(build_err)?;
    let c = vec![0; l.rank()];
    let note = format!(
        "#{a}(S2xS2) # {}(-E8): f = [[0,-1],[-1,0]] on each H and cycles of length {order} on \
         the -E8 summands; group of order {order}; c = 0. Realisability claims are not checked \
         here (they also need a > 3kb).",
        2 * k * b
    );
    Ok((l, action, c, Conclusion::Obstructed, note))
}

fn order4(corrected: bool) -> Result<Built, FixtureError> {
    let l = Lattice::diagonal(3, 12).map_err(build_err)?;
    let c: Vector = vec![3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1];
    let x: Vector = vec![0, 2, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0];
    let y: Vector = if corrected {
        vec![6, 0, 0, 1, 0, 1, 0, 2, 2, 2, 2, 2, 2, 2, 2]
    } else {
        vec![3, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]
    };
    let z: Vector = vec![0, 0, 2, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0];
    let r = |v: &Vector| reflection(&l, v).map_err(build_err);
    let f = r(&x)?.compose(&r(&y)?).compose(&r(&z)?);
    let action = GroupAction::new(&l, GroupShape::CyclicEven(4), vec![f]).map_err(build_err)?;
    let note = if corrected {
        "3(1) + 12(-1) with f = r_x r_y r_z, where y = (6,0,0;1,0,1,0,2,...,2) replaces the \
         printed y so that x, y, z form an A3 chain orthogonal to c; f then has order 4."
    } else {
        "3(1) + 12(-1) with f = r_x r_y r_z and c, x, y, z exactly as printed. With these data \
         <x,y> = 2 = x^2 = y^2, so x - y is isotropic, r_x r_y has infinite order and f is not \
         of order 4; the order hypothesis fails. Use corrected=1 for an A3 chain witness."
    };
    Ok((l, action, c, Conclusion::Obstructed, note.to_string()))
}

fn e1e2_data() -> Result<(Lattice, Vector, Isometry, Isometry), FixtureError> {
    let l = Lattice::diagonal(2, 11).map_err(build_err)?;
    let c: Vector = vec![3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1];
    let e1: Vector = vec![0, 2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0];
    let e2: Vector = vec![6, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 1];
    let f1 = reflection(&l, &e1).map_err(build_err)?;
    let f2 = reflection(&l, &e2).map_err(build_err)?;
    Ok((l, c, f1, f2))
}

fn commuting_pair(flip: bool) -> Result<Built, FixtureError> {
    let (l, c, f1, f2) = e1e2_data()?;
    let gens = if flip { vec![f1.clone(), f1] } else { vec![f1, f2] };
    let action = GroupAction::new(&l, GroupShape::FreeAbelian(2), gens).map_err(build_err)?;
    let (expected, note) = if flip {
        (
            Conclusion::Inconclusive,
            "2(1) + 11(-1) with f1 = f2 = r_e1: equal rows in eps, det = 0.",
        )
    } else {
        (
            Conclusion::Obstructed,
            "2(1) + 11(-1) with f1 = r_e1, f2 = r_e2 for the printed c, e1, e2. That each f_i \
             alone is realised by a diffeomorphism is not checked here.",
        )
    };
    Ok((l, action, c, expected, note.to_string()))
}

fn e1e2_involution() -> Result<Built, FixtureError> {
    let (l, c, f1, f2) = e1e2_data()?;
    let action =
        GroupAction::new(&l, GroupShape::Z2, vec![f1.compose(&f2)]).map_err(build_err)?;
    let note = "2(1) + 11(-1) with f = r_e1 r_e2 as a single involution.";
    Ok((l, action, c, Conclusion::Obstructed, note.to_string()))
}

fn klein(a: usize, b: usize, cc: usize) -> Result<Built, FixtureError> {
    // summand order: A1 = aH, A2 = aH, B1 = bH, B2 = bH, 4c(-E8), (-1)
    let l = Lattice::new(vec![
        Summand::hyperbolic(a),
        Summand::hyperbolic(a),
        Summand::hyperbolic(b),
        Summand::hyperbolic(b),
        Summand::e8(-1, 4 * cc),
        Summand::units(-1, 1),
    ])
    .map_err(build_err)?;
    let a1: Vec<usize> = (0..a).collect();
    let a2: Vec<usize> = (a..2 * a).collect();
    let b1: Vec<usize> = (2 * a..2 * a + b).collect();
    let b2: Vec<usize> = (2 * a + b..2 * a + 2 * b).collect();
    let e = 2 * a + 2 * b;
    let mut ops1 = vec![BlockOp::MinusIdOn(a1.iter().chain(&a2).copied().collect())];
    ops1.extend(b1.iter().zip(&b2).map(|(&i, &j)| BlockOp::Swap(i, j)));
    let mut ops2 = vec![BlockOp::MinusIdOn(b1.iter().chain(&b2).copied().collect())];
    ops2.extend(a1.iter().zip(&a2).map(|(&i, &j)| BlockOp::Swap(i, j)));
    for g in 0..cc {
        let o = e + 4 * g;
        // the four points of a free orbit: f1 = (01)(23), f2 = (02)(13)
        ops1.extend([BlockOp::Swap(o, o + 1), BlockOp::Swap(o + 2, o + 3)]);
        ops2.extend([BlockOp::Swap(o, o + 2), BlockOp::Swap(o + 1, o + 3)]);
    }
    let f1 = block_builder(&l, &ops1).map_err(build_err)?;
    let f2 = block_builder(&l, &ops2).map_err(build_err)?;
    let action = GroupAction::new(&l, GroupShape::KleinFour, vec![f1, f2]).map_err(build_err)?;
    let mut c = vec![0; l.rank()];
    *c.last_mut().expect("nonempty") = 3;
    let note = format!(
        "Connected-sum presentation {}H + {}(-E8) + (-1), isomorphic as an abstract form to \
         {}(1) + {}(-1) (not verified here). f1 = -Id on A1, A2 and swaps B1 <-> B2; f2 swaps \
         A1 <-> A2 and is -Id on B1, B2; both permute each free orbit of four -E8 summands and \
         fix the (-1) summand; c = 3 on the (-1) summand. Realisability claims need a, b >= 3c \
         and are not checked here.",
        2 * (a + b),
        4 * cc,
        2 * (a + b),
        2 * a + 2 * b + 32 * cc + 1
    );
    Ok((l, action, c, Conclusion::Obstructed, note))
}
