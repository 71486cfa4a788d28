//! Bi-asimulations between two pointed models.
//!
//! A relation holds directed pairs in two orientations: `1to2` pairs run
//! from the left model into the right one and `2to1` pairs run back. A pair
//! `(x, y)` is read as "the positive theory of `x` is contained in that of
//! `y`". The conditions checked for every pair `(x, y)` are
//!
//! * atoms: every letter true at `x` is true at `y`;
//! * back: for every `t ≥ y` there is `u ≥ x` with `(t, u)` and `(u, t)`;
//! * forth: for every `u ≤ x` there is `t ≤ y` with `(t, u)` and `(u, t)`;
//!
//! and the pair of distinguished points must be in the `1to2` half.

mod refine;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;
use crate::enumerate::{EnumError, FormulaSpace};
use crate::formula::Signature;
use crate::kripke::{KripkeModel, PointedModel};

pub use refine::{
    greatest_biasim, refine, refine_shuffled, separating_formula, separating_formula_with, Condition, Fixpoint,
    RefutationTrace, Removal, Witness,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BiasimError {
    #[error("the models have different signatures")]
    SignatureMismatch,
    #[error("the relation was built over different models than the ones given")]
    ModelMismatch,
    #[error("unknown world {0:?} in relation")]
    UnknownWorld(String),
    #[error("malformed relation: {0}")]
    Malformed(String),
    #[error(transparent)]
    Enumeration(#[from] EnumError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "1to2")]
    OneToTwo,
    #[serde(rename = "2to1")]
    TwoToOne,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::OneToTwo, Side::TwoToOne];

    pub fn flip(self) -> Side {
        match self {
            Side::OneToTwo => Side::TwoToOne,
            Side::TwoToOne => Side::OneToTwo,
        }
    }

    fn idx(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::OneToTwo => "1to2",
            Side::TwoToOne => "2to1",
        })
    }
}

/// One entry of the JSON relation dump.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRecord {
    pub side: Side,
    pub from: String,
    pub to: String,
}

/// A directed relation between the worlds of two models.
#[derive(Clone)]
pub struct Asim {
    left: Arc<KripkeModel>,
    right: Arc<KripkeModel>,
    /// `rel[side][x]` is the set of targets of `x` on that side.
    rel: [Vec<Bits>; 2],
}

impl PartialEq for Asim {
    fn eq(&self, other: &Self) -> bool {
        *self.left == *other.left && *self.right == *other.right && self.rel == other.rel
    }
}

impl fmt::Debug for Asim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.records()).finish()
    }
}

impl Asim {
    pub fn empty(left: Arc<KripkeModel>, right: Arc<KripkeModel>) -> Self {
        let rel = [
            vec![Bits::empty(right.len()); left.len()],
            vec![Bits::empty(left.len()); right.len()],
        ];
        Asim { left, right, rel }
    }

    /// Every cross pair in both orientations.
    pub fn full(left: Arc<KripkeModel>, right: Arc<KripkeModel>) -> Self {
        let rel = [
            vec![Bits::full(right.len()); left.len()],
            vec![Bits::full(left.len()); right.len()],
        ];
        Asim { left, right, rel }
    }

    pub fn from_records(
        left: Arc<KripkeModel>,
        right: Arc<KripkeModel>,
        records: &[PairRecord],
    ) -> Result<Self, BiasimError> {
        let mut a = Asim::empty(left, right);
        for r in records {
            let x = a.source(r.side).index_of(&r.from).ok_or_else(|| BiasimError::UnknownWorld(r.from.clone()))?;
            let y = a.target(r.side).index_of(&r.to).ok_or_else(|| BiasimError::UnknownWorld(r.to.clone()))?;
            a.insert(r.side, x, y);
        }
        Ok(a)
    }

    pub fn from_json(left: Arc<KripkeModel>, right: Arc<KripkeModel>, json: &str) -> Result<Self, BiasimError> {
        let records: Vec<PairRecord> = serde_json::from_str(json).map_err(|e| BiasimError::Malformed(e.to_string()))?;
        Self::from_records(left, right, &records)
    }

    pub fn left(&self) -> &Arc<KripkeModel> {
        &self.left
    }

    pub fn right(&self) -> &Arc<KripkeModel> {
        &self.right
    }

    /// The model the pairs of `side` start in.
    pub fn source(&self, side: Side) -> &KripkeModel {
        match side {
            Side::OneToTwo => &self.left,
            Side::TwoToOne => &self.right,
        }
    }

    pub fn target(&self, side: Side) -> &KripkeModel {
        self.source(side.flip())
    }

    pub fn contains(&self, side: Side, x: usize, y: usize) -> bool {
        self.rel[side.idx()][x].contains(y)
    }

    pub fn contains_ids(&self, side: Side, from: &str, to: &str) -> bool {
        match (self.source(side).index_of(from), self.target(side).index_of(to)) {
            (Some(x), Some(y)) => self.contains(side, x, y),
            _ => false,
        }
    }

    pub fn insert(&mut self, side: Side, x: usize, y: usize) {
        self.rel[side.idx()][x].insert(y);
    }

    pub fn remove(&mut self, side: Side, x: usize, y: usize) {
        self.rel[side.idx()][x].remove(y);
    }

    pub fn targets(&self, side: Side, x: usize) -> &Bits {
        &self.rel[side.idx()][x]
    }

    /// `(t, u)` and `(u, t)` are both present, with `u` on the source side of `side`.
    pub fn linked(&self, side: Side, u: usize, t: usize) -> bool {
        self.contains(side, u, t) && self.contains(side.flip(), t, u)
    }

    pub fn len(&self) -> usize {
        self.rel.iter().flatten().map(Bits::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Side, usize, usize)> + '_ {
        Side::BOTH
            .into_iter()
            .flat_map(move |s| self.rel[s.idx()].iter().enumerate().flat_map(move |(x, ys)| ys.iter().map(move |y| (s, x, y))))
    }

    /// All pairs by world id, sorted by side, then source, then target.
    pub fn records(&self) -> Vec<PairRecord> {
        let mut out: Vec<PairRecord> = self
            .pairs()
            .map(|(side, x, y)| PairRecord {
                side,
                from: self.source(side).world(x).to_string(),
                to: self.target(side).world(y).to_string(),
            })
            .collect();
        out.sort();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("records serialize")
    }

    /// Componentwise union with a relation over the same models.
    pub fn union(&self, other: &Asim) -> Result<Asim, BiasimError> {
        if *self.left != *other.left || *self.right != *other.right {
            return Err(BiasimError::ModelMismatch);
        }
        let mut out = self.clone();
        for s in Side::BOTH {
            for (a, b) in out.rel[s.idx()].iter_mut().zip(&other.rel[s.idx()]) {
                *a = a.or(b);
            }
        }
        Ok(out)
    }

    pub fn is_subset(&self, other: &Asim) -> bool {
        Side::BOTH
            .into_iter()
            .all(|s| self.rel[s.idx()].iter().zip(&other.rel[s.idx()]).all(|(a, b)| a.is_subset(b)))
    }

    pub(crate) fn atom_failure(&self, side: Side, x: usize, y: usize) -> Option<&crate::formula::Letter> {
        let (src, dst) = (self.source(side), self.target(side));
        src.signature().iter().find(|l| src.holds_atom(l, x) == Some(true) && dst.holds_atom(l, y) != Some(true))
    }

    /// The first `t ≥ y` without a linked `u ≥ x`.
    pub(crate) fn back_failure(&self, side: Side, x: usize, y: usize) -> Option<usize> {
        let (src, dst) = (self.source(side), self.target(side));
        dst.up(y).iter().find(|&t| !src.up(x).iter().any(|u| self.linked(side, u, t)))
    }

    /// The first `u ≤ x` without a linked `t ≤ y`.
    fn forth_failure(&self, side: Side, x: usize, y: usize) -> Option<usize> {
        self.forth_failure_where(side, x, y, |_| true)
    }

    pub(crate) fn forth_failure_where(&self, side: Side, x: usize, y: usize, keep: impl Fn(usize) -> bool) -> Option<usize> {
        let (src, dst) = (self.source(side), self.target(side));
        src.down(x).iter().filter(|&u| keep(u)).find(|&u| !dst.down(y).iter().any(|t| self.linked(side, u, t)))
    }

    pub(crate) fn atoms_at(&self, side: Side, x: usize) -> Vec<crate::formula::Letter> {
        let src = self.source(side);
        src.signature().iter().filter(|l| src.holds_atom(l, x) == Some(true)).cloned().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BiasimViolation {
    Atom { side: Side, from: String, to: String, letter: String },
    /// `successor` lies above `to` and has no linked partner above `from`.
    Back { side: Side, from: String, to: String, successor: String },
    /// `predecessor` lies below `from` and has no linked partner below `to`.
    Forth { side: Side, from: String, to: String, predecessor: String },
    Elem { from: String, to: String },
}

impl fmt::Display for BiasimViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasimViolation::Atom { side, from, to, letter } => {
                write!(f, "s-atom: ({from}, {to}) [{side}]: {letter} holds at {from} but not at {to}")
            }
            BiasimViolation::Back { side, from, to, successor } => {
                write!(f, "s-back: ({from}, {to}) [{side}]: successor {successor} of {to} has no partner")
            }
            BiasimViolation::Forth { side, from, to, predecessor } => {
                write!(f, "s-forth: ({from}, {to}) [{side}]: predecessor {predecessor} of {from} has no partner")
            }
            BiasimViolation::Elem { from, to } => write!(f, "elem: ({from}, {to}) is missing"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BiasimReport {
    pub violations: Vec<BiasimViolation>,
}

impl BiasimReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for BiasimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every condition of `a` as a bi-asimulation from `from` to `to`.
pub fn check_biasim(a: &Asim, from: &PointedModel, to: &PointedModel) -> Result<BiasimReport, BiasimError> {
    if *a.left != *from.model || *a.right != *to.model {
        return Err(BiasimError::ModelMismatch);
    }
    let mut violations = Vec::new();
    for (side, x, y) in a.pairs() {
        let (from_id, to_id) = (a.source(side).world(x).to_string(), a.target(side).world(y).to_string());
        if let Some(l) = a.atom_failure(side, x, y) {
            violations.push(BiasimViolation::Atom { side, from: from_id.clone(), to: to_id.clone(), letter: l.to_string() });
        }
        if let Some(t) = a.back_failure(side, x, y) {
            let successor = a.target(side).world(t).to_string();
            violations.push(BiasimViolation::Back { side, from: from_id.clone(), to: to_id.clone(), successor });
        }
        if let Some(u) = a.forth_failure(side, x, y) {
            let predecessor = a.source(side).world(u).to_string();
            violations.push(BiasimViolation::Forth { side, from: from_id, to: to_id, predecessor });
        }
    }
    if !a.contains(Side::OneToTwo, from.point(), to.point()) {
        violations.push(BiasimViolation::Elem { from: from.point_id().to_string(), to: to.point_id().to_string() });
    }
    Ok(BiasimReport { violations })
}

/// Pairs in either direction whose rank-bounded positive theories are included.
pub fn canonical_relation(
    m1: &Arc<KripkeModel>,
    m2: &Arc<KripkeModel>,
    sig: &Signature,
    max_rank: usize,
) -> Result<Asim, BiasimError> {
    let space = FormulaSpace::build(sig, max_rank, &[m1.clone(), m2.clone()])?;
    let th = |m: &KripkeModel| -> Vec<Bits> {
        let slot = space.slot(m).expect("model is in the context");
        (0..m.len()).map(|i| space.theory_bits(space.global(slot, i))).collect()
    };
    let (t1, t2) = (th(m1), th(m2));
    let mut a = Asim::empty(m1.clone(), m2.clone());
    for (x, tx) in t1.iter().enumerate() {
        for (y, ty) in t2.iter().enumerate() {
            if tx.is_subset(ty) {
                a.insert(Side::OneToTwo, x, y);
            }
            if ty.is_subset(tx) {
                a.insert(Side::TwoToOne, y, x);
            }
        }
    }
    Ok(a)
}
