//! Finite bi-intuitionistic Kripke models.
//!
//! A model is a non-empty finite partial order of worlds together with a
//! monotone valuation: whenever `w ≺ v` and `w ∈ V(p)`, also `v ∈ V(p)`.
//! Models are only ever built through [`normalize`], which closes the given
//! order pairs reflexively and transitively and then validates the result.

mod file;
mod iso;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::Bits;
use crate::formula::{InvalidLetter, Letter, Signature};

pub use file::ModelFile;
pub use iso::isomorphism;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    Reflexivity,
    Transitivity,
    Antisymmetry,
    Monotonicity,
    DanglingReference,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Reflexivity { world: String },
    Transitivity { a: String, b: String, c: String },
    /// `a ≺ b` and `b ≺ a` for distinct worlds.
    Antisymmetry { a: String, b: String },
    /// `from ≺ to`, `from ∈ V(letter)` but `to ∉ V(letter)`.
    Monotonicity { from: String, to: String, letter: String },
    DanglingReference { detail: String },
}

impl Violation {
    pub fn kind(&self) -> ViolationKind {
        match self {
            Violation::Reflexivity { .. } => ViolationKind::Reflexivity,
            Violation::Transitivity { .. } => ViolationKind::Transitivity,
            Violation::Antisymmetry { .. } => ViolationKind::Antisymmetry,
            Violation::Monotonicity { .. } => ViolationKind::Monotonicity,
            Violation::DanglingReference { .. } => ViolationKind::DanglingReference,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Reflexivity { world } => write!(f, "reflexivity: {world} is not related to itself"),
            Violation::Transitivity { a, b, c } => {
                write!(f, "transitivity: {a} < {b} < {c} but not {a} < {c}")
            }
            Violation::Antisymmetry { a, b } => {
                write!(f, "antisymmetry: {a} and {b} are distinct but below each other")
            }
            Violation::Monotonicity { from, to, letter } => {
                write!(f, "monotonicity: {letter} holds at {from} but not at its successor {to}")
            }
            Violation::DanglingReference { detail } => write!(f, "dangling reference: {detail}"),
        }
    }
}

/// Every invariant violation found in a model description. Empty iff valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn kinds(&self) -> BTreeSet<ViolationKind> {
        self.violations.iter().map(Violation::kind).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    InvalidLetter(#[from] InvalidLetter),
    #[error("a model needs at least one world")]
    NoWorlds,
    #[error("world {0:?} is listed twice")]
    DuplicateWorld(String),
    #[error("letter {0:?} is listed twice in the signature")]
    DuplicateLetter(String),
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("letter {0} is not in the model's signature")]
    UnknownLetter(String),
    #[error("{0}")]
    NotAChain(String),
    #[error("letter {0} already belongs to the signature")]
    LetterCollision(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Report valuation monotonicity violations.
    Strict,
    /// Close every valuation set upwards.
    Close,
}

/// A finite bi-intuitionistic Kripke model.
///
/// Worlds are kept in lexicographic order of their ids; every index-based
/// accessor refers to that order.
#[derive(Clone, PartialEq, Eq)]
pub struct KripkeModel {
    signature: Signature,
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    /// `up[i]` is the set of `j` with `i ≺ j` (reflexive).
    up: Vec<Bits>,
    /// `down[i]` is the set of `j` with `j ≺ i` (reflexive).
    down: Vec<Bits>,
    /// One truth set per signature letter, in signature order.
    valuation: Vec<Bits>,
}

impl fmt::Debug for KripkeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KripkeModel")
            .field("signature", &self.signature)
            .field("worlds", &self.worlds)
            .field("order", &self.covering_pairs())
            .field("valuation", &self.valuation_map())
            .finish()
    }
}

/// Builds a model from generating order pairs, closing the order and
/// validating the result.
pub fn normalize(raw: &ModelFile, mode: Mode) -> Result<KripkeModel, ModelError> {
    let mut signature = Signature::new();
    for name in &raw.signature {
        if !signature.insert(Letter::new(name)?) {
            return Err(ModelError::DuplicateLetter(name.clone()));
        }
    }
    if raw.worlds.is_empty() {
        return Err(ModelError::NoWorlds);
    }
    let mut worlds = raw.worlds.clone();
    worlds.sort();
    if let Some(w) = worlds.windows(2).find(|w| w[0] == w[1]) {
        return Err(ModelError::DuplicateWorld(w[0].clone()));
    }
    let index: HashMap<String, usize> = worlds.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
    let n = worlds.len();

    let mut report = ValidationReport::default();
    let mut rel = vec![vec![false; n]; n];
    for (i, row) in rel.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in &raw.order {
        match (index.get(a), index.get(b)) {
            (Some(&i), Some(&j)) => rel[i][j] = true,
            _ => report.violations.push(Violation::DanglingReference {
                detail: format!("order pair ({a}, {b}) names an unknown world"),
            }),
        }
    }
    transitive_closure(&mut rel);

    let mut valuation = vec![Bits::empty(n); signature.len()];
    for (name, ws) in &raw.valuation {
        let Some(li) = Letter::new(name).ok().and_then(|l| signature.index_of(&l)) else {
            report.violations.push(Violation::DanglingReference {
                detail: format!("valuation for {name:?}, which is not in the signature"),
            });
            continue;
        };
        for w in ws {
            match index.get(w) {
                Some(&i) => valuation[li].insert(i),
                None => report.violations.push(Violation::DanglingReference {
                    detail: format!("V({name}) names unknown world {w:?}"),
                }),
            }
        }
    }

    let up: Vec<Bits> = (0..n).map(|i| Bits::from_indices(n, (0..n).filter(|&j| rel[i][j]))).collect();
    if mode == Mode::Close {
        for set in &mut valuation {
            let closed = set.iter().fold(Bits::empty(n), |acc, i| acc.or(&up[i]));
            *set = closed;
        }
    }
    check_order(&worlds, &rel, &mut report);
    check_monotone(&worlds, &signature, &rel, &valuation, &mut report);
    if !report.is_valid() {
        return Err(ModelError::Invalid(report));
    }
    let down = (0..n).map(|i| Bits::from_indices(n, (0..n).filter(|&j| rel[j][i]))).collect();
    Ok(KripkeModel { signature, worlds, index, up, down, valuation })
}

fn transitive_closure(rel: &mut [Vec<bool>]) {
    let n = rel.len();
    let mut rows: Vec<Bits> = rel.iter().map(|r| Bits::from_indices(n, (0..n).filter(|&j| r[j]))).collect();
    for k in 0..n {
        let rk = rows[k].clone();
        for row in rows.iter_mut() {
            if row.contains(k) {
                *row = row.or(&rk);
            }
        }
    }
    for (r, bits) in rel.iter_mut().zip(&rows) {
        for j in bits.iter() {
            r[j] = true;
        }
    }
}

fn check_order(worlds: &[String], rel: &[Vec<bool>], report: &mut ValidationReport) {
    let n = worlds.len();
    let rows: Vec<Bits> = rel.iter().map(|r| Bits::from_indices(n, (0..n).filter(|&j| r[j]))).collect();
    for i in 0..n {
        if !rel[i][i] {
            report.violations.push(Violation::Reflexivity { world: worlds[i].clone() });
        }
    }
    for i in 0..n {
        for j in rows[i].iter() {
            if i < j && rel[j][i] {
                report.violations.push(Violation::Antisymmetry { a: worlds[i].clone(), b: worlds[j].clone() });
            }
            for k in rows[j].and_not(&rows[i]).iter() {
                report.violations.push(Violation::Transitivity {
                    a: worlds[i].clone(),
                    b: worlds[j].clone(),
                    c: worlds[k].clone(),
                });
            }
        }
    }
}

fn check_monotone(
    worlds: &[String],
    signature: &Signature,
    rel: &[Vec<bool>],
    valuation: &[Bits],
    report: &mut ValidationReport,
) {
    for (letter, set) in signature.iter().zip(valuation) {
        for i in set.iter() {
            for (j, related) in rel[i].iter().enumerate() {
                if *related && !set.contains(j) {
                    report.violations.push(Violation::Monotonicity {
                        from: worlds[i].clone(),
                        to: worlds[j].clone(),
                        letter: letter.to_string(),
                    });
                }
            }
        }
    }
}

impl KripkeModel {
    /// Convenience constructor in strict mode.
    pub fn build(
        signature: &[&str],
        worlds: &[&str],
        order: &[(&str, &str)],
        valuation: &[(&str, &[&str])],
    ) -> Result<KripkeModel, ModelError> {
        normalize(&ModelFile::from_parts(signature, worlds, order, valuation), Mode::Strict)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world(&self, i: usize) -> &str {
        &self.worlds[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn require_world(&self, id: &str) -> Result<usize, ModelError> {
        self.index_of(id).ok_or_else(|| ModelError::UnknownWorld(id.to_string()))
    }

    /// `i ≺ j` (reflexive).
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.up[i].contains(j)
    }

    /// Number of worlds on a longest strictly ascending chain.
    pub fn height(&self) -> usize {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| self.up[i].count());
        let mut above = vec![0; self.len()];
        for &i in &order {
            above[i] = 1 + self.up[i].iter().filter(|&j| j != i).map(|j| above[j]).max().unwrap_or(0);
        }
        above.into_iter().max().unwrap_or(0)
    }

    pub fn up(&self, i: usize) -> &Bits {
        &self.up[i]
    }

    pub fn down(&self, i: usize) -> &Bits {
        &self.down[i]
    }

    /// Successors of `i`, including `i`, in world order.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.up[i].iter()
    }

    /// Predecessors of `i`, including `i`, in world order.
    pub fn predecessors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.down[i].iter()
    }

    /// The truth set of a letter, or `None` if it is not in the signature.
    pub fn valuation(&self, l: &Letter) -> Option<&Bits> {
        self.signature.index_of(l).map(|i| &self.valuation[i])
    }

    pub fn holds_atom(&self, l: &Letter, i: usize) -> Option<bool> {
        self.valuation(l).map(|s| s.contains(i))
    }

    /// Letter name to world ids, sorted.
    pub fn valuation_map(&self) -> BTreeMap<String, Vec<String>> {
        self.signature
            .iter()
            .zip(&self.valuation)
            .map(|(l, s)| (l.to_string(), s.iter().map(|i| self.worlds[i].clone()).collect()))
            .collect()
    }

    /// All pairs `(i, j)` with `i ≺ j` and `i ≠ j`.
    pub fn strict_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|i| self.up[i].iter().filter(move |&j| j != i).map(move |j| (i, j)))
            .collect()
    }

    /// The covering relation (Hasse diagram) of the order.
    pub fn covering_pairs(&self) -> Vec<(String, String)> {
        self.strict_pairs()
            .into_iter()
            .filter(|&(i, j)| self.up[i].and(&self.down[j]).count() == 2)
            .map(|(i, j)| (self.worlds[i].clone(), self.worlds[j].clone()))
            .collect()
    }

    /// Re-checks every invariant on the stored relation and valuation.
    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        let rel: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| self.leq(i, j)).collect()).collect();
        let mut report = ValidationReport::default();
        check_order(&self.worlds, &rel, &mut report);
        check_monotone(&self.worlds, &self.signature, &rel, &self.valuation, &mut report);
        report
    }

    pub fn to_file(&self, point: Option<&str>) -> ModelFile {
        ModelFile {
            signature: self.signature.iter().map(|l| l.to_string()).collect(),
            worlds: self.worlds.clone(),
            order: self.covering_pairs(),
            valuation: self.valuation_map(),
            point: point.map(str::to_string),
        }
    }

    /// The model restricted to a smaller signature.
    pub fn reduct(&self, sigma: &Signature) -> Result<KripkeModel, ModelError> {
        let mut valuation = Vec::with_capacity(sigma.len());
        for l in sigma.iter() {
            let set = self.valuation(l).ok_or_else(|| ModelError::UnknownLetter(l.to_string()))?;
            valuation.push(set.clone());
        }
        Ok(KripkeModel { signature: sigma.clone(), valuation, ..self.clone() })
    }

    /// The submodel on a non-empty set of worlds.
    pub fn submodel<S: AsRef<str>>(&self, ws: impl IntoIterator<Item = S>) -> Result<KripkeModel, ModelError> {
        let mut keep = BTreeSet::new();
        for w in ws {
            keep.insert(self.require_world(w.as_ref())?);
        }
        if keep.is_empty() {
            return Err(ModelError::NoWorlds);
        }
        let keep: Vec<usize> = keep.into_iter().collect();
        let n = keep.len();
        let restrict = |b: &Bits| Bits::from_indices(n, (0..n).filter(|&k| b.contains(keep[k])));
        let worlds: Vec<String> = keep.iter().map(|&i| self.worlds[i].clone()).collect();
        Ok(KripkeModel {
            signature: self.signature.clone(),
            index: worlds.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect(),
            worlds,
            up: keep.iter().map(|&i| restrict(&self.up[i])).collect(),
            down: keep.iter().map(|&i| restrict(&self.down[i])).collect(),
            valuation: self.valuation.iter().map(restrict).collect(),
        })
    }

    /// Whether `self` is a submodel of `other`: same signature, and worlds,
    /// order and valuation are the restrictions of `other`'s.
    pub fn is_submodel_of(&self, other: &KripkeModel) -> bool {
        if self.signature != other.signature {
            return false;
        }
        let ids: Option<Vec<usize>> = self.worlds.iter().map(|w| other.index_of(w)).collect();
        let Some(ids) = ids else { return false };
        for (i, &oi) in ids.iter().enumerate() {
            for (j, &oj) in ids.iter().enumerate() {
                if self.leq(i, j) != other.leq(oi, oj) {
                    return false;
                }
            }
            for (mine, theirs) in self.valuation.iter().zip(&other.valuation) {
                if mine.contains(i) != theirs.contains(oi) {
                    return false;
                }
            }
        }
        true
    }

    /// Adds a fresh letter with the given truth set, which must be monotone.
    pub fn expand<S: AsRef<str>>(&self, letter: Letter, worlds: impl IntoIterator<Item = S>) -> Result<KripkeModel, ModelError> {
        if self.signature.contains(&letter) {
            return Err(ModelError::LetterCollision(letter.to_string()));
        }
        let mut set = Bits::empty(self.len());
        for w in worlds {
            set.insert(self.require_world(w.as_ref())?);
        }
        self.expand_bits(letter, set)
    }

    pub(crate) fn expand_bits(&self, letter: Letter, set: Bits) -> Result<KripkeModel, ModelError> {
        if self.signature.contains(&letter) {
            return Err(ModelError::LetterCollision(letter.to_string()));
        }
        let mut m = self.clone();
        m.signature.insert(letter);
        m.valuation.push(set);
        let report = m.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        Ok(m)
    }
}

/// The union of a chain of models, each a submodel of the next.
pub fn chain_union(ms: &[KripkeModel]) -> Result<KripkeModel, ModelError> {
    let Some(first) = ms.first() else {
        return Err(ModelError::NoWorlds);
    };
    for (i, pair) in ms.windows(2).enumerate() {
        if !pair[0].is_submodel_of(&pair[1]) {
            return Err(ModelError::NotAChain(format!("model {i} is not a submodel of model {}", i + 1)));
        }
    }
    let mut file = first.to_file(None);
    let mut worlds = BTreeSet::new();
    let mut order = BTreeSet::new();
    let mut valuation: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for m in ms {
        worlds.extend(m.worlds.iter().cloned());
        order.extend(m.strict_pairs().into_iter().map(|(i, j)| (m.worlds[i].clone(), m.worlds[j].clone())));
        for (l, ws) in m.valuation_map() {
            valuation.entry(l).or_default().extend(ws);
        }
    }
    file.worlds = worlds.into_iter().collect();
    file.order = order.into_iter().collect();
    file.valuation = valuation.into_iter().map(|(l, ws)| (l, ws.into_iter().collect())).collect();
    normalize(&file, Mode::Strict)
}

/// A model together with a designated world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    pub model: Arc<KripkeModel>,
    point: usize,
}

impl PointedModel {
    pub fn new(model: impl Into<Arc<KripkeModel>>, point: &str) -> Result<Self, ModelError> {
        let model = model.into();
        let point = model.require_world(point)?;
        Ok(PointedModel { model, point })
    }

    pub fn at_index(model: impl Into<Arc<KripkeModel>>, point: usize) -> Self {
        let model = model.into();
        assert!(point < model.len(), "point index out of range");
        PointedModel { model, point }
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn point_id(&self) -> &str {
        self.model.world(self.point)
    }
}
