//! Formula schemas that transport `α → β` and `α ≪ β` along a zigzag path.
//!
//! For a path `w₁, …, wₙ` and `1 ≤ k ≤ n`, each of the four schemas
//! `φᵏ, ψᵏ, θᵏ, τᵏ` comes with a sign. At `k = n` they are
//!
//! | schema | formula  | sign |
//! |--------|----------|------|
//! | `φⁿ`   | `α → β`  | `−`  |
//! | `ψⁿ`   | `α ≪ β`  | `+`  |
//! | `θⁿ`   | `α → β`  | `+`  |
//! | `τⁿ`   | `α ≪ β`  | `−`  |
//!
//! and stepping from `k + 1` to `k` wraps each schema `χ` with the bracket
//! letters of `w_{k+1}`: if `w_k ≺ w_{k+1}`, a `+` schema becomes
//! `q⁺ → χ` and a `−` schema becomes `χ → q⁻`, all now signed `+`; if
//! `w_k ≻ w_{k+1}`, they become `q⁺ ≪ χ` and `χ ≪ q⁻`, all signed `−`.
//!
//! In the bracket model, `wₖ` satisfies the `+` schemas and refutes the `−`
//! ones exactly when `wₙ` refutes `α → β` (for `φ`), satisfies `α ≪ β` (for
//! `ψ`), satisfies `α → β` (for `θ`) and refutes `α ≪ β` (for `τ`).

use std::fmt;
use std::sync::Arc;

use crate::formula::{Formula, Letter};
use crate::kripke::{KripkeModel, PointedModel};
use crate::semantics::{is_type, realize, Direction, Evaluator, TypeQuery};

use super::bracket::{bracket, minus_letter, plus_letter};
use super::UnravelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemaKind {
    Phi,
    Psi,
    Theta,
    Tau,
}

impl SchemaKind {
    pub const ALL: [SchemaKind; 4] = [SchemaKind::Phi, SchemaKind::Psi, SchemaKind::Theta, SchemaKind::Tau];

    fn basis(self) -> (fn(Formula, Formula) -> Formula, Sign) {
        match self {
            SchemaKind::Phi => (Formula::implies, Sign::Minus),
            SchemaKind::Psi => (Formula::coimplies, Sign::Plus),
            SchemaKind::Theta => (Formula::implies, Sign::Plus),
            SchemaKind::Tau => (Formula::coimplies, Sign::Minus),
        }
    }
}

impl fmt::Display for SchemaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemaKind::Phi => "phi",
            SchemaKind::Psi => "psi",
            SchemaKind::Theta => "theta",
            SchemaKind::Tau => "tau",
        })
    }
}

/// A sequence of worlds in which neighbours are distinct and comparable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZigzagPath {
    ids: Vec<String>,
    /// `ascending[i]` iff `ids[i] ≺ ids[i + 1]`.
    ascending: Vec<bool>,
}

impl ZigzagPath {
    pub fn new<S: AsRef<str>>(m: &KripkeModel, ids: &[S]) -> Result<Self, UnravelError> {
        if ids.is_empty() {
            return Err(UnravelError::NotAZigzag("a path needs at least one world".into()));
        }
        let idx: Vec<usize> = ids
            .iter()
            .map(|s| m.index_of(s.as_ref()).ok_or_else(|| UnravelError::UnknownWorld(s.as_ref().to_string())))
            .collect::<Result<_, _>>()?;
        let mut ascending = Vec::with_capacity(idx.len() - 1);
        for (i, w) in idx.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            if a == b || !(m.leq(a, b) || m.leq(b, a)) {
                return Err(UnravelError::NotAZigzag(format!(
                    "entries {} and {} ({} and {}) must be distinct and comparable",
                    i + 1,
                    i + 2,
                    m.world(a),
                    m.world(b)
                )));
            }
            ascending.push(m.leq(a, b));
        }
        Ok(ZigzagPath { ids: ids.iter().map(|s| s.as_ref().to_string()).collect(), ascending })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// The `k`-th world, counting from 1.
    pub fn world(&self, k: usize) -> &str {
        &self.ids[k - 1]
    }

    /// Every zigzag path in `m` with between 1 and `max_len` entries.
    pub fn all(m: &KripkeModel, max_len: usize) -> Vec<ZigzagPath> {
        let mut out = Vec::new();
        let mut frontier: Vec<Vec<usize>> = (0..m.len()).map(|i| vec![i]).collect();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for p in &frontier {
                let ids: Vec<&str> = p.iter().map(|&i| m.world(i)).collect();
                out.push(ZigzagPath::new(m, &ids).expect("built from comparable steps"));
                let end = *p.last().expect("non-empty");
                for v in 0..m.len() {
                    if v != end && (m.leq(end, v) || m.leq(v, end)) {
                        let mut q = p.clone();
                        q.push(v);
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Wrap {
    /// `q⁺ → χ`
    PlusImpl(Letter),
    /// `χ → q⁻`
    ImplMinus(Letter),
    /// `q⁺ ≪ χ`
    PlusCo(Letter),
    /// `χ ≪ q⁻`
    CoMinus(Letter),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Schema {
    wraps: Vec<Wrap>,
    sign: Sign,
}

/// The four schemas for one path and index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaSet {
    pub k: usize,
    pub n: usize,
    entries: [Schema; 4],
}

impl SchemaSet {
    fn entry(&self, kind: SchemaKind) -> &Schema {
        &self.entries[kind as usize]
    }

    pub fn sign(&self, kind: SchemaKind) -> Sign {
        self.entry(kind).sign
    }

    pub fn instantiate(&self, kind: SchemaKind, alpha: &Formula, beta: &Formula) -> Formula {
        let (basis, _) = kind.basis();
        let mut f = basis(alpha.clone(), beta.clone());
        for w in &self.entry(kind).wraps {
            f = match w {
                Wrap::PlusImpl(q) => Formula::implies(Formula::Atom(q.clone()), f),
                Wrap::ImplMinus(q) => Formula::implies(f, Formula::Atom(q.clone())),
                Wrap::PlusCo(q) => Formula::coimplies(Formula::Atom(q.clone()), f),
                Wrap::CoMinus(q) => Formula::coimplies(f, Formula::Atom(q.clone())),
            };
        }
        f
    }
}

/// The schemas `φᵏ, ψᵏ, θᵏ, τᵏ` along `path`, for `1 ≤ k ≤ n`.
pub fn schemas(path: &ZigzagPath, k: usize) -> Result<SchemaSet, UnravelError> {
    let n = path.len();
    if k == 0 || k > n {
        return Err(UnravelError::IndexOutOfRange { k, n });
    }
    let entries = SchemaKind::ALL.map(|kind| {
        let mut s = Schema { wraps: Vec::new(), sign: kind.basis().1 };
        for j in (k..n).rev() {
            // Step from index j + 1 down to j (both counted from 1).
            let next = path.world(j + 1);
            let (plus, minus) = (plus_letter(next), minus_letter(next));
            let up = path.ascending[j - 1];
            let wrap = match (up, s.sign) {
                (true, Sign::Plus) => Wrap::PlusImpl(plus),
                (true, Sign::Minus) => Wrap::ImplMinus(minus),
                (false, Sign::Plus) => Wrap::PlusCo(plus),
                (false, Sign::Minus) => Wrap::CoMinus(minus),
            };
            s.wraps.push(wrap);
            s.sign = if up { Sign::Plus } else { Sign::Minus };
        }
        s
    });
    Ok(SchemaSet { k, n, entries })
}

/// Checks all four biconditionals for `path`, `k`, `α`, `β` in a bracket
/// model (or an expansion of one).
pub fn verify_schema(bm: &KripkeModel, path: &ZigzagPath, k: usize, alpha: &Formula, beta: &Formula) -> Result<bool, UnravelError> {
    let set = schemas(path, k)?;
    let at = |id: &str| bm.index_of(id).ok_or_else(|| UnravelError::UnknownWorld(id.to_string()));
    let (wk, wn) = (at(path.world(k))?, at(path.world(path.len()))?);
    let mut eval = Evaluator::new(bm);
    let imp = eval.holds(wn, &Formula::implies(alpha.clone(), beta.clone()))?;
    let co = eval.holds(wn, &Formula::coimplies(alpha.clone(), beta.clone()))?;
    for kind in SchemaKind::ALL {
        let holds = eval.holds(wk, &set.instantiate(kind, alpha, beta))?;
        let lhs = match set.sign(kind) {
            Sign::Plus => holds,
            Sign::Minus => !holds,
        };
        let rhs = match kind {
            SchemaKind::Phi => !imp,
            SchemaKind::Psi => co,
            SchemaKind::Theta => imp,
            SchemaKind::Tau => !co,
        };
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The result of realizing a finite type through a pair of fresh letters.
#[derive(Clone, Debug)]
pub struct TypeExpansion {
    /// The bracket model expanded with the fresh pair.
    pub model: Arc<KripkeModel>,
    /// The expanded model pointed at the first world of the path.
    pub root: PointedModel,
    pub witness: String,
    /// The path from the root through the type's point to the witness.
    pub path: Vec<String>,
    /// Each instance of the fragment, its sign and whether the root agrees.
    pub instances: Vec<(Formula, Sign, bool)>,
}

impl TypeExpansion {
    pub fn verified(&self) -> bool {
        self.instances.iter().all(|(_, _, ok)| *ok)
    }
}

/// Finds a world realizing the finite type `q` at `v`, expands the bracket
/// model of `m` with `fresh = (r⁺, r⁻)` read as that world's bracket letters,
/// and evaluates the one-step schema instances that pin the type at the root
/// of `path` (by default just `v`).
///
/// Prefers `v` itself as the witness and otherwise takes the least world in
/// the cone. Returns `None` when `q` is not a type of `v`.
pub fn realize_finite_type_expansion(
    m: &KripkeModel,
    v: &str,
    q: &TypeQuery,
    fresh: (Letter, Letter),
    path: Option<&ZigzagPath>,
) -> Result<Option<TypeExpansion>, UnravelError> {
    let vi = m.index_of(v).ok_or_else(|| UnravelError::UnknownWorld(v.to_string()))?;
    let default_path;
    let path = match path {
        Some(p) => p,
        None => {
            default_path = ZigzagPath::new(m, &[v])?;
            &default_path
        }
    };
    if path.world(path.len()) != v {
        return Err(UnravelError::NotAZigzag(format!("the path must end at {v}")));
    }
    let bm = bracket(m)?;
    for l in [&fresh.0, &fresh.1] {
        if bm.signature().contains(l) || fresh.0 == fresh.1 {
            return Err(UnravelError::LetterCollision(l.to_string()));
        }
    }
    let pm = PointedModel::at_index(Arc::new(m.clone()), vi);
    if !is_type(&pm, q)? {
        return Ok(None);
    }
    let mut eval = Evaluator::new(m);
    let cone = match q.direction {
        Direction::Successor => m.up(vi),
        Direction::Predecessor => m.down(vi),
    };
    let realizes = |eval: &mut Evaluator<'_>, w: usize| -> Result<bool, UnravelError> {
        for g in &q.gamma {
            if !eval.holds(w, g)? {
                return Ok(false);
            }
        }
        for d in &q.delta {
            if eval.holds(w, d)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let witness = if cone.contains(vi) && realizes(&mut eval, vi)? {
        v.to_string()
    } else {
        match realize(m, v, q)? {
            Some(w) => w,
            None => return Ok(None),
        }
    };

    let plus = bm.valuation(&plus_letter(&witness)).expect("bracket letter").clone();
    let minus = bm.valuation(&minus_letter(&witness)).expect("bracket letter").clone();
    let expanded = bm.expand_bits(fresh.0.clone(), plus)?.expand_bits(fresh.1.clone(), minus)?;
    let expanded = Arc::new(expanded);

    let mut ids: Vec<String> = path.ids().to_vec();
    if witness != v {
        ids.push(witness.clone());
    }
    let full = ZigzagPath::new(&expanded, &ids)?;
    let set = schemas(&full, 1)?;
    let (rp, rm) = (Formula::Atom(fresh.0.clone()), Formula::Atom(fresh.1.clone()));
    let mut cells: Vec<(SchemaKind, Formula, Formula)> = Vec::new();
    let (pair_kind, single_kind) = match q.direction {
        Direction::Successor => (SchemaKind::Phi, SchemaKind::Theta),
        Direction::Predecessor => (SchemaKind::Psi, SchemaKind::Tau),
    };
    cells.push((pair_kind, rp.clone(), rm.clone()));
    for g in &q.gamma {
        cells.push((single_kind, rp.clone(), g.clone()));
    }
    for d in &q.delta {
        cells.push((single_kind, d.clone(), rm.clone()));
    }
    let root_idx = expanded.index_of(full.world(1)).expect("path world");
    let mut eval = Evaluator::new(&expanded);
    let mut instances = Vec::with_capacity(cells.len());
    for (kind, a, b) in cells {
        let f = set.instantiate(kind, &a, &b);
        let sign = set.sign(kind);
        let holds = eval.holds(root_idx, &f)?;
        instances.push((f, sign, holds == (sign == Sign::Plus)));
    }
    Ok(Some(TypeExpansion {
        root: PointedModel::at_index(expanded.clone(), root_idx),
        model: expanded,
        witness,
        path: ids,
        instances,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn chain2() -> KripkeModel {
        KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn basis_signs() {
        let m = chain2();
        let path = ZigzagPath::new(&m, &["a", "b"]).unwrap();
        let s = schemas(&path, 2).unwrap();
        let signs: Vec<Sign> = SchemaKind::ALL.iter().map(|&k| s.sign(k)).collect();
        assert_eq!(signs, [Sign::Minus, Sign::Plus, Sign::Plus, Sign::Minus]);
        assert_eq!(s.instantiate(SchemaKind::Psi, &f("p"), &f("false")).render(), "p -< false");
    }

    #[test]
    fn ascending_step_wraps_with_implication() {
        let m = chain2();
        let path = ZigzagPath::new(&m, &["a", "b"]).unwrap();
        let s = schemas(&path, 1).unwrap();
        assert_eq!(s.sign(SchemaKind::Theta), Sign::Plus);
        assert_eq!(s.instantiate(SchemaKind::Theta, &f("p"), &f("false")).render(), "q+b -> p -> false");
        assert_eq!(s.instantiate(SchemaKind::Phi, &f("p"), &f("false")).render(), "(p -> false) -> q-b");
    }

    #[test]
    fn descending_step_wraps_with_coimplication() {
        let m = chain2();
        let path = ZigzagPath::new(&m, &["b", "a"]).unwrap();
        let s = schemas(&path, 1).unwrap();
        assert_eq!(s.sign(SchemaKind::Theta), Sign::Minus);
        assert_eq!(s.instantiate(SchemaKind::Theta, &f("p"), &f("q")).render(), "q+a -< (p -> q)");
    }

    #[test]
    fn chain2_biconditional() {
        let bm = bracket(&chain2()).unwrap();
        let path = ZigzagPath::new(&bm, &["a", "b"]).unwrap();
        assert!(verify_schema(&bm, &path, 1, &f("p"), &Formula::Bottom).unwrap());
        assert!(verify_schema(&bm, &path, 2, &f("p"), &Formula::Bottom).unwrap());
        let theta = schemas(&path, 1).unwrap().instantiate(SchemaKind::Theta, &f("p"), &Formula::Bottom);
        assert!(!crate::semantics::satisfies(&bm, "a", &theta).unwrap());
    }

    #[test]
    fn index_range() {
        let path = ZigzagPath::new(&chain2(), &["a"]).unwrap();
        assert_eq!(schemas(&path, 2).unwrap_err(), UnravelError::IndexOutOfRange { k: 2, n: 1 });
        assert_eq!(schemas(&path, 0).unwrap_err(), UnravelError::IndexOutOfRange { k: 0, n: 1 });
    }

    #[test]
    fn paths_must_zigzag() {
        let m = chain2();
        assert!(ZigzagPath::new(&m, &["a", "a"]).is_err());
        let fork = KripkeModel::build(&[], &["r", "s", "t"], &[("r", "s"), ("r", "t")], &[]).unwrap();
        assert!(ZigzagPath::new(&fork, &["s", "t"]).is_err());
        assert_eq!(ZigzagPath::all(&m, 3).len(), 2 + 2 + 2);
    }

    fn letters(a: &str, b: &str) -> (Letter, Letter) {
        (Letter::new(a).unwrap(), Letter::new(b).unwrap())
    }

    #[test]
    fn successor_type_expansion() {
        let q = TypeQuery::successor(vec![f("p")], vec![Formula::Bottom]);
        let e = realize_finite_type_expansion(&chain2(), "a", &q, letters("r+0", "r-0"), None).unwrap().unwrap();
        assert_eq!(e.witness, "b");
        assert_eq!(e.model.valuation_map()["r+0"], e.model.valuation_map()["q+b"]);
        assert_eq!(e.model.valuation_map()["r-0"], e.model.valuation_map()["q-b"]);
        assert!(e.verified());
        assert_eq!(e.instances.len(), 3);
    }

    #[test]
    fn empty_type_uses_the_point() {
        let q = TypeQuery::successor(vec![], vec![]);
        let e = realize_finite_type_expansion(&chain2(), "a", &q, letters("r+0", "r-0"), None).unwrap().unwrap();
        assert_eq!(e.witness, "a");
        assert!(e.verified());
    }

    #[test]
    fn predecessor_type_at_b_is_reflexive() {
        let q = TypeQuery::predecessor(vec![f("p")], vec![Formula::Bottom]);
        let e = realize_finite_type_expansion(&chain2(), "b", &q, letters("s+0", "s-0"), None).unwrap().unwrap();
        assert_eq!(e.witness, "b");
        assert!(e.verified());
    }

    #[test]
    fn no_witness() {
        let q = TypeQuery::predecessor(vec![f("p")], vec![Formula::Bottom]);
        assert!(realize_finite_type_expansion(&chain2(), "a", &q, letters("s+0", "s-0"), None).unwrap().is_none());
    }

    #[test]
    fn fresh_letters_must_be_fresh() {
        let q = TypeQuery::successor(vec![], vec![]);
        let err = realize_finite_type_expansion(&chain2(), "a", &q, letters("q+a", "r-0"), None).unwrap_err();
        assert_eq!(err, UnravelError::LetterCollision("q+a".into()));
    }

    #[test]
    fn longer_path_to_point() {
        let m = chain2();
        let path = ZigzagPath::new(&m, &["b", "a"]).unwrap();
        let q = TypeQuery::successor(vec![f("p")], vec![Formula::Bottom]);
        let e = realize_finite_type_expansion(&m, "a", &q, letters("r+0", "r-0"), Some(&path)).unwrap().unwrap();
        assert_eq!(e.path, ["b", "a", "b"]);
        assert!(e.verified());
    }
}
