//! Bounded bi-unravellings.
//!
//! The nodes of the unravelling of `M` around `w` are chains
//! `(w, w₂, …, wₙ)` of base worlds in which consecutive entries are distinct
//! and comparable. A node is joined to its one-step extension by a `ρ` edge
//! pointing upwards when the new world lies above the old end and downwards
//! otherwise; the order is the reflexive and transitive closure of `ρ`, and a
//! node satisfies a letter iff its last world does.
//!
//! Only chains of length at most `maxlen` are built. [`b_theory_check`]
//! compares bounded theories of nodes with their end worlds at the nodes a
//! [`Guard`] trusts. The plain length guard `ℓ + r ≤ maxlen` is exact for
//! models of height 2, but a single order step may append a whole ascending
//! run, so taller models need [`Guard::Height`].

mod bracket;
mod schema;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::biasim::{refine, Asim, BiasimError, Side};
use crate::formula::Formula;
use crate::kripke::{normalize, KripkeModel, ModelError, ModelFile, Mode};

pub use bracket::{bracket, minus_letter, plus_letter};
pub use schema::{
    realize_finite_type_expansion, schemas, verify_schema, SchemaKind, SchemaSet, Sign, TypeExpansion, ZigzagPath,
};

pub const DEFAULT_NODE_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnravelError {
    #[error("maxlen must be at least 1")]
    ZeroLength,
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error("world id {0:?} contains '/', which separates the worlds of a node id")]
    SlashInWorld(String),
    #[error("the unravelling has more than {cap} nodes; lower maxlen or raise the cap")]
    NodeCap { cap: usize },
    #[error("no node {0:?}")]
    UnknownNode(String),
    #[error("{alpha} is not below {beta}")]
    NotRelated { alpha: String, beta: String },
    #[error("{alpha} ≤ {beta} has no zigzag factorization")]
    NoFactorization { alpha: String, beta: String },
    #[error("rank {rank} is too high for maxlen {maxlen}; it must be at most maxlen - 1")]
    RankTooHigh { rank: usize, maxlen: usize },
    #[error("{0}")]
    NotAZigzag(String),
    #[error("schema index {k} is outside 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("letter {0} already belongs to the signature")]
    LetterCollision(String),
    #[error("bracket letter {letter} would be shared by worlds {first:?} and {second:?}")]
    BracketNameClash { letter: String, first: String, second: String },
    #[error("({gamma:?}, {delta:?}) is not a type of the point")]
    NotAType { gamma: Vec<String>, delta: Vec<String> },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Biasim(#[from] BiasimError),
    #[error(transparent)]
    Semantics(#[from] crate::semantics::SemanticsError),
}

/// A chain of base-world indices starting at the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnravelNode {
    chain: Vec<usize>,
}

impl UnravelNode {
    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn end(&self) -> usize {
        *self.chain.last().expect("nodes are non-empty")
    }
}

#[derive(Clone, Debug)]
pub struct UnravelModel {
    base: Arc<KripkeModel>,
    root: usize,
    maxlen: usize,
    /// Sorted by length, then lexicographically.
    nodes: Vec<UnravelNode>,
    index: HashMap<Vec<usize>, usize>,
    rho: Vec<(usize, usize)>,
    model: Arc<KripkeModel>,
    to_model: Vec<usize>,
}

pub fn unravel(m: &Arc<KripkeModel>, w: &str, maxlen: usize) -> Result<UnravelModel, UnravelError> {
    unravel_with(m, w, maxlen, DEFAULT_NODE_CAP)
}

pub fn unravel_with(m: &Arc<KripkeModel>, w: &str, maxlen: usize, cap: usize) -> Result<UnravelModel, UnravelError> {
    if maxlen == 0 {
        return Err(UnravelError::ZeroLength);
    }
    let root = m.index_of(w).ok_or_else(|| UnravelError::UnknownWorld(w.to_string()))?;
    if let Some(bad) = m.worlds().iter().find(|id| id.contains('/')) {
        return Err(UnravelError::SlashInWorld(bad.clone()));
    }
    let mut nodes = vec![UnravelNode { chain: vec![root] }];
    let mut rho = Vec::new();
    let mut level = 0..1;
    for _ in 1..maxlen {
        let start = nodes.len();
        for parent in level.clone() {
            let end = nodes[parent].end();
            for v in 0..m.len() {
                if v == end || !(m.leq(end, v) || m.leq(v, end)) {
                    continue;
                }
                if nodes.len() >= cap {
                    return Err(UnravelError::NodeCap { cap });
                }
                let mut chain = nodes[parent].chain.clone();
                chain.push(v);
                let child = nodes.len();
                nodes.push(UnravelNode { chain });
                rho.push(if m.leq(end, v) { (parent, child) } else { (child, parent) });
            }
        }
        level = start..nodes.len();
    }
    let index: HashMap<Vec<usize>, usize> = nodes.iter().enumerate().map(|(i, n)| (n.chain.clone(), i)).collect();

    let id = |n: &UnravelNode| n.chain.iter().map(|&i| m.world(i)).collect::<Vec<_>>().join("/");
    let ids: Vec<String> = nodes.iter().map(id).collect();
    let file = ModelFile {
        signature: m.signature().iter().map(|l| l.to_string()).collect(),
        worlds: ids.clone(),
        order: rho.iter().map(|&(a, b)| (ids[a].clone(), ids[b].clone())).collect(),
        valuation: m
            .signature()
            .iter()
            .map(|l| {
                let set = m.valuation(l).expect("own letter");
                let ws = nodes.iter().zip(&ids).filter(|(n, _)| set.contains(n.end())).map(|(_, s)| s.clone()).collect();
                (l.to_string(), ws)
            })
            .collect(),
        point: None,
    };
    let model = normalize(&file, Mode::Strict)?;
    let to_model = ids.iter().map(|s| model.index_of(s).expect("node is a world")).collect();
    Ok(UnravelModel { base: m.clone(), root, maxlen, nodes, index, rho, model: Arc::new(model), to_model })
}

impl UnravelModel {
    pub fn base(&self) -> &Arc<KripkeModel> {
        &self.base
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn maxlen(&self) -> usize {
        self.maxlen
    }

    pub fn nodes(&self) -> &[UnravelNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `ρ` edges `(a, b)` between node indices.
    pub fn rho(&self) -> &[(usize, usize)] {
        &self.rho
    }

    /// The unravelling as an ordinary model whose world ids are node ids.
    pub fn model(&self) -> &Arc<KripkeModel> {
        &self.model
    }

    /// The world of [`Self::model`] for node `i`.
    pub fn model_index(&self, i: usize) -> usize {
        self.to_model[i]
    }

    pub fn node_id(&self, i: usize) -> String {
        self.chain_id(&self.nodes[i].chain)
    }

    fn chain_id(&self, chain: &[usize]) -> String {
        chain.iter().map(|&w| self.base.world(w)).collect::<Vec<_>>().join("/")
    }

    pub fn find(&self, chain: &[usize]) -> Option<usize> {
        self.index.get(chain).copied()
    }

    /// Looks a node up by its `/`-joined id.
    pub fn find_id(&self, id: &str) -> Option<usize> {
        let chain: Option<Vec<usize>> = id.split('/').map(|w| self.base.index_of(w)).collect();
        chain.and_then(|c| self.find(&c))
    }

    pub fn end(&self, i: usize) -> usize {
        self.nodes[i].end()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.model.leq(self.to_model[i], self.to_model[j])
    }
}

/// `α = γ⌢down` and `β = γ⌢up` for a related pair `α ≤ β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    /// Node index of the common prefix.
    pub gamma: usize,
    /// Base worlds, strictly descending from the end of `gamma`.
    pub down: Vec<usize>,
    /// Base worlds, strictly ascending from the end of `gamma`.
    pub up: Vec<usize>,
}

impl Factorization {
    pub fn reassemble(&self, u: &UnravelModel) -> (Vec<usize>, Vec<usize>) {
        let g = u.nodes[self.gamma].chain.clone();
        let mut a = g.clone();
        a.extend(&self.down);
        let mut b = g;
        b.extend(&self.up);
        (a, b)
    }
}

/// Splits a related pair at its longest common prefix and checks that the
/// two tails run strictly down and strictly up from the prefix's end.
pub fn zigzag_factor(u: &UnravelModel, alpha: usize, beta: usize) -> Result<Factorization, UnravelError> {
    let (a, b) = (&u.nodes[alpha].chain, &u.nodes[beta].chain);
    if !u.leq(alpha, beta) {
        return Err(UnravelError::NotRelated { alpha: u.node_id(alpha), beta: u.node_id(beta) });
    }
    let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let gamma = u.find(&a[..common]).expect("prefixes of nodes are nodes");
    let down = a[common..].to_vec();
    let up = b[common..].to_vec();
    let m = &u.base;
    let strict = |x: usize, y: usize| x != y && m.leq(x, y);
    let end = a[common - 1];
    let down_ok = std::iter::once(end).chain(down.iter().copied()).collect::<Vec<_>>().windows(2).all(|w| strict(w[1], w[0]));
    let up_ok = std::iter::once(end).chain(up.iter().copied()).collect::<Vec<_>>().windows(2).all(|w| strict(w[0], w[1]));
    if !(down_ok && up_ok) {
        return Err(UnravelError::NoFactorization { alpha: u.node_id(alpha), beta: u.node_id(beta) });
    }
    Ok(Factorization { gamma, down, up })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValleyReport {
    pub chains: usize,
    /// `ρ` chains, as node ids, that rise and then fall.
    pub violations: Vec<Vec<String>>,
}

/// Enumerates every `ρ` chain of pairwise distinct nodes with at most
/// `max_nodes` entries and checks that node lengths first fall and then rise.
pub fn check_rho_valleys(u: &UnravelModel, max_nodes: usize) -> ValleyReport {
    let mut succ = vec![Vec::new(); u.len()];
    for &(a, b) in &u.rho {
        succ[a].push(b);
    }
    let mut report = ValleyReport::default();
    let mut path = Vec::new();
    for start in 0..u.len() {
        path.push(start);
        walk(u, &succ, max_nodes, &mut path, &mut report);
        path.pop();
    }
    report
}

fn walk(u: &UnravelModel, succ: &[Vec<usize>], max_nodes: usize, path: &mut Vec<usize>, report: &mut ValleyReport) {
    report.chains += 1;
    let lens: Vec<usize> = path.iter().map(|&i| u.nodes[i].len()).collect();
    let peak = lens.windows(3).any(|w| w[0] < w[1] && w[1] > w[2]);
    let steps_ok = lens.windows(2).all(|w| w[0].abs_diff(w[1]) == 1);
    if peak || !steps_ok {
        report.violations.push(path.iter().map(|&i| u.node_id(i)).collect());
    }
    if path.len() == max_nodes {
        return;
    }
    let last = *path.last().expect("non-empty");
    for &next in &succ[last] {
        if !path.contains(&next) {
            path.push(next);
            walk(u, succ, max_nodes, path, report);
            path.pop();
        }
    }
}

/// Which nodes of a truncated unravelling are trusted to a given rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Guard {
    /// `ℓ + r ≤ maxlen`.
    Length,
    /// `ℓ + r·(h − 1) ≤ maxlen` where `h` is the height of the base model.
    /// One order step can extend a chain by a whole ascending run, so this is
    /// the bound that keeps truncation out of sight.
    Height,
}

impl Guard {
    /// The largest rank trusted at a node of length `len`, if any.
    pub fn max_rank(self, u: &UnravelModel, len: usize) -> Option<usize> {
        let room = u.maxlen.checked_sub(len)?;
        Some(match self {
            Guard::Length => room,
            Guard::Height => room / u.base.height().saturating_sub(1).max(1),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryMismatch {
    pub node: String,
    pub world: String,
    /// Separates the two: true at the node iff `holds_at_node`.
    pub formula: Formula,
    pub holds_at_node: bool,
    /// Rank at which the theories were compared.
    pub rank: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TheoryCheck {
    /// Nodes inside the guard for at least rank 0.
    pub nodes_checked: usize,
    /// Guarded nodes whose bounded theory differs from their end world's.
    pub mismatches: Vec<TheoryMismatch>,
    /// Guarded nodes with the same end world that disagree with each other.
    pub end_conflicts: Vec<(String, String, Formula)>,
}

impl TheoryCheck {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty() && self.end_conflicts.is_empty()
    }
}

/// Compares the theory of rank at most `rank` of each node of the
/// unravelling with that of its end world in `m`, at every node of length
/// `ℓ` with `ℓ + rank ≤ maxlen` (at lower ranks, a correspondingly larger
/// set of nodes). Nodes sharing an end world are also compared.
pub fn b_theory_check(m: &Arc<KripkeModel>, w: &str, maxlen: usize, rank: usize) -> Result<TheoryCheck, UnravelError> {
    b_theory_check_with(m, w, maxlen, rank, Guard::Length)
}

pub fn b_theory_check_with(
    m: &Arc<KripkeModel>,
    w: &str,
    maxlen: usize,
    rank: usize,
    guard: Guard,
) -> Result<TheoryCheck, UnravelError> {
    if rank + 1 > maxlen {
        return Err(UnravelError::RankTooHigh { rank, maxlen });
    }
    let u = unravel(m, w, maxlen)?;
    theory_check_on(&u, rank, guard)
}

/// Bounded theories are read off the refinement approximants: after `k`
/// modal rounds, a pair survives iff every formula of rank at most `k` true
/// at its source is true at its target.
pub fn theory_check_on(u: &UnravelModel, rank: usize, guard: Guard) -> Result<TheoryCheck, UnravelError> {
    let m = u.base();
    let across = refine(&u.model, m)?;
    let within = refine(&u.model, &u.model)?;
    let trusted: Vec<Option<usize>> = (0..u.len()).map(|i| guard.max_rank(u, u.nodes[i].len()).map(|r| r.min(rank))).collect();
    let mut check = TheoryCheck { nodes_checked: trusted.iter().flatten().count(), ..TheoryCheck::default() };
    let mut approx: HashMap<usize, Asim> = HashMap::new();
    for (i, r) in trusted.iter().enumerate() {
        let Some(r) = *r else { continue };
        let z = approx.entry(r).or_insert_with(|| across.approximant(r));
        let (node, world) = (u.to_model[i], u.end(i));
        let failing = if !z.contains(Side::OneToTwo, node, world) {
            Some((Side::OneToTwo, node, world, true))
        } else if !z.contains(Side::TwoToOne, world, node) {
            Some((Side::TwoToOne, world, node, false))
        } else {
            None
        };
        if let Some((side, from, to, holds_at_node)) = failing {
            check.mismatches.push(TheoryMismatch {
                node: u.node_id(i),
                world: m.world(world).to_string(),
                formula: across.separator(side, from, to).expect("removed pairs have separators"),
                holds_at_node,
                rank: r,
            });
        }
    }
    let mut by_end: HashMap<usize, usize> = HashMap::new();
    for i in (0..u.len()).filter(|&i| trusted[i].is_some()) {
        let first = *by_end.entry(u.end(i)).or_insert(i);
        if first == i {
            continue;
        }
        let r = trusted[i].min(trusted[first]).expect("both trusted");
        let z = within.approximant(r);
        let (a, b) = (u.to_model[first], u.to_model[i]);
        if !z.contains(Side::OneToTwo, a, b) {
            check.end_conflicts.push((u.node_id(first), u.node_id(i), within.separator(Side::OneToTwo, a, b).expect("removed")));
        } else if !z.contains(Side::OneToTwo, b, a) {
            check.end_conflicts.push((u.node_id(i), u.node_id(first), within.separator(Side::OneToTwo, b, a).expect("removed")));
        }
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2() -> Arc<KripkeModel> {
        Arc::new(KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap())
    }

    #[test]
    fn chain2_maxlen3() {
        let u = unravel(&chain2(), "a", 3).unwrap();
        let ids: Vec<String> = (0..u.len()).map(|i| u.node_id(i)).collect();
        assert_eq!(ids, ["a", "a/b", "a/b/a"]);
        assert_eq!(u.rho(), &[(0, 1), (2, 1)]);
        let p = u.model().valuation_map()["p"].clone();
        assert_eq!(p, vec!["a/b".to_string()]);
        assert!(u.model().validate().is_valid());
    }

    #[test]
    fn single_point() {
        let m = Arc::new(KripkeModel::build(&[], &["u"], &[], &[]).unwrap());
        for n in 1..5 {
            assert_eq!(unravel(&m, "u", n).unwrap().len(), 1);
        }
    }

    #[test]
    fn node_count_grows_with_maxlen() {
        let m = Arc::new(KripkeModel::build(&[], &["r", "s", "t"], &[("r", "s"), ("r", "t")], &[]).unwrap());
        let counts: Vec<usize> = (1..6).map(|n| unravel(&m, "r", n).unwrap().len()).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn node_cap() {
        let m = Arc::new(KripkeModel::build(&[], &["r", "s", "t"], &[("r", "s"), ("r", "t")], &[]).unwrap());
        assert_eq!(unravel_with(&m, "r", 6, 10).unwrap_err(), UnravelError::NodeCap { cap: 10 });
    }

    #[test]
    fn slash_in_world_id() {
        let m = Arc::new(KripkeModel::build(&[], &["a/b"], &[], &[]).unwrap());
        assert!(matches!(unravel(&m, "a/b", 2), Err(UnravelError::SlashInWorld(_))));
    }

    #[test]
    fn factorizations() {
        let u = unravel(&chain2(), "a", 3).unwrap();
        let (a, ab, aba) = (u.find_id("a").unwrap(), u.find_id("a/b").unwrap(), u.find_id("a/b/a").unwrap());
        let f = zigzag_factor(&u, a, a).unwrap();
        assert_eq!((f.gamma, f.down.len(), f.up.len()), (a, 0, 0));
        let f = zigzag_factor(&u, a, ab).unwrap();
        assert_eq!((f.gamma, f.down.clone(), f.up.clone()), (a, vec![], vec![1]));
        let f = zigzag_factor(&u, aba, ab).unwrap();
        assert_eq!((f.gamma, f.down.clone(), f.up.clone()), (ab, vec![0], vec![]));
        assert!(matches!(zigzag_factor(&u, ab, a), Err(UnravelError::NotRelated { .. })));
    }

    #[test]
    fn valleys_on_chain2() {
        let u = unravel(&chain2(), "a", 5).unwrap();
        let r = check_rho_valleys(&u, 5);
        assert!(r.violations.is_empty());
        assert!(r.chains > u.len());
    }

    #[test]
    fn theory_check_on_chain2() {
        let check = b_theory_check(&chain2(), "a", 4, 3).unwrap();
        assert!(check.is_ok(), "{check:?}");
        assert_eq!(check.nodes_checked, unravel(&chain2(), "a", 4).unwrap().len());
        let u = unravel(&chain2(), "a", 4).unwrap();
        let ab = u.find_id("a/b").unwrap();
        let top_co_p = crate::formula::parse("true -< p").unwrap();
        let at_node = crate::semantics::satisfies_at(u.model(), u.model_index(ab), &top_co_p).unwrap();
        let at_b = crate::semantics::satisfies(&chain2(), "b", &top_co_p).unwrap();
        assert!(at_node && at_b);
    }

    #[test]
    fn length_guard_misses_tall_truncation() {
        let m = Arc::new(
            KripkeModel::build(
                &["p", "q"],
                &["a", "b", "c"],
                &[("a", "b"), ("b", "c")],
                &[("p", &["a", "b", "c"]), ("q", &["b", "c"])],
            )
            .unwrap(),
        );
        let f = crate::formula::parse("(p -< (p -< q)) -> false").unwrap();
        let u = unravel(&m, "a", 4).unwrap();
        assert!(crate::semantics::satisfies(&m, "a", &f).unwrap());
        assert!(!crate::semantics::satisfies_at(u.model(), u.model_index(0), &f).unwrap());
        let loose = b_theory_check_with(&m, "a", 4, 3, Guard::Length).unwrap();
        assert_eq!(loose.mismatches.len(), 1);
        assert_eq!(loose.mismatches[0].node, "a");
        assert!(b_theory_check_with(&m, "a", 4, 3, Guard::Height).unwrap().is_ok());
    }

    #[test]
    fn rank_must_fit() {
        assert!(matches!(b_theory_check(&chain2(), "a", 3, 3), Err(UnravelError::RankTooHigh { .. })));
    }
}
