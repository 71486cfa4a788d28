use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::formula::{Formula, Letter};
use crate::kripke::{KripkeModel, PointedModel};
use crate::random::rng;
use crate::semantics::satisfies_pointed;

use super::{Asim, BiasimError, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    Atom,
    Back,
    Forth,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Letter(Letter),
    /// A world of the target model for back failures, of the source model
    /// for forth failures.
    World(usize),
}

type Key = (Side, usize, usize);

/// Why a pair left the relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub side: Side,
    pub from: usize,
    pub to: usize,
    pub condition: Condition,
    pub witness: Witness,
    pub round: usize,
    /// Earlier removals that left the witness without a partner, one per
    /// candidate partner in index order.
    pub causes: Vec<(Side, usize, usize)>,
}

#[derive(Clone, Debug, Default)]
pub struct RefutationTrace {
    removals: Vec<Removal>,
    index: HashMap<Key, usize>,
}

impl RefutationTrace {
    pub fn removals(&self) -> &[Removal] {
        &self.removals
    }

    pub fn get(&self, side: Side, from: usize, to: usize) -> Option<&Removal> {
        self.index.get(&(side, from, to)).map(|&i| &self.removals[i])
    }

    fn push(&mut self, r: Removal) {
        self.index.insert((r.side, r.from, r.to), self.removals.len());
        self.removals.push(r);
    }
}

#[derive(Clone, Debug)]
pub struct Fixpoint {
    /// Every pair that survived refinement.
    pub relation: Asim,
    pub trace: RefutationTrace,
    /// Modal rounds that removed something. A pair removed in round `k` has
    /// a separating formula of rank at most `k`.
    pub rounds: usize,
}

impl Fixpoint {
    /// The relation after `k` modal rounds: the fixpoint plus every pair
    /// removed in a later round. Round 0 is the atom filter.
    pub fn approximant(&self, k: usize) -> Asim {
        let mut a = self.relation.clone();
        for r in self.trace.removals().iter().filter(|r| r.round > k) {
            a.insert(r.side, r.from, r.to);
        }
        a
    }

    /// The synthesized formula separating a removed pair: true at `from`,
    /// false at `to`.
    pub fn separator(&self, side: Side, from: usize, to: usize) -> Option<Formula> {
        self.trace.get(side, from, to)?;
        synthesize(&self.trace, &self.relation).remove(&(side, from, to))
    }
}

fn check_signatures(left: &KripkeModel, right: &KripkeModel) -> Result<(), BiasimError> {
    if left.signature().same_letters(right.signature()) {
        Ok(())
    } else {
        Err(BiasimError::SignatureMismatch)
    }
}

fn atom_filtered(left: &Arc<KripkeModel>, right: &Arc<KripkeModel>, trace: &mut RefutationTrace) -> Asim {
    let mut a = Asim::full(left.clone(), right.clone());
    let all: Vec<Key> = a.pairs().collect();
    for (side, x, y) in all {
        if let Some(l) = a.atom_failure(side, x, y).cloned() {
            trace.push(Removal {
                side,
                from: x,
                to: y,
                condition: Condition::Atom,
                witness: Witness::Letter(l),
                round: 0,
                causes: Vec::new(),
            });
        }
    }
    for r in &trace.removals {
        a.remove(r.side, r.from, r.to);
    }
    a
}

/// Checks one pair against `a` and explains the failure, if any.
fn diagnose(a: &Asim, side: Side, x: usize, y: usize, round: usize) -> Option<Removal> {
    let (src, dst) = (a.source(side), a.target(side));
    if let Some(t) = a.back_failure(side, x, y) {
        let causes = src
            .up(x)
            .iter()
            .map(|u| if a.contains(side.flip(), t, u) { (side, u, t) } else { (side.flip(), t, u) })
            .collect();
        return Some(Removal { side, from: x, to: y, condition: Condition::Back, witness: Witness::World(t), round, causes });
    }
    // `⊤` has rank 1, so a first-round forth witness must satisfy some letter
    // to be described at rank 0.
    let describable = |u: usize| round > 1 || !a.atoms_at(side, u).is_empty();
    if let Some(u) = a.forth_failure_where(side, x, y, describable) {
        let causes = dst
            .down(y)
            .iter()
            .map(|t| if a.contains(side, u, t) { (side.flip(), t, u) } else { (side, u, t) })
            .collect();
        return Some(Removal { side, from: x, to: y, condition: Condition::Forth, witness: Witness::World(u), round, causes });
    }
    None
}

/// Greatest-fixpoint refinement. Each round checks every surviving pair in
/// lexicographic order against the relation as it stood at the start of the
/// round, so a pair removed in round `k` only depends on removals from
/// rounds before `k`.
pub fn refine(left: &Arc<KripkeModel>, right: &Arc<KripkeModel>) -> Result<Fixpoint, BiasimError> {
    check_signatures(left, right)?;
    let mut trace = RefutationTrace::default();
    let mut a = atom_filtered(left, right, &mut trace);
    let mut rounds = 0;
    for round in 1.. {
        let removed: Vec<Removal> = a.pairs().filter_map(|(s, x, y)| diagnose(&a, s, x, y, round)).collect();
        // Round 1 is restricted, so an empty first round is not yet stable.
        if removed.is_empty() && round > 1 {
            break;
        }
        if !removed.is_empty() {
            rounds = round;
        }
        for r in removed {
            a.remove(r.side, r.from, r.to);
            trace.push(r);
        }
    }
    Ok(Fixpoint { relation: a, trace, rounds })
}

/// The same fixpoint reached by a different strategy: pairs are scanned in a
/// seeded random order and removed as soon as they fail.
pub fn refine_shuffled(left: &Arc<KripkeModel>, right: &Arc<KripkeModel>, seed: u64) -> Result<Asim, BiasimError> {
    check_signatures(left, right)?;
    let mut a = atom_filtered(left, right, &mut RefutationTrace::default());
    let mut rng = rng(seed);
    loop {
        let mut order: Vec<Key> = a.pairs().collect();
        order.shuffle(&mut rng);
        let mut changed = false;
        for (s, x, y) in order {
            if a.back_failure(s, x, y).is_some() || a.forth_failure(s, x, y).is_some() {
                a.remove(s, x, y);
                changed = true;
            }
        }
        if !changed {
            return Ok(a);
        }
    }
}

/// The greatest bi-asimulation from `from` to `to`, if the point pair survives.
pub fn greatest_biasim(from: &PointedModel, to: &PointedModel) -> Result<Option<Asim>, BiasimError> {
    let fp = refine(&from.model, &to.model)?;
    Ok(fp.relation.contains(Side::OneToTwo, from.point(), to.point()).then_some(fp.relation))
}

fn distinct(mut fs: Vec<Formula>) -> Vec<Formula> {
    let mut seen = std::collections::HashSet::new();
    fs.retain(|f| seen.insert(f.clone()));
    fs
}

/// Builds a separating formula for every removed pair, in removal order.
fn synthesize(trace: &RefutationTrace, rel: &Asim) -> HashMap<Key, Formula> {
    let mut sep: HashMap<Key, Formula> = HashMap::new();
    for r in trace.removals() {
        let f = match (&r.condition, &r.witness) {
            (Condition::Atom, Witness::Letter(l)) => Formula::Atom(l.clone()),
            (Condition::Back, Witness::World(_)) => {
                let (mut alphas, mut betas) = (Vec::new(), Vec::new());
                for c in &r.causes {
                    // `(t, u)` removed: its formula holds at `t` and fails at `u`.
                    if c.0 == r.side.flip() {
                        alphas.push(sep[c].clone());
                    } else {
                        betas.push(sep[c].clone());
                    }
                }
                Formula::implies(Formula::conj(distinct(alphas)), Formula::disj(distinct(betas)))
            }
            (Condition::Forth, Witness::World(u)) => {
                let (mut betas, mut alphas) = (Vec::new(), Vec::new());
                for c in &r.causes {
                    if c.0 == r.side {
                        betas.push(sep[c].clone());
                    } else {
                        alphas.push(sep[c].clone());
                    }
                }
                if betas.is_empty() {
                    betas = rel.atoms_at(r.side, *u).into_iter().map(Formula::Atom).collect();
                }
                Formula::coimplies(Formula::conj(distinct(betas)), Formula::disj(distinct(alphas)))
            }
            _ => unreachable!("atom removals carry letters, the others worlds"),
        };
        sep.insert((r.side, r.from, r.to), f);
    }
    sep
}

/// A formula true at `from` and false at `to`, or `None` when a
/// bi-asimulation exists.
pub fn separating_formula(from: &PointedModel, to: &PointedModel) -> Result<Option<Formula>, BiasimError> {
    separating_formula_with(from, to, false)
}

/// As [`separating_formula`], optionally shrinking the result greedily by
/// replacing conjunctions and disjunctions with one of their sides while the
/// formula still separates.
pub fn separating_formula_with(
    from: &PointedModel,
    to: &PointedModel,
    minimize: bool,
) -> Result<Option<Formula>, BiasimError> {
    let fp = refine(&from.model, &to.model)?;
    let key = (Side::OneToTwo, from.point(), to.point());
    if fp.relation.contains(key.0, key.1, key.2) {
        return Ok(None);
    }
    let mut f = synthesize(&fp.trace, &fp.relation).remove(&key).expect("removed pairs have formulas");
    if minimize {
        f = shrink(f, from, to);
    }
    Ok(Some(f))
}

fn separates(f: &Formula, from: &PointedModel, to: &PointedModel) -> bool {
    satisfies_pointed(from, f).unwrap_or(false) && !satisfies_pointed(to, f).unwrap_or(true)
}

fn shrink(mut f: Formula, from: &PointedModel, to: &PointedModel) -> Formula {
    'outer: loop {
        for c in one_step_shrinks(&f) {
            if separates(&c, from, to) {
                f = c;
                continue 'outer;
            }
        }
        return f;
    }
}

/// Every formula obtained by replacing one `∧`/`∨` node by one of its operands.
fn one_step_shrinks(f: &Formula) -> Vec<Formula> {
    let rebuild = |a: &Formula, b: &Formula, mk: fn(Formula, Formula) -> Formula| -> Vec<Formula> {
        let mut out = Vec::new();
        for a2 in one_step_shrinks(a) {
            out.push(mk(a2, b.clone()));
        }
        for b2 in one_step_shrinks(b) {
            out.push(mk(a.clone(), b2));
        }
        out
    };
    match f {
        Formula::Bottom | Formula::Atom(_) => Vec::new(),
        Formula::And(a, b) | Formula::Or(a, b) => {
            let mk = if matches!(f, Formula::And(..)) { Formula::and } else { Formula::or };
            let mut out = vec![(**a).clone(), (**b).clone()];
            out.extend(rebuild(a, b, mk));
            out
        }
        Formula::Impl(a, b) => rebuild(a, b, Formula::implies),
        Formula::Coimpl(a, b) => rebuild(a, b, Formula::coimplies),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::satisfies;

    fn point_p() -> Arc<KripkeModel> {
        Arc::new(KripkeModel::build(&["p"], &["u"], &[], &[("p", &["u"])]).unwrap())
    }

    fn chain2() -> Arc<KripkeModel> {
        Arc::new(KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap())
    }

    #[test]
    fn chain_top_vs_point() {
        let b = PointedModel::new(chain2(), "b").unwrap();
        let u = PointedModel::new(point_p(), "u").unwrap();
        assert!(greatest_biasim(&b, &u).unwrap().is_none());
        assert!(greatest_biasim(&u, &b).unwrap().is_none());
        let bu = separating_formula(&b, &u).unwrap().unwrap();
        assert_eq!(bu.render(), "(false -> false) -< p");
        assert!(satisfies(&chain2(), "b", &bu).unwrap());
        assert!(!satisfies(&point_p(), "u", &bu).unwrap());
        let ub = separating_formula(&u, &b).unwrap().unwrap();
        assert_eq!(ub.render(), "((false -> false) -< p) -> false");
    }

    #[test]
    fn identity_survives() {
        let m = chain2();
        for w in ["a", "b"] {
            let pm = PointedModel::new(m.clone(), w).unwrap();
            let a = greatest_biasim(&pm, &pm).unwrap().unwrap();
            for i in 0..m.len() {
                assert!(a.contains(Side::OneToTwo, i, i) && a.contains(Side::TwoToOne, i, i));
            }
            assert_eq!(separating_formula(&pm, &pm).unwrap(), None);
        }
    }

    #[test]
    fn shuffled_scan_reaches_same_fixpoint() {
        let (l, r) = (chain2(), point_p());
        let fp = refine(&l, &r).unwrap();
        for seed in 0..10 {
            assert_eq!(refine_shuffled(&l, &r, seed).unwrap(), fp.relation);
        }
    }

    #[test]
    fn trace_causes_precede_their_effects() {
        let fp = refine(&chain2(), &point_p()).unwrap();
        for r in fp.trace.removals() {
            for c in &r.causes {
                assert!(fp.trace.get(c.0, c.1, c.2).unwrap().round < r.round);
            }
        }
    }

    #[test]
    fn signature_mismatch() {
        let q = Arc::new(KripkeModel::build(&["q"], &["u"], &[], &[]).unwrap());
        assert_eq!(refine(&point_p(), &q).unwrap_err(), BiasimError::SignatureMismatch);
    }

    #[test]
    fn minimized_formula_still_separates() {
        let b = PointedModel::new(chain2(), "b").unwrap();
        let u = PointedModel::new(point_p(), "u").unwrap();
        let f = separating_formula_with(&u, &b, true).unwrap().unwrap();
        assert!(separates(&f, &u, &b));
    }
}
