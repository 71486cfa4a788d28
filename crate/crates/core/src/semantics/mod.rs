//! The satisfaction relation, rank-bounded theories and types.
//!
//! * `w ⊨ p` iff `w ∈ V(p)`; `⊥` never holds; `∧`, `∨` are pointwise.
//! * `w ⊨ φ → ψ` iff every `v` with `w ≺ v` (including `w`) that satisfies
//!   `φ` also satisfies `ψ`.
//! * `w ⊨ φ ≪ ψ` iff some `v` with `v ≺ w` (including `w`) satisfies `φ` and
//!   refutes `ψ`.

mod types;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::Bits;
use crate::enumerate::{enumerate_formulas, EnumError, FormulaSpace};
use crate::formula::{Formula, Signature};
use crate::kripke::{KripkeModel, PointedModel};

pub use types::{is_type, realize, type_verdicts, Direction, TypeQuery, TypeVerdicts};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("letter {0} is not in the model's signature")]
    UnknownLetter(String),
    #[error("unknown world {0:?}")]
    UnknownWorld(String),
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error("type characterisations disagree at {world}: subsets={subsets}, witness={witness}, formula={formula}")]
    TypeDisagreement { world: String, subsets: bool, witness: bool, formula: bool },
}

/// Computes truth sets of formulas over one model, caching per subformula node.
pub struct Evaluator<'m> {
    model: &'m KripkeModel,
    memo: HashMap<*const Formula, Bits>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m KripkeModel) -> Self {
        Evaluator { model, memo: HashMap::new() }
    }

    /// The set of worlds satisfying `f`.
    pub fn truth_set(&mut self, f: &Formula) -> Result<Bits, SemanticsError> {
        // Memo keys are node addresses, valid only while `f` is borrowed.
        self.memo.clear();
        self.eval(f)
    }

    pub fn holds(&mut self, world: usize, f: &Formula) -> Result<bool, SemanticsError> {
        Ok(self.truth_set(f)?.contains(world))
    }

    fn eval(&mut self, f: &Formula) -> Result<Bits, SemanticsError> {
        let key = f as *const Formula;
        if let Some(b) = self.memo.get(&key) {
            return Ok(b.clone());
        }
        let m = self.model;
        let n = m.len();
        let out = match f {
            Formula::Bottom => Bits::empty(n),
            Formula::Atom(l) => m.valuation(l).cloned().ok_or_else(|| SemanticsError::UnknownLetter(l.to_string()))?,
            Formula::And(a, b) => self.eval(a)?.and(&self.eval(b)?),
            Formula::Or(a, b) => self.eval(a)?.or(&self.eval(b)?),
            Formula::Impl(a, b) => {
                let diff = self.eval(a)?.and_not(&self.eval(b)?);
                Bits::from_indices(n, (0..n).filter(|&w| !m.up(w).intersects(&diff)))
            }
            Formula::Coimpl(a, b) => {
                let diff = self.eval(a)?.and_not(&self.eval(b)?);
                Bits::from_indices(n, (0..n).filter(|&w| m.down(w).intersects(&diff)))
            }
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

pub fn truth_set(m: &KripkeModel, f: &Formula) -> Result<Bits, SemanticsError> {
    Evaluator::new(m).truth_set(f)
}

/// `m, w ⊨ f`.
pub fn satisfies(m: &KripkeModel, w: &str, f: &Formula) -> Result<bool, SemanticsError> {
    let i = m.index_of(w).ok_or_else(|| SemanticsError::UnknownWorld(w.to_string()))?;
    satisfies_at(m, i, f)
}

pub fn satisfies_at(m: &KripkeModel, w: usize, f: &Formula) -> Result<bool, SemanticsError> {
    Ok(truth_set(m, f)?.contains(w))
}

pub fn satisfies_pointed(pm: &PointedModel, f: &Formula) -> Result<bool, SemanticsError> {
    satisfies_at(&pm.model, pm.point(), f)
}

/// A rank-bounded theory: representatives of the formula classes true
/// (positive) and false (negative) at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub positive: Vec<Formula>,
    pub negative: Vec<Formula>,
    pub rank_bound: usize,
    pub signature: Signature,
}

/// The theory of `pm` over `sig` up to `max_rank`, with classes deduplicated
/// over `context ∪ {pm}`.
pub fn theory(pm: &PointedModel, sig: &Signature, max_rank: usize, context: &[PointedModel]) -> Result<Theory, SemanticsError> {
    if let Some(l) = sig.iter().find(|l| !pm.model.signature().contains(l)) {
        return Err(SemanticsError::UnknownLetter(l.to_string()));
    }
    let mut ctx = vec![pm.clone()];
    ctx.extend(context.iter().cloned());
    let reps = enumerate_formulas(sig, max_rank, &ctx)?;
    let mut eval = Evaluator::new(&pm.model);
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for f in reps {
        if eval.holds(pm.point(), &f)? {
            positive.push(f);
        } else {
            negative.push(f);
        }
    }
    Ok(Theory { positive, negative, rank_bound: max_rank, signature: sig.clone() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inclusion {
    pub included: bool,
    /// A formula true at the first point and false at the second.
    pub counterexample: Option<Formula>,
}

/// Whether every formula of rank at most `max_rank` true at `a` is true at `b`.
///
/// The counterexample, when there is one, is the smallest by rank, then size,
/// then rendering.
pub fn theory_included(a: &PointedModel, b: &PointedModel, sig: &Signature, max_rank: usize) -> Result<Inclusion, SemanticsError> {
    let space = FormulaSpace::build(sig, max_rank, &[a.model.clone(), b.model.clone()])?;
    Ok(inclusion_in(&space, space.global_of(a), space.global_of(b)))
}

pub(crate) fn inclusion_in(space: &FormulaSpace, ga: usize, gb: usize) -> Inclusion {
    let counterexample = space
        .classes()
        .iter()
        .filter(|c| c.truth.contains(ga) && !c.truth.contains(gb))
        .min_by(|x, y| (x.rank, x.size).cmp(&(y.rank, y.size)).then_with(|| x.formula.render().cmp(&y.formula.render())))
        .map(|c| c.formula.clone());
    Inclusion { included: counterexample.is_none(), counterexample }
}

/// Shorthand for a pointed model over a shared model.
pub fn pointed(m: &Arc<KripkeModel>, w: &str) -> Result<PointedModel, SemanticsError> {
    PointedModel::new(m.clone(), w).map_err(|_| SemanticsError::UnknownWorld(w.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn point_p() -> Arc<KripkeModel> {
        Arc::new(KripkeModel::build(&["p"], &["u"], &[], &[("p", &["u"])]).unwrap())
    }

    fn chain2() -> Arc<KripkeModel> {
        Arc::new(KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap())
    }

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn satisfaction_examples() {
        assert!(satisfies(&point_p(), "u", &f("p")).unwrap());
        let c = chain2();
        assert!(satisfies(&c, "a", &f("(p -> false) -> false")).unwrap());
        assert!(!satisfies(&c, "a", &f("p")).unwrap());
        assert!(satisfies(&c, "b", &f("true -< p")).unwrap());
        assert!(!satisfies(&point_p(), "u", &f("true -< p")).unwrap());
        assert!(!satisfies(&c, "a", &f("false")).unwrap());
    }

    #[test]
    fn satisfaction_errors() {
        let c = chain2();
        assert_eq!(satisfies(&c, "z", &f("p")), Err(SemanticsError::UnknownWorld("z".into())));
        assert_eq!(satisfies(&c, "a", &f("q")), Err(SemanticsError::UnknownLetter("q".into())));
    }

    #[test]
    fn shared_subformulas_are_evaluated_once() {
        let c = chain2();
        let shared = f("p -< (p -> false)");
        let big = Formula::and(shared.clone(), shared);
        assert_eq!(truth_set(&c, &big).unwrap(), truth_set(&c, &f("p -< (p -> false)")).unwrap());
    }

    #[test]
    fn rank_zero_theory_of_point() {
        let pm = pointed(&point_p(), "u").unwrap();
        let sig = pm.model.signature().clone();
        let th = theory(&pm, &sig, 0, &[]).unwrap();
        assert_eq!(th.positive, vec![f("p")]);
        assert_eq!(th.negative, vec![Formula::Bottom]);
        assert_eq!(th.rank_bound, 0);
    }

    #[test]
    fn inclusion_counterexamples() {
        let sig = Signature::from_names(["p"]).unwrap();
        let b = pointed(&chain2(), "b").unwrap();
        let u = pointed(&point_p(), "u").unwrap();
        assert!(theory_included(&b, &b, &sig, 3).unwrap().included);
        let bu = theory_included(&b, &u, &sig, 4).unwrap();
        assert!(!bu.included);
        assert_eq!(bu.counterexample.unwrap().render(), "(false -> false) -< p");
        let ub = theory_included(&u, &b, &sig, 4).unwrap();
        assert_eq!(ub.counterexample.unwrap().render(), "((false -> false) -< p) -> false");
    }
}
