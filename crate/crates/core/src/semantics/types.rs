use crate::bits::Bits;
use crate::formula::Formula;
use crate::kripke::{KripkeModel, PointedModel};

use super::{Evaluator, SemanticsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Successor,
    Predecessor,
}

/// A finite pair `(Γ, Δ)` asked about as a successor or predecessor type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeQuery {
    pub gamma: Vec<Formula>,
    pub delta: Vec<Formula>,
    pub direction: Direction,
}

impl TypeQuery {
    pub fn successor(gamma: Vec<Formula>, delta: Vec<Formula>) -> Self {
        TypeQuery { gamma, delta, direction: Direction::Successor }
    }

    pub fn predecessor(gamma: Vec<Formula>, delta: Vec<Formula>) -> Self {
        TypeQuery { gamma, delta, direction: Direction::Predecessor }
    }

    /// `⋀Γ → ⋁Δ` for successor queries, `⋀Γ ≪ ⋁Δ` for predecessor queries.
    pub fn characteristic_formula(&self) -> Formula {
        let g = Formula::conj(self.gamma.iter().cloned());
        let d = Formula::disj(self.delta.iter().cloned());
        match self.direction {
            Direction::Successor => Formula::implies(g, d),
            Direction::Predecessor => Formula::coimplies(g, d),
        }
    }
}

/// The three finite characterisations of "`(Γ, Δ)` is a type of `(M, w)`".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TypeVerdicts {
    /// Every pair of finite subsets `Γ' ⊆ Γ`, `Δ' ⊆ Δ` is satisfied at some
    /// successor (predecessor) of `w`.
    pub subsets: bool,
    /// A single successor (predecessor) satisfies all of `Γ` and refutes all of `Δ`.
    pub witness: bool,
    /// `w ⊭ ⋀Γ → ⋁Δ` (successor) or `w ⊨ ⋀Γ ≪ ⋁Δ` (predecessor).
    pub formula: bool,
}

impl TypeVerdicts {
    pub fn agree(&self) -> bool {
        self.subsets == self.witness && self.witness == self.formula
    }
}

fn cone(m: &KripkeModel, w: usize, dir: Direction) -> &Bits {
    match dir {
        Direction::Successor => m.up(w),
        Direction::Predecessor => m.down(w),
    }
}

/// Worlds in the cone of `w` satisfying all of `Γ` and refuting all of `Δ`.
fn witnesses(eval: &mut Evaluator<'_>, m: &KripkeModel, w: usize, q: &TypeQuery) -> Result<Bits, SemanticsError> {
    let mut set = cone(m, w, q.direction).clone();
    for g in &q.gamma {
        set = set.and(&eval.truth_set(g)?);
    }
    for d in &q.delta {
        set = set.and_not(&eval.truth_set(d)?);
    }
    Ok(set)
}

pub fn type_verdicts(pm: &PointedModel, q: &TypeQuery) -> Result<TypeVerdicts, SemanticsError> {
    let m = &*pm.model;
    let w = pm.point();
    let mut eval = Evaluator::new(m);
    let gamma: Vec<Bits> = q.gamma.iter().map(|g| eval.truth_set(g)).collect::<Result<_, _>>()?;
    let delta: Vec<Bits> = q.delta.iter().map(|d| eval.truth_set(d)).collect::<Result<_, _>>()?;
    let cone = cone(m, w, q.direction);

    let mut subsets = true;
    'outer: for gm in 0u64..(1 << gamma.len()) {
        for dm in 0u64..(1 << delta.len()) {
            let mut set = cone.clone();
            for (i, g) in gamma.iter().enumerate() {
                if gm >> i & 1 == 1 {
                    set = set.and(g);
                }
            }
            for (i, d) in delta.iter().enumerate() {
                if dm >> i & 1 == 1 {
                    set = set.and_not(d);
                }
            }
            if set.is_empty() {
                subsets = false;
                break 'outer;
            }
        }
    }

    let witness = !witnesses(&mut eval, m, w, q)?.is_empty();
    let holds = eval.holds(w, &q.characteristic_formula())?;
    let formula = match q.direction {
        Direction::Successor => !holds,
        Direction::Predecessor => holds,
    };
    Ok(TypeVerdicts { subsets, witness, formula })
}

/// Whether `q` is a type of `pm`. The three characterisations must agree;
/// a disagreement is reported as an error.
pub fn is_type(pm: &PointedModel, q: &TypeQuery) -> Result<bool, SemanticsError> {
    assert!(q.gamma.len() < 20 && q.delta.len() < 20, "type queries are checked over all finite subsets");
    let v = type_verdicts(pm, q)?;
    if !v.agree() {
        return Err(SemanticsError::TypeDisagreement {
            world: pm.point_id().to_string(),
            subsets: v.subsets,
            witness: v.witness,
            formula: v.formula,
        });
    }
    Ok(v.witness)
}

/// The least world realising `q` in the cone of `w`, if any.
pub fn realize(m: &KripkeModel, w: &str, q: &TypeQuery) -> Result<Option<String>, SemanticsError> {
    let wi = m.index_of(w).ok_or_else(|| SemanticsError::UnknownWorld(w.to_string()))?;
    let mut eval = Evaluator::new(m);
    Ok(witnesses(&mut eval, m, wi, q)?.iter().next().map(|i| m.world(i).to_string()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::formula::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn fork() -> Arc<KripkeModel> {
        Arc::new(
            KripkeModel::build(&["p", "q"], &["r", "s", "t"], &[("r", "s"), ("r", "t")], &[("p", &["s"]), ("q", &["t"])])
                .unwrap(),
        )
    }

    fn chain2() -> Arc<KripkeModel> {
        Arc::new(KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap())
    }

    #[test]
    fn fork_successor_type() {
        let pm = PointedModel::new(fork(), "r").unwrap();
        let q = TypeQuery::successor(vec![f("p")], vec![f("q")]);
        assert!(is_type(&pm, &q).unwrap());
        assert_eq!(realize(&pm.model, "r", &q).unwrap().as_deref(), Some("s"));
    }

    #[test]
    fn contradictory_pair_is_never_a_type() {
        let pm = PointedModel::new(fork(), "s").unwrap();
        for dir in [Direction::Successor, Direction::Predecessor] {
            let q = TypeQuery { gamma: vec![f("p")], delta: vec![f("p")], direction: dir };
            assert!(!is_type(&pm, &q).unwrap());
        }
    }

    #[test]
    fn own_finite_theory_is_a_type_both_ways() {
        let pm = PointedModel::new(chain2(), "a").unwrap();
        let gamma = vec![f("~p -> false"), f("true")];
        let delta = vec![f("p"), f("p -< false")];
        assert!(is_type(&pm, &TypeQuery::successor(gamma.clone(), delta.clone())).unwrap());
        assert!(is_type(&pm, &TypeQuery::predecessor(gamma, delta)).unwrap());
    }

    #[test]
    fn empty_type_realized_by_least_cone_world() {
        let m = fork();
        let q = TypeQuery::successor(vec![], vec![]);
        assert_eq!(realize(&m, "r", &q).unwrap().as_deref(), Some("r"));
        assert_eq!(realize(&m, "t", &q).unwrap().as_deref(), Some("t"));
    }

    #[test]
    fn predecessor_type_without_witness() {
        let q = TypeQuery::predecessor(vec![f("p")], vec![Formula::Bottom]);
        assert_eq!(realize(&chain2(), "a", &q).unwrap(), None);
        assert!(!is_type(&PointedModel::new(chain2(), "a").unwrap(), &q).unwrap());
    }
}
