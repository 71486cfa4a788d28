//! Standard translation into classical first-order logic over partial orders.
//!
//! `ST_x(φ → ψ)` quantifies over the successors of `x` and `ST_x(φ ≪ ψ)` over
//! its predecessors. Bound variables are named after their quantifier depth,
//! so translations of subformulas at the same variable are literally equal
//! and no quantifier captures an outer variable.

mod emit;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::formula::{Formula, Letter, Signature};
use crate::kripke::KripkeModel;

pub use emit::{emit, escape, Format};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoError {
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
    #[error("predicate P_{0} has no letter in the model")]
    UnknownPredicate(String),
    #[error("constant {0} names no world of the model")]
    UnknownWorld(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A world of a fixed model, used when grounding.
    World(String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::World(w) => write!(f, "'{w}'"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FOFormula {
    Top,
    Bottom,
    Pred(Letter, Term),
    Leq(Term, Term),
    Eq(Term, Term),
    Not(Box<FOFormula>),
    And(Vec<FOFormula>),
    Or(Vec<FOFormula>),
    Implies(Box<FOFormula>, Box<FOFormula>),
    Forall(String, Box<FOFormula>),
    Exists(String, Box<FOFormula>),
}

impl FOFormula {
    pub fn not(f: FOFormula) -> FOFormula {
        FOFormula::Not(Box::new(f))
    }

    pub fn implies(a: FOFormula, b: FOFormula) -> FOFormula {
        FOFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, f: FOFormula) -> FOFormula {
        FOFormula::Forall(v.to_string(), Box::new(f))
    }

    pub fn exists(v: &str, f: FOFormula) -> FOFormula {
        FOFormula::Exists(v.to_string(), Box::new(f))
    }

    pub fn leq(a: &str, b: &str) -> FOFormula {
        FOFormula::Leq(Term::var(a), Term::var(b))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &[String]| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            FOFormula::Top | FOFormula::Bottom => {}
            FOFormula::Pred(_, t) => term(t, bound),
            FOFormula::Leq(a, b) | FOFormula::Eq(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            FOFormula::Not(a) => a.collect_free(bound, out),
            FOFormula::And(fs) | FOFormula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            FOFormula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            FOFormula::Forall(v, a) | FOFormula::Exists(v, a) => {
                bound.push(v.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Letters used by predicates, in first-use order.
    pub fn letters(&self) -> Signature {
        fn go(f: &FOFormula, sig: &mut Signature) {
            match f {
                FOFormula::Pred(l, _) => {
                    sig.insert(l.clone());
                }
                FOFormula::Not(a) | FOFormula::Forall(_, a) | FOFormula::Exists(_, a) => go(a, sig),
                FOFormula::And(fs) | FOFormula::Or(fs) => fs.iter().for_each(|f| go(f, sig)),
                FOFormula::Implies(a, b) => {
                    go(a, sig);
                    go(b, sig);
                }
                _ => {}
            }
        }
        let mut sig = Signature::new();
        go(self, &mut sig);
        sig
    }

    /// Universal closure over the free variables, in name order.
    pub fn close(self) -> FOFormula {
        self.free_vars().into_iter().rev().fold(self, |f, v| FOFormula::Forall(v, Box::new(f)))
    }
}

impl fmt::Display for FOFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atomic(g: &FOFormula) -> bool {
            matches!(
                g,
                FOFormula::Top | FOFormula::Bottom | FOFormula::Pred(..) | FOFormula::Leq(..) | FOFormula::Eq(..) | FOFormula::Not(_)
            ) || matches!(g, FOFormula::Forall(..) | FOFormula::Exists(..))
        }
        let sub = |g: &FOFormula, f: &mut fmt::Formatter<'_>| if atomic(g) { write!(f, "{g}") } else { write!(f, "({g})") };
        let join = |fs: &[FOFormula], op: &str, empty: &str, f: &mut fmt::Formatter<'_>| {
            if fs.is_empty() {
                return f.write_str(empty);
            }
            for (i, g) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                sub(g, f)?;
            }
            Ok(())
        };
        match self {
            FOFormula::Top => f.write_str("⊤"),
            FOFormula::Bottom => f.write_str("⊥"),
            FOFormula::Pred(l, t) => write!(f, "P_{l}({t})"),
            FOFormula::Leq(a, b) => write!(f, "{a}≤{b}"),
            FOFormula::Eq(a, b) => write!(f, "{a}={b}"),
            FOFormula::Not(a) => {
                f.write_str("¬")?;
                sub(a, f)
            }
            FOFormula::And(fs) => join(fs, "∧", "⊤", f),
            FOFormula::Or(fs) => join(fs, "∨", "⊥", f),
            FOFormula::Implies(a, b) => {
                sub(a, f)?;
                f.write_str(" → ")?;
                sub(b, f)
            }
            FOFormula::Forall(v, a) => write!(f, "∀{v}({a})"),
            FOFormula::Exists(v, a) => write!(f, "∃{v}({a})"),
        }
    }
}

/// `ST_x(f)`. The result has `x` as its only free variable (none for
/// letter-free formulas without modalities).
pub fn translate(f: &Formula, x: &str) -> FOFormula {
    let prefix = if x.starts_with('y') { "z" } else { "y" };
    st(f, x, 1, prefix)
}

fn st(f: &Formula, x: &str, depth: usize, prefix: &str) -> FOFormula {
    match f {
        Formula::Bottom => FOFormula::Bottom,
        Formula::Atom(l) => FOFormula::Pred(l.clone(), Term::var(x)),
        Formula::And(a, b) => FOFormula::And(vec![st(a, x, depth, prefix), st(b, x, depth, prefix)]),
        Formula::Or(a, b) => FOFormula::Or(vec![st(a, x, depth, prefix), st(b, x, depth, prefix)]),
        Formula::Impl(a, b) => {
            let y = format!("{prefix}{depth}");
            let body = FOFormula::implies(st(a, &y, depth + 1, prefix), st(b, &y, depth + 1, prefix));
            FOFormula::forall(&y, FOFormula::implies(FOFormula::leq(x, &y), body))
        }
        Formula::Coimpl(a, b) => {
            let y = format!("{prefix}{depth}");
            let body = vec![
                FOFormula::leq(&y, x),
                st(a, &y, depth + 1, prefix),
                FOFormula::not(st(b, &y, depth + 1, prefix)),
            ];
            FOFormula::exists(&y, FOFormula::And(body))
        }
    }
}

pub type Env = HashMap<String, usize>;

/// Classical evaluation over the worlds of `m`, with `≤` read as the order.
pub fn eval_fo(m: &KripkeModel, g: &FOFormula, env: &Env) -> Result<bool, FoError> {
    let mut env = env.clone();
    eval(m, g, &mut env)
}

fn term(m: &KripkeModel, t: &Term, env: &Env) -> Result<usize, FoError> {
    match t {
        Term::Var(v) => env.get(v).copied().ok_or_else(|| FoError::UnboundVariable(v.clone())),
        Term::World(w) => m.index_of(w).ok_or_else(|| FoError::UnknownWorld(w.clone())),
    }
}

fn eval(m: &KripkeModel, g: &FOFormula, env: &mut Env) -> Result<bool, FoError> {
    Ok(match g {
        FOFormula::Top => true,
        FOFormula::Bottom => false,
        FOFormula::Pred(l, t) => {
            let i = term(m, t, env)?;
            m.holds_atom(l, i).ok_or_else(|| FoError::UnknownPredicate(l.to_string()))?
        }
        FOFormula::Leq(a, b) => m.leq(term(m, a, env)?, term(m, b, env)?),
        FOFormula::Eq(a, b) => term(m, a, env)? == term(m, b, env)?,
        FOFormula::Not(a) => !eval(m, a, env)?,
        FOFormula::And(fs) => {
            for f in fs {
                if !eval(m, f, env)? {
                    return Ok(false);
                }
            }
            true
        }
        FOFormula::Or(fs) => {
            for f in fs {
                if eval(m, f, env)? {
                    return Ok(true);
                }
            }
            false
        }
        FOFormula::Implies(a, b) => !eval(m, a, env)? || eval(m, b, env)?,
        FOFormula::Forall(v, a) | FOFormula::Exists(v, a) => {
            let universal = matches!(g, FOFormula::Forall(..));
            let saved = env.get(v).copied();
            let mut result = universal;
            for w in 0..m.len() {
                env.insert(v.clone(), w);
                if eval(m, a, env)? != universal {
                    result = !universal;
                    break;
                }
            }
            match saved {
                Some(s) => env.insert(v.clone(), s),
                None => env.remove(v),
            };
            result
        }
    })
}

/// A named first-order axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axiom {
    pub name: String,
    pub formula: FOFormula,
}

/// Axioms plus a closed goal, ready to hand to a prover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FOProblem {
    pub axioms: Vec<Axiom>,
    pub goal: FOFormula,
    pub letters: Signature,
    /// World names that appear as constants (grounded problems only).
    pub constants: Vec<String>,
}

fn frame_axioms(letters: &Signature) -> Vec<Axiom> {
    let ax = |name: &str, formula: FOFormula| Axiom { name: name.to_string(), formula };
    let mut out = vec![
        ax("reflexivity", FOFormula::forall("x", FOFormula::leq("x", "x"))),
        ax(
            "transitivity",
            FOFormula::forall(
                "x",
                FOFormula::forall(
                    "y",
                    FOFormula::forall(
                        "z",
                        FOFormula::implies(FOFormula::And(vec![FOFormula::leq("x", "y"), FOFormula::leq("y", "z")]), FOFormula::leq("x", "z")),
                    ),
                ),
            ),
        ),
        ax(
            "antisymmetry",
            FOFormula::forall(
                "x",
                FOFormula::forall(
                    "y",
                    FOFormula::implies(
                        FOFormula::And(vec![FOFormula::leq("x", "y"), FOFormula::leq("y", "x")]),
                        FOFormula::Eq(Term::var("x"), Term::var("y")),
                    ),
                ),
            ),
        ),
    ];
    for l in letters {
        let p = |v: &str| FOFormula::Pred(l.clone(), Term::var(v));
        out.push(ax(
            &format!("monotone_{}", escape(l.name())),
            FOFormula::forall(
                "x",
                FOFormula::forall("y", FOFormula::implies(FOFormula::And(vec![FOFormula::leq("x", "y"), p("x")]), p("y"))),
            ),
        ));
    }
    out
}

impl FOProblem {
    /// `f` is valid on all models iff the frame axioms entail `∀x ST_x(f)`.
    pub fn validity(f: &Formula) -> FOProblem {
        let letters = f.letters();
        FOProblem { axioms: frame_axioms(&letters), goal: translate(f, "x").close(), letters, constants: Vec::new() }
    }

    /// Pins the domain to the worlds of `m` with its full order and
    /// valuation diagrams, so the axioms entail `ST(f)` at `w` iff
    /// `m, w ⊨ f`.
    pub fn grounded(m: &KripkeModel, w: &str, f: &Formula) -> Result<FOProblem, FoError> {
        let wi = m.index_of(w).ok_or_else(|| FoError::UnknownWorld(w.to_string()))?;
        let letters = m.signature().clone();
        for l in &f.letters() {
            if !letters.contains(l) {
                return Err(FoError::UnknownPredicate(l.to_string()));
            }
        }
        let ax = |name: String, formula: FOFormula| Axiom { name, formula };
        let world = |i: usize| Term::World(m.world(i).to_string());
        let mut axioms = frame_axioms(&letters);
        let n = m.len();
        let mut distinct = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                distinct.push(FOFormula::not(FOFormula::Eq(world(i), world(j))));
            }
        }
        if !distinct.is_empty() {
            axioms.push(ax("distinct".into(), FOFormula::And(distinct)));
        }
        let closure = FOFormula::Or((0..n).map(|i| FOFormula::Eq(Term::var("x"), world(i))).collect());
        axioms.push(ax("domain".into(), FOFormula::forall("x", closure)));
        let mut order = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let lit = FOFormula::Leq(world(i), world(j));
                order.push(if m.leq(i, j) { lit } else { FOFormula::not(lit) });
            }
        }
        axioms.push(ax("order".into(), FOFormula::And(order)));
        for l in &letters {
            let lits = (0..n)
                .map(|i| {
                    let lit = FOFormula::Pred(l.clone(), world(i));
                    if m.holds_atom(l, i) == Some(true) {
                        lit
                    } else {
                        FOFormula::not(lit)
                    }
                })
                .collect();
            axioms.push(ax(format!("valuation_{}", escape(l.name())), FOFormula::And(lits)));
        }
        let goal = substitute(&translate(f, "x"), "x", &world(wi));
        Ok(FOProblem { axioms, goal, letters, constants: m.worlds().to_vec() })
    }
}

/// Replaces free occurrences of `v` by `t`.
fn substitute(f: &FOFormula, v: &str, t: &Term) -> FOFormula {
    let st = |s: &Term| match s {
        Term::Var(u) if u == v => t.clone(),
        _ => s.clone(),
    };
    match f {
        FOFormula::Top | FOFormula::Bottom => f.clone(),
        FOFormula::Pred(l, s) => FOFormula::Pred(l.clone(), st(s)),
        FOFormula::Leq(a, b) => FOFormula::Leq(st(a), st(b)),
        FOFormula::Eq(a, b) => FOFormula::Eq(st(a), st(b)),
        FOFormula::Not(a) => FOFormula::not(substitute(a, v, t)),
        FOFormula::And(fs) => FOFormula::And(fs.iter().map(|g| substitute(g, v, t)).collect()),
        FOFormula::Or(fs) => FOFormula::Or(fs.iter().map(|g| substitute(g, v, t)).collect()),
        FOFormula::Implies(a, b) => FOFormula::implies(substitute(a, v, t), substitute(b, v, t)),
        FOFormula::Forall(u, _) | FOFormula::Exists(u, _) if u == v => f.clone(),
        FOFormula::Forall(u, a) => FOFormula::forall(u, substitute(a, v, t)),
        FOFormula::Exists(u, a) => FOFormula::exists(u, substitute(a, v, t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::semantics::satisfies_at;

    fn chain2() -> KripkeModel {
        KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap()
    }

    fn env(x: usize) -> Env {
        Env::from([("x".to_string(), x)])
    }

    #[test]
    fn clause_shapes() {
        let t = |s: &str| translate(&parse(s).unwrap(), "x").to_string();
        assert_eq!(t("p"), "P_p(x)");
        assert_eq!(t("p -> q"), "∀y1(x≤y1 → (P_p(y1) → P_q(y1)))");
        assert_eq!(t("p -< q"), "∃y1(y1≤x ∧ P_p(y1) ∧ ¬P_q(y1))");
        assert_eq!(t("false"), "⊥");
    }

    #[test]
    fn compositional() {
        let (a, b) = (parse("p -> q").unwrap(), parse("q -< (p -> q)").unwrap());
        let both = translate(&Formula::and(a.clone(), b.clone()), "x");
        assert_eq!(both, FOFormula::And(vec![translate(&a, "x"), translate(&b, "x")]));
    }

    #[test]
    fn only_the_root_is_free() {
        let f = translate(&parse("(p -< (q -> p)) -> ~p").unwrap(), "x");
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), ["x"]);
        let g = translate(&parse("p -> p").unwrap(), "y1");
        assert_eq!(g.free_vars().into_iter().collect::<Vec<_>>(), ["y1"]);
    }

    #[test]
    fn double_negation_on_chain() {
        let m = chain2();
        let f = parse("~~p").unwrap();
        assert!(eval_fo(&m, &translate(&f, "x"), &env(0)).unwrap());
        assert!(satisfies_at(&m, 0, &f).unwrap());
    }

    #[test]
    fn frame_axioms_hold() {
        let m = chain2();
        for ax in FOProblem::validity(&parse("p").unwrap()).axioms {
            assert!(eval_fo(&m, &ax.formula, &Env::new()).unwrap(), "{}", ax.name);
        }
    }

    #[test]
    fn grounded_axioms_hold_and_goal_matches() {
        let m = chain2();
        let f = parse("true -< p").unwrap();
        for (i, w) in ["a", "b"].iter().enumerate() {
            let prob = FOProblem::grounded(&m, w, &f).unwrap();
            assert!(prob.axioms.iter().all(|a| eval_fo(&m, &a.formula, &Env::new()).unwrap()));
            assert_eq!(eval_fo(&m, &prob.goal, &Env::new()).unwrap(), satisfies_at(&m, i, &f).unwrap());
        }
    }

    #[test]
    fn errors() {
        let m = chain2();
        let f = translate(&parse("q").unwrap(), "x");
        assert_eq!(eval_fo(&m, &f, &env(0)), Err(FoError::UnknownPredicate("q".into())));
        let g = translate(&parse("p").unwrap(), "x");
        assert_eq!(eval_fo(&m, &g, &Env::new()), Err(FoError::UnboundVariable("x".into())));
        assert!(FOProblem::grounded(&m, "c", &parse("p").unwrap()).is_err());
    }
}
