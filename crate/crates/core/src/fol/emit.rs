//! TPTP and SMT-LIB2 text for first-order problems.
//!
//! Both formats use the predicate `p_<letter>` per letter, the relation
//! `leq` and constants `w_<world>`; names are passed through [`escape`].
//! SMT-LIB2 scripts assert the axioms and the negated goal, so `unsat`
//! means the goal follows.

use std::fmt::Write;
use std::str::FromStr;

use super::{FOFormula, FOProblem, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Tptp,
    Smtlib2,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tptp" => Ok(Format::Tptp),
            "smtlib2" => Ok(Format::Smtlib2),
            _ => Err(format!("unknown format {s:?}; expected tptp or smtlib2")),
        }
    }
}

/// Injective renaming into `[A-Za-z0-9_]`: `_` becomes `__`, `+` becomes
/// `_p`, `-` becomes `_m` and any other character `_x<hex>_`.
pub fn escape(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        match c {
            '_' => out.push_str("__"),
            '+' => out.push_str("_p"),
            '-' => out.push_str("_m"),
            c if c.is_ascii_alphanumeric() => out.push(c),
            c => {
                let _ = write!(out, "_x{:x}_", c as u32);
            }
        }
    }
    out
}

pub fn emit(p: &FOProblem, format: Format) -> String {
    match format {
        Format::Tptp => tptp(p),
        Format::Smtlib2 => smtlib2(p),
    }
}

fn plain_var(v: &str) -> bool {
    v.chars().next().is_some_and(|c| c.is_ascii_lowercase()) && v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn tptp_var(v: &str) -> String {
    if plain_var(v) {
        let mut cs = v.chars();
        let first = cs.next().expect("non-empty").to_ascii_uppercase();
        std::iter::once(first).chain(cs).collect()
    } else {
        format!("V_{}", escape(v))
    }
}

fn smt_var(v: &str) -> String {
    if plain_var(v) {
        v.to_string()
    } else {
        format!("v_{}", escape(v))
    }
}

fn tptp_term(t: &Term) -> String {
    match t {
        Term::Var(v) => tptp_var(v),
        Term::World(w) => format!("w_{}", escape(w)),
    }
}

fn tptp_formula(f: &FOFormula) -> String {
    let sub = |g: &FOFormula| match g {
        FOFormula::Top | FOFormula::Bottom | FOFormula::Pred(..) | FOFormula::Leq(..) => tptp_formula(g),
        FOFormula::And(fs) | FOFormula::Or(fs) if fs.len() < 2 => tptp_formula(g),
        _ => format!("({})", tptp_formula(g)),
    };
    let join = |fs: &[FOFormula], op: &str, empty: &str| {
        if fs.is_empty() {
            empty.to_string()
        } else {
            fs.iter().map(sub).collect::<Vec<_>>().join(op)
        }
    };
    match f {
        FOFormula::Top => "$true".into(),
        FOFormula::Bottom => "$false".into(),
        FOFormula::Pred(l, t) => format!("p_{}({})", escape(l.name()), tptp_term(t)),
        FOFormula::Leq(a, b) => format!("leq({},{})", tptp_term(a), tptp_term(b)),
        FOFormula::Eq(a, b) => format!("{} = {}", tptp_term(a), tptp_term(b)),
        FOFormula::Not(a) => format!("~ {}", sub(a)),
        FOFormula::And(fs) => join(fs, " & ", "$true"),
        FOFormula::Or(fs) => join(fs, " | ", "$false"),
        FOFormula::Implies(a, b) => format!("{} => {}", sub(a), sub(b)),
        FOFormula::Forall(v, a) => format!("![{}]: {}", tptp_var(v), sub(a)),
        FOFormula::Exists(v, a) => format!("?[{}]: {}", tptp_var(v), sub(a)),
    }
}

fn tptp(p: &FOProblem) -> String {
    let mut out = String::new();
    for a in &p.axioms {
        let _ = writeln!(out, "fof({}, axiom, {}).", a.name, tptp_formula(&a.formula));
    }
    let _ = writeln!(out, "fof(goal, conjecture, {}).", tptp_formula(&p.goal));
    out
}

fn smt_term(t: &Term) -> String {
    match t {
        Term::Var(v) => smt_var(v),
        Term::World(w) => format!("w_{}", escape(w)),
    }
}

fn smt_formula(f: &FOFormula) -> String {
    let many = |op: &str, fs: &[FOFormula], empty: &str| match fs {
        [] => empty.to_string(),
        [g] => smt_formula(g),
        _ => format!("({op} {})", fs.iter().map(smt_formula).collect::<Vec<_>>().join(" ")),
    };
    match f {
        FOFormula::Top => "true".into(),
        FOFormula::Bottom => "false".into(),
        FOFormula::Pred(l, t) => format!("(p_{} {})", escape(l.name()), smt_term(t)),
        FOFormula::Leq(a, b) => format!("(leq {} {})", smt_term(a), smt_term(b)),
        FOFormula::Eq(a, b) => format!("(= {} {})", smt_term(a), smt_term(b)),
        FOFormula::Not(a) => format!("(not {})", smt_formula(a)),
        FOFormula::And(fs) => many("and", fs, "true"),
        FOFormula::Or(fs) => many("or", fs, "false"),
        FOFormula::Implies(a, b) => format!("(=> {} {})", smt_formula(a), smt_formula(b)),
        FOFormula::Forall(v, a) => format!("(forall (({} W)) {})", smt_var(v), smt_formula(a)),
        FOFormula::Exists(v, a) => format!("(exists (({} W)) {})", smt_var(v), smt_formula(a)),
    }
}

fn smtlib2(p: &FOProblem) -> String {
    let mut out = String::new();
    out.push_str("; unsat means the goal follows from the axioms\n");
    out.push_str("(set-logic UF)\n(declare-sort W 0)\n(declare-fun leq (W W) Bool)\n");
    for l in &p.letters {
        let _ = writeln!(out, "(declare-fun p_{} (W) Bool)", escape(l.name()));
    }
    for c in &p.constants {
        let _ = writeln!(out, "(declare-fun w_{} () W)", escape(c));
    }
    for a in &p.axioms {
        let _ = writeln!(out, "; {}\n(assert {})", a.name, smt_formula(&a.formula));
    }
    let _ = writeln!(out, "; goal\n(assert (not {}))\n(check-sat)", smt_formula(&p.goal));
    out
}
