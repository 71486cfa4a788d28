//! Bi-intuitionistic propositional formulas.
//!
//! Formulas are built from `⊥`, propositional letters, `∧`, `∨`, implication `→`
//! and co-implication `≪`. Negation and `⊤` are sugar: `~φ` is `φ → ⊥` and
//! `true` is `⊥ → ⊥`.

mod parse;

use std::fmt;
use std::sync::Arc;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid letter name {0:?}: expected [a-zA-Z][a-zA-Z0-9_+-]* and not a keyword")]
pub struct InvalidLetter(pub String);

/// A propositional letter.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Letter(Arc<str>);

impl Letter {
    pub fn new(name: &str) -> Result<Self, InvalidLetter> {
        if is_valid_letter(name) {
            Ok(Letter(Arc::from(name)))
        } else {
            Err(InvalidLetter(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_valid_letter(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    if name == "true" || name == "false" {
        return false;
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '+' | '-'))
}

impl TryFrom<String> for Letter {
    type Error = InvalidLetter;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Letter::new(&s)
    }
}

impl From<Letter> for String {
    fn from(l: Letter) -> String {
        l.0.to_string()
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A finite, insertion-ordered set of letters.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    letters: IndexSet<Letter>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a signature from letter names, rejecting invalid names.
    pub fn from_names<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self, InvalidLetter> {
        let mut sig = Signature::new();
        for n in names {
            sig.insert(Letter::new(n.as_ref())?);
        }
        Ok(sig)
    }

    /// Returns false if the letter was already present.
    pub fn insert(&mut self, l: Letter) -> bool {
        self.letters.insert(l)
    }

    pub fn contains(&self, l: &Letter) -> bool {
        self.letters.contains(l)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Letter> {
        self.letters.iter()
    }

    pub fn index_of(&self, l: &Letter) -> Option<usize> {
        self.letters.get_index_of(l)
    }

    pub fn is_subset(&self, other: &Signature) -> bool {
        self.letters.iter().all(|l| other.contains(l))
    }

    /// Set equality, ignoring order.
    pub fn same_letters(&self, other: &Signature) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }

    pub fn union(&self, other: &Signature) -> Signature {
        let mut s = self.clone();
        for l in other.iter() {
            s.insert(l.clone());
        }
        s
    }
}

impl FromIterator<Letter> for Signature {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Signature {
            letters: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a Signature {
    type Item = &'a Letter;
    type IntoIter = indexmap::set::Iter<'a, Letter>;
    fn into_iter(self) -> Self::IntoIter {
        self.letters.iter()
    }
}

/// A formula of bi-intuitionistic propositional logic.
///
/// Children are reference counted so that representatives can be shared
/// cheaply between larger formulas.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Bottom,
    Atom(Letter),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    /// `φ → ψ`
    Impl(Arc<Formula>, Arc<Formula>),
    /// `φ ≪ ψ`
    Coimpl(Arc<Formula>, Arc<Formula>),
}

impl Formula {
    pub fn atom(l: Letter) -> Formula {
        Formula::Atom(l)
    }

    /// Convenience for tests and examples; panics on an invalid name.
    pub fn letter(name: &str) -> Formula {
        Formula::Atom(Letter::new(name).expect("valid letter name"))
    }

    pub fn top() -> Formula {
        Formula::implies(Formula::Bottom, Formula::Bottom)
    }

    pub fn neg(f: Formula) -> Formula {
        Formula::implies(f, Formula::Bottom)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Impl(Arc::new(a), Arc::new(b))
    }

    pub fn coimplies(a: Formula, b: Formula) -> Formula {
        Formula::Coimpl(Arc::new(a), Arc::new(b))
    }

    /// Left-nested conjunction; the empty conjunction is `⊤`.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::and).unwrap_or_else(Formula::top)
    }

    /// Left-nested disjunction; the empty disjunction is `⊥`.
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Formula {
        fs.into_iter().reduce(Formula::or).unwrap_or(Formula::Bottom)
    }

    /// Nesting depth of `→` and `≪`. Conjunction and disjunction do not add rank.
    pub fn rank(&self) -> usize {
        match self {
            Formula::Bottom | Formula::Atom(_) => 0,
            Formula::And(a, b) | Formula::Or(a, b) => a.rank().max(b.rank()),
            Formula::Impl(a, b) | Formula::Coimpl(a, b) => 1 + a.rank().max(b.rank()),
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Bottom | Formula::Atom(_) => 1,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Impl(a, b) | Formula::Coimpl(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// The letters occurring in the formula, in order of first occurrence.
    pub fn letters(&self) -> Signature {
        let mut sig = Signature::new();
        self.collect_letters(&mut sig);
        sig
    }

    fn collect_letters(&self, sig: &mut Signature) {
        match self {
            Formula::Bottom => {}
            Formula::Atom(l) => {
                sig.insert(l.clone());
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Impl(a, b) | Formula::Coimpl(a, b) => {
                a.collect_letters(sig);
                b.collect_letters(sig);
            }
        }
    }

    /// Renders with the minimal number of parentheses; `parse` inverts this exactly.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write_to(&mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Bottom | Formula::Atom(_) => 5,
            Formula::And(..) => 4,
            Formula::Or(..) => 3,
            Formula::Coimpl(..) => 2,
            Formula::Impl(..) => 1,
        }
    }

    fn write_to(&self, out: &mut String) {
        let (a, b, op, prec) = match self {
            Formula::Bottom => return out.push_str("false"),
            Formula::Atom(l) => return out.push_str(l.name()),
            Formula::And(a, b) => (a, b, " & ", 4),
            Formula::Or(a, b) => (a, b, " | ", 3),
            Formula::Coimpl(a, b) => (a, b, " -< ", 2),
            Formula::Impl(a, b) => (a, b, " -> ", 1),
        };
        // `->` is right associative, the others left associative. A `-<`
        // directly under `->` is always bracketed so the two arrows never
        // appear side by side.
        let (wrap_left, wrap_right) = if prec == 1 {
            (a.precedence() <= 2, b.precedence() == 2)
        } else {
            (a.precedence() < prec, b.precedence() <= prec)
        };
        write_child(a, wrap_left, out);
        out.push_str(op);
        write_child(b, wrap_right, out);
    }
}

fn write_child(f: &Formula, wrap: bool, out: &mut String) {
    if wrap {
        out.push('(');
        f.write_to(out);
        out.push(')');
    } else {
        f.write_to(out);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({})", self.render())
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
