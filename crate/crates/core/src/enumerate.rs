//! Rank-bounded formula enumeration, deduplicated by truth sets.
//!
//! Two formulas are identified when they have the same truth value at every
//! world of every model in the context. The enumerator works directly on
//! truth sets: rank `r + 1` adds `a → b` and `a ≪ b` for all classes `a, b`
//! of rank at most `r` and then closes under `∧` and `∨`. Each class keeps
//! the least representative by rank, then size, then rendering.
//!
//! Because the number of truth sets over a finite context is finite, the
//! class list stabilises; once a level adds nothing, higher ranks add nothing
//! either and the enumeration stops early.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::Bits;
use crate::formula::{Formula, Signature};
use crate::kripke::{KripkeModel, PointedModel};

pub const DEFAULT_MAX_CLASSES: usize = 250_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("formula enumeration exceeded {limit} classes while building rank {rank}; reduce the rank")]
    BudgetExceeded { limit: usize, rank: usize },
    #[error("letter {0} is missing from a context model")]
    UnknownLetter(String),
    #[error("enumeration needs at least one context model")]
    EmptyContext,
}

#[derive(Clone, Copy, Debug)]
pub struct EnumConfig {
    pub max_classes: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { max_classes: DEFAULT_MAX_CLASSES }
    }
}

#[derive(Clone, Debug)]
pub struct FormulaClass {
    pub formula: Formula,
    pub rank: usize,
    pub size: usize,
    /// Truth set over the concatenated worlds of the context.
    pub truth: Bits,
}

/// All rank-bounded formula classes over a context of models.
#[derive(Clone, Debug)]
pub struct FormulaSpace {
    models: Vec<Arc<KripkeModel>>,
    offsets: Vec<usize>,
    total: usize,
    classes: Vec<FormulaClass>,
    max_rank: usize,
    stable: bool,
}

struct Builder {
    up: Vec<Bits>,
    down: Vec<Bits>,
    total: usize,
    classes: Vec<FormulaClass>,
    index: HashMap<Bits, usize>,
    limit: usize,
    rank: usize,
}

impl Builder {
    fn insert(&mut self, truth: Bits, rank: usize, size: usize, make: impl FnOnce() -> Formula) -> Result<(), EnumError> {
        match self.index.get(&truth) {
            Some(&i) => {
                let c = &mut self.classes[i];
                let better = match (rank, size).cmp(&(c.rank, c.size)) {
                    std::cmp::Ordering::Less => Some(make()),
                    std::cmp::Ordering::Equal => Some(make()).filter(|f| f.render() < c.formula.render()),
                    std::cmp::Ordering::Greater => None,
                };
                if let Some(f) = better {
                    c.formula = f;
                    c.rank = rank;
                    c.size = size;
                }
            }
            None => {
                if self.classes.len() >= self.limit {
                    return Err(EnumError::BudgetExceeded { limit: self.limit, rank: self.rank });
                }
                self.index.insert(truth.clone(), self.classes.len());
                self.classes.push(FormulaClass { formula: make(), rank, size, truth });
            }
        }
        Ok(())
    }

    fn boolean_closure(&mut self, first_new: usize) -> Result<(), EnumError> {
        let mut k = first_new;
        while k < self.classes.len() {
            for j in 0..=k {
                let (a, b) = (&self.classes[k], &self.classes[j]);
                let rank = a.rank.max(b.rank);
                let size = a.size + b.size + 1;
                let conj = a.truth.and(&b.truth);
                let disj = a.truth.or(&b.truth);
                let (fa, fb) = (a.formula.clone(), b.formula.clone());
                let (ga, gb) = (fa.clone(), fb.clone());
                self.insert(conj, rank, size, || Formula::and(fb, fa))?;
                self.insert(disj, rank, size, || Formula::or(gb, ga))?;
            }
            k += 1;
        }
        Ok(())
    }

    fn modal_level(&mut self, r: usize) -> Result<(), EnumError> {
        let n = self.classes.len();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (&self.classes[i], &self.classes[j]);
                if a.rank.max(b.rank) + 1 != r {
                    continue;
                }
                let diff = a.truth.and_not(&b.truth);
                let imp = Bits::from_indices(self.total, (0..self.total).filter(|&w| !self.up[w].intersects(&diff)));
                let co = Bits::from_indices(self.total, (0..self.total).filter(|&w| self.down[w].intersects(&diff)));
                let size = a.size + b.size + 1;
                let (fa, fb) = (a.formula.clone(), b.formula.clone());
                let (ga, gb) = (fa.clone(), fb.clone());
                self.insert(imp, r, size, || Formula::implies(fa, fb))?;
                self.insert(co, r, size, || Formula::coimplies(ga, gb))?;
            }
        }
        Ok(())
    }
}

impl FormulaSpace {
    pub fn build(sig: &Signature, max_rank: usize, models: &[Arc<KripkeModel>]) -> Result<Self, EnumError> {
        Self::build_with(sig, max_rank, models, EnumConfig::default())
    }

    pub fn build_with(
        sig: &Signature,
        max_rank: usize,
        models: &[Arc<KripkeModel>],
        cfg: EnumConfig,
    ) -> Result<Self, EnumError> {
        if models.is_empty() {
            return Err(EnumError::EmptyContext);
        }
        let mut distinct: Vec<Arc<KripkeModel>> = Vec::new();
        for m in models {
            if !distinct.iter().any(|d| Arc::ptr_eq(d, m) || **d == **m) {
                distinct.push(m.clone());
            }
        }
        let mut offsets = Vec::with_capacity(distinct.len());
        let mut total = 0;
        for m in &distinct {
            offsets.push(total);
            total += m.len();
        }
        let mut up = Vec::with_capacity(total);
        let mut down = Vec::with_capacity(total);
        for (m, &off) in distinct.iter().zip(&offsets) {
            for i in 0..m.len() {
                up.push(Bits::from_indices(total, m.up(i).iter().map(|j| j + off)));
                down.push(Bits::from_indices(total, m.down(i).iter().map(|j| j + off)));
            }
        }
        let mut b = Builder {
            up,
            down,
            total,
            classes: Vec::new(),
            index: HashMap::new(),
            limit: cfg.max_classes,
            rank: 0,
        };
        b.insert(Bits::empty(total), 0, 1, || Formula::Bottom)?;
        for l in sig.iter() {
            let mut truth = Bits::empty(total);
            for (m, &off) in distinct.iter().zip(&offsets) {
                let set = m.valuation(l).ok_or_else(|| EnumError::UnknownLetter(l.to_string()))?;
                for i in set.iter() {
                    truth.insert(i + off);
                }
            }
            b.insert(truth, 0, 1, || Formula::Atom(l.clone()))?;
        }
        b.boolean_closure(0)?;
        let mut stable = false;
        for r in 1..=max_rank {
            b.rank = r;
            let before = b.classes.len();
            b.modal_level(r)?;
            b.boolean_closure(before)?;
            if b.classes.len() == before {
                stable = true;
                break;
            }
        }
        Ok(FormulaSpace { models: distinct, offsets, total, classes: b.classes, max_rank, stable })
    }

    pub fn classes(&self) -> &[FormulaClass] {
        &self.classes
    }

    pub fn max_rank(&self) -> usize {
        self.max_rank
    }

    /// True when the enumeration reached a fixpoint before `max_rank`, in which
    /// case the classes cover every formula of any rank.
    pub fn is_stable(&self) -> bool {
        self.stable
    }

    /// Number of worlds across the context.
    pub fn width(&self) -> usize {
        self.total
    }

    /// Position of a context model, matched by pointer or structure.
    pub fn slot(&self, m: &KripkeModel) -> Option<usize> {
        self.models.iter().position(|d| std::ptr::eq(&**d, m) || **d == *m)
    }

    pub fn global(&self, slot: usize, world: usize) -> usize {
        self.offsets[slot] + world
    }

    pub fn global_of(&self, pm: &PointedModel) -> usize {
        let slot = self.slot(&pm.model).expect("pointed model belongs to the context");
        self.global(slot, pm.point())
    }

    /// The classes true at a context world, as a set of class indices.
    pub fn theory_bits(&self, global: usize) -> Bits {
        Bits::from_indices(self.classes.len(), (0..self.classes.len()).filter(|&c| self.classes[c].truth.contains(global)))
    }
}

/// One representative for every truth vector over the context points of
/// formulas in `BIL(sig)` of rank at most `max_rank`.
pub fn enumerate_formulas(sig: &Signature, max_rank: usize, context: &[PointedModel]) -> Result<Vec<Formula>, EnumError> {
    enumerate_formulas_with(sig, max_rank, context, EnumConfig::default())
}

pub fn enumerate_formulas_with(
    sig: &Signature,
    max_rank: usize,
    context: &[PointedModel],
    cfg: EnumConfig,
) -> Result<Vec<Formula>, EnumError> {
    let models: Vec<_> = context.iter().map(|pm| pm.model.clone()).collect();
    let space = FormulaSpace::build_with(sig, max_rank, &models, cfg)?;
    let points: Vec<usize> = context.iter().map(|pm| space.global_of(pm)).collect();
    let mut best: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut order = Vec::new();
    for (i, c) in space.classes().iter().enumerate() {
        let key: Vec<bool> = points.iter().map(|&g| c.truth.contains(g)).collect();
        match best.get_mut(&key) {
            Some(j) => {
                let cur = &space.classes()[*j];
                if (c.rank, c.size) < (cur.rank, cur.size) {
                    *j = i;
                }
            }
            None => {
                best.insert(key.clone(), i);
                order.push(key);
            }
        }
    }
    Ok(order.iter().map(|k| space.classes()[best[k]].formula.clone()).collect())
}
