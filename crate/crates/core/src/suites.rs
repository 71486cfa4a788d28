//! Seeded property suites behind `verify`.
//!
//! Each suite is a list of independent cases. Cases run in parallel and are
//! reported sorted by id as `CASE <id> PASS|FAIL <detail>` lines followed by
//! a `TOTAL` line.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::biasim::{canonical_relation, check_biasim, greatest_biasim, refine, separating_formula};
use crate::fol::{eval_fo, translate, Env};
use crate::formula::{Formula, Signature};
use crate::kripke::{KripkeModel, PointedModel};
use crate::random::{random_formula, random_model_from, rng};
use crate::semantics::{satisfies_at, satisfies_pointed, theory_included, type_verdicts, TypeQuery};
use crate::unravel::{
    b_theory_check_with, bracket, schemas, theory_check_on, unravel, verify_schema, zigzag_factor, Guard, SchemaKind,
    ZigzagPath,
};

pub const SUITES: [&str; 8] =
    ["preservation", "monotonicity", "hennessy-milner", "unravel-structure", "schemas", "types", "fol-equiv", "canonical"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseResult {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SuiteReport {
    pub cases: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.pass).count()
    }

    pub fn is_ok(&self) -> bool {
        self.failures() == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.cases {
            writeln!(f, "CASE {} {} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.detail)?;
        }
        write!(f, "TOTAL {} cases, {} passed, {} failed", self.cases.len(), self.cases.len() - self.failures(), self.failures())
    }
}

/// Runs one suite, or every suite for `all`. `None` for unknown names.
pub fn run_suite(name: &str, seed: u64) -> Option<SuiteReport> {
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![SUITES.into_iter().find(|s| *s == name)?] };
    let mut cases: Vec<CaseResult> = names.into_iter().flat_map(|s| run_one(s, seed)).collect();
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    Some(SuiteReport { cases })
}

fn run_one(name: &str, seed: u64) -> Vec<CaseResult> {
    let (count, case): (usize, fn(&mut ChaCha8Rng) -> Result<String, String>) = match name {
        "preservation" => (50, preservation),
        "monotonicity" => (100, monotonicity),
        "hennessy-milner" => (200, hennessy_milner),
        "unravel-structure" => (50, unravel_structure),
        "schemas" => (30, schema_case),
        "types" => (200, types),
        "fol-equiv" => (300, fol_equiv),
        "canonical" => (100, canonical),
        _ => unreachable!("names come from SUITES"),
    };
    let tag = name.bytes().fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag.rotate_left(32) ^ i as u64);
            let (pass, detail) = match case(&mut r) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CaseResult { id: format!("{name}/{i:04}"), pass, detail }
        })
        .collect()
}

fn sig() -> Signature {
    Signature::from_names(["p", "q"]).expect("valid letters")
}

fn model(r: &mut ChaCha8Rng, max_worlds: usize) -> Arc<KripkeModel> {
    let n = r.gen_range(1..=max_worlds);
    let d = r.gen_range(0.2..0.8);
    Arc::new(random_model_from(r, n, &sig(), d))
}

fn pointed(r: &mut ChaCha8Rng, max_worlds: usize) -> PointedModel {
    let m = model(r, max_worlds);
    let w = r.gen_range(0..m.len());
    PointedModel::at_index(m, w)
}

fn check(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl fmt::Display) -> String {
    format!("error: {e}")
}

/// A pair with a bi-asimulation: a random hit, or else a point and one of
/// its successors, which always qualifies.
fn related_pair(r: &mut ChaCha8Rng) -> (PointedModel, PointedModel) {
    for _ in 0..40 {
        let (a, b) = (pointed(r, 4), pointed(r, 4));
        if matches!(greatest_biasim(&a, &b), Ok(Some(_))) {
            return (a, b);
        }
    }
    let a = pointed(r, 4);
    let ups: Vec<usize> = a.model.up(a.point()).iter().collect();
    let v = ups[r.gen_range(0..ups.len())];
    let b = PointedModel::at_index(a.model.clone(), v);
    (a, b)
}

fn preservation(r: &mut ChaCha8Rng) -> Result<String, String> {
    let (a, b) = related_pair(r);
    let rel = greatest_biasim(&a, &b).map_err(err)?.ok_or("no bi-asimulation")?;
    if !check_biasim(&rel, &a, &b).map_err(err)?.is_ok() {
        return Err("surviving relation fails the conditions".into());
    }
    for _ in 0..500 {
        let f = random_formula(r, &sig(), 4);
        if satisfies_pointed(&a, &f).map_err(err)? && !satisfies_pointed(&b, &f).map_err(err)? {
            return Err(format!("{f} is lost"));
        }
    }
    Ok("500 formulas preserved".into())
}

fn monotonicity(r: &mut ChaCha8Rng) -> Result<String, String> {
    let m = model(r, 5);
    for _ in 0..10 {
        let w = r.gen_range(0..m.len());
        let ups: Vec<usize> = m.up(w).iter().collect();
        let v = ups[r.gen_range(0..ups.len())];
        let f = random_formula(r, &sig(), 4);
        if satisfies_at(&m, w, &f).map_err(err)? && !satisfies_at(&m, v, &f).map_err(err)? {
            return Err(format!("{f} holds at {} but not at {}", m.world(w), m.world(v)));
        }
    }
    Ok("10 triples".into())
}

fn hennessy_milner(r: &mut ChaCha8Rng) -> Result<String, String> {
    let n1 = r.gen_range(1..=5);
    let n2 = r.gen_range(1..=5);
    let d = r.gen_range(0.2..0.8);
    let m1 = Arc::new(random_model_from(r, n1, &sig(), d));
    let m2 = Arc::new(random_model_from(r, n2, &sig(), d));
    let a = PointedModel::at_index(m1, r.gen_range(0..n1));
    let b = PointedModel::at_index(m2, r.gen_range(0..n2));
    let rank = 6.min(2 * n1 * n2);
    let present = greatest_biasim(&a, &b).map_err(err)?.is_some();
    let included = theory_included(&a, &b, &sig(), rank).map_err(err)?.included;
    if present != included {
        return Err(format!("bi-asimulation {present}, rank-{rank} inclusion {included}"));
    }
    if present {
        return Ok("related".into());
    }
    let f = separating_formula(&a, &b).map_err(err)?.ok_or("no separating formula")?;
    let ok = satisfies_pointed(&a, &f).map_err(err)? && !satisfies_pointed(&b, &f).map_err(err)?;
    check(ok, format!("separated by {f}"))
}

fn unravel_structure(r: &mut ChaCha8Rng) -> Result<String, String> {
    let m = model(r, 4);
    let w = m.world(r.gen_range(0..m.len())).to_string();
    let u = unravel(&m, &w, 4).map_err(err)?;
    if !u.model().validate().is_valid() {
        return Err("unravelling is not a partial order".into());
    }
    for a in 0..u.len() {
        for b in (0..u.len()).filter(|&b| u.leq(a, b)) {
            let f = zigzag_factor(&u, a, b).map_err(err)?;
            let (ra, rb) = f.reassemble(&u);
            if ra != u.nodes()[a].chain() || rb != u.nodes()[b].chain() {
                return Err(format!("factorization of {} ≤ {} does not reassemble", u.node_id(a), u.node_id(b)));
            }
        }
    }
    let loose = theory_check_on(&u, 3, Guard::Length).map_err(err)?;
    let tight = b_theory_check_with(&m, &w, 4, 3, Guard::Height).map_err(err)?;
    let detail = format!("{} nodes, height {}, height guard {}", u.len(), m.height(), if tight.is_ok() { "clean" } else { "MISMATCH" });
    match loose.mismatches.first() {
        None if loose.is_ok() => Ok(detail),
        None => Err(format!("{detail}; nodes with equal ends disagree")),
        Some(x) => Err(format!("{detail}; length guard: node {} vs {} on {}", x.node, x.world, x.formula)),
    }
}

fn schema_case(r: &mut ChaCha8Rng) -> Result<String, String> {
    let m = model(r, 4);
    let bm = bracket(&m).map_err(err)?;
    let pairs: Vec<(Formula, Formula)> = (0..20).map(|_| (random_formula(r, &sig(), 2), random_formula(r, &sig(), 2))).collect();
    let mut cells = 0;
    for path in ZigzagPath::all(&m, 4) {
        for k in 1..=path.len() {
            let set = schemas(&path, k).map_err(err)?;
            for (a, b) in &pairs {
                let expected = a.rank().max(b.rank()) + 1 + path.len() - k;
                if SchemaKind::ALL.iter().any(|&kind| set.instantiate(kind, a, b).rank() != expected) {
                    return Err(format!("rank off for {:?} k={k}", path.ids()));
                }
                if !verify_schema(&bm, &path, k, a, b).map_err(err)? {
                    return Err(format!("{:?} k={k} α={a} β={b}", path.ids()));
                }
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells"))
}

fn types(r: &mut ChaCha8Rng) -> Result<String, String> {
    let pm = pointed(r, 4);
    let mut out = Vec::new();
    for successor in [true, false] {
        let pick = |r: &mut ChaCha8Rng| (0..r.gen_range(0..=3)).map(|_| random_formula(r, &sig(), 2)).collect::<Vec<_>>();
        let (g, d) = (pick(r), pick(r));
        let q = if successor { TypeQuery::successor(g, d) } else { TypeQuery::predecessor(g, d) };
        let v = type_verdicts(&pm, &q).map_err(err)?;
        if !v.agree() {
            return Err(format!("{v:?} for {:?}", q.characteristic_formula()));
        }
        out.push(if v.witness { "type" } else { "not a type" });
    }
    Ok(out.join(", "))
}

fn fol_equiv(r: &mut ChaCha8Rng) -> Result<String, String> {
    let m = model(r, 5);
    let f = random_formula(r, &sig(), 4);
    let t = translate(&f, "x");
    for w in 0..m.len() {
        let env = Env::from([("x".to_string(), w)]);
        if eval_fo(&m, &t, &env).map_err(err)? != satisfies_at(&m, w, &f).map_err(err)? {
            return Err(format!("{f} at {}", m.world(w)));
        }
    }
    Ok(format!("rank {}", f.rank()))
}

fn canonical(r: &mut ChaCha8Rng) -> Result<String, String> {
    let (m1, m2) = (model(r, 4), model(r, 4));
    let rank = 2 * m1.len() * m2.len();
    let canon = canonical_relation(&m1, &m2, &sig(), rank).map_err(err)?;
    let fp = refine(&m1, &m2).map_err(err)?;
    check(canon == fp.relation, format!("{} pairs at rank {rank}", canon.len()))
}
