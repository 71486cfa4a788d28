//! Seeded generators for models and formulas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::formula::{Formula, Signature};
use crate::kripke::{normalize, KripkeModel, ModelFile, Mode};

/// Probability that a letter is seeded true at a world before upward closure.
pub const LETTER_DENSITY: f64 = 0.3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// World ids `w0, w1, …`, zero padded so that id order equals index order.
pub fn world_names(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("w{i:0width$}")).collect()
}

/// A random model on `n_worlds` worlds, deterministic in all arguments.
///
/// Edges only go from lower to higher index, so the closure is always
/// antisymmetric. Valuations are sampled and then closed upward.
pub fn random_model(n_worlds: usize, sig: &Signature, density: f64, seed: u64) -> KripkeModel {
    random_model_from(&mut rng(seed), n_worlds, sig, density)
}

pub fn random_model_from<R: Rng>(rng: &mut R, n_worlds: usize, sig: &Signature, density: f64) -> KripkeModel {
    assert!(n_worlds >= 1, "a model needs at least one world");
    let names = world_names(n_worlds);
    let mut order = Vec::new();
    for i in 0..n_worlds {
        for j in i + 1..n_worlds {
            if rng.gen_bool(density.clamp(0.0, 1.0)) {
                order.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    let valuation = sig
        .iter()
        .map(|l| {
            let ws = names.iter().filter(|_| rng.gen_bool(LETTER_DENSITY)).cloned().collect();
            (l.to_string(), ws)
        })
        .collect();
    let file = ModelFile {
        signature: sig.iter().map(|l| l.to_string()).collect(),
        worlds: names,
        order,
        valuation,
        point: None,
    };
    normalize(&file, Mode::Close).expect("index-ordered edges are antisymmetric")
}

/// A random formula over `sig` with rank at most `max_rank`.
pub fn random_formula<R: Rng>(rng: &mut R, sig: &Signature, max_rank: usize) -> Formula {
    gen(rng, sig, max_rank, 10)
}

fn gen<R: Rng>(rng: &mut R, sig: &Signature, rank: usize, size: usize) -> Formula {
    let leaf = size <= 1 || rng.gen_bool(0.25);
    if leaf {
        let k = rng.gen_range(0..=sig.len() * 3);
        return match sig.iter().nth(k % (sig.len() + 1)) {
            Some(l) if k < sig.len() * 3 => Formula::Atom(l.clone()),
            _ => Formula::Bottom,
        };
    }
    let left = (size - 1) / 2;
    let right = size - 1 - left;
    let modal = rank > 0 && rng.gen_bool(0.6);
    if modal {
        let a = gen(rng, sig, rank - 1, left);
        let b = gen(rng, sig, rank - 1, right);
        if rng.gen_bool(0.5) {
            Formula::implies(a, b)
        } else {
            Formula::coimplies(a, b)
        }
    } else {
        let a = gen(rng, sig, rank, left);
        let b = gen(rng, sig, rank, right);
        if rng.gen_bool(0.5) {
            Formula::and(a, b)
        } else {
            Formula::or(a, b)
        }
    }
}

/// A random subset of `0..n`.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, p: f64) -> Bits {
    Bits::from_indices(n, (0..n).filter(|_| rng.gen_bool(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_fixed_seed() {
        let sig = Signature::from_names(["p", "q"]).unwrap();
        assert_eq!(random_model(5, &sig, 0.4, 11), random_model(5, &sig, 0.4, 11));
    }

    #[test]
    fn single_world_is_a_point() {
        let m = random_model(1, &Signature::new(), 0.9, 3);
        assert_eq!(m.len(), 1);
        assert!(m.leq(0, 0));
    }

    #[test]
    fn names_sort_like_indices() {
        let names = world_names(12);
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn formulas_respect_rank_bound() {
        let sig = Signature::from_names(["p", "q"]).unwrap();
        let mut r = rng(5);
        for _ in 0..500 {
            let f = random_formula(&mut r, &sig, 3);
            assert!(f.rank() <= 3);
            assert!(f.letters().is_subset(&sig));
        }
    }
}
