use std::collections::BTreeMap;

use super::KripkeModel;

/// Finds the lexicographically least isomorphism from `m` to `n`, if any.
///
/// Worlds of `m` are assigned in id order and candidates in `n` are tried in
/// id order, so the first complete assignment found is the least one.
pub fn isomorphism(m: &KripkeModel, n: &KripkeModel) -> Option<BTreeMap<String, String>> {
    if m.len() != n.len() || !m.signature().same_letters(n.signature()) {
        return None;
    }
    let letters: Vec<_> = m.signature().iter().cloned().collect();
    let profile = |k: &KripkeModel, i: usize| {
        let atoms: Vec<bool> = letters.iter().map(|l| k.holds_atom(l, i).unwrap_or(false)).collect();
        (k.up(i).count(), k.down(i).count(), atoms)
    };
    let m_prof: Vec<_> = (0..m.len()).map(|i| profile(m, i)).collect();
    let n_prof: Vec<_> = (0..n.len()).map(|i| profile(n, i)).collect();

    let mut assign: Vec<usize> = Vec::with_capacity(m.len());
    let mut used = vec![false; n.len()];
    if extend(m, n, &m_prof, &n_prof, &mut assign, &mut used) {
        Some(
            assign
                .iter()
                .enumerate()
                .map(|(i, &j)| (m.world(i).to_string(), n.world(j).to_string()))
                .collect(),
        )
    } else {
        None
    }
}

fn extend<P: PartialEq>(
    m: &KripkeModel,
    n: &KripkeModel,
    m_prof: &[P],
    n_prof: &[P],
    assign: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let i = assign.len();
    if i == m.len() {
        return true;
    }
    for j in 0..n.len() {
        if used[j] || m_prof[i] != n_prof[j] {
            continue;
        }
        let consistent = assign
            .iter()
            .enumerate()
            .all(|(k, &jk)| m.leq(i, k) == n.leq(j, jk) && m.leq(k, i) == n.leq(jk, j));
        if !consistent {
            continue;
        }
        assign.push(j);
        used[j] = true;
        if extend(m, n, m_prof, n_prof, assign, used) {
            return true;
        }
        assign.pop();
        used[j] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_least() {
        let m = KripkeModel::build(&["p"], &["a", "b", "c"], &[("a", "b"), ("a", "c")], &[]).unwrap();
        let g = isomorphism(&m, &m).unwrap();
        assert!(g.iter().all(|(k, v)| k == v));
    }

    #[test]
    fn relabelled_chain() {
        let m = KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap();
        let n = KripkeModel::build(&["p"], &["x", "y"], &[("x", "y")], &[("p", &["y"])]).unwrap();
        let g = isomorphism(&m, &n).unwrap();
        assert_eq!(g["a"], "x");
        assert_eq!(g["b"], "y");
    }

    #[test]
    fn chain_vs_fork() {
        let chain = KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap();
        let fork = KripkeModel::build(&["p"], &["r", "s", "t"], &[("r", "s"), ("r", "t")], &[]).unwrap();
        assert!(isomorphism(&chain, &fork).is_none());
    }

    #[test]
    fn valuation_matters() {
        let m = KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[("p", &["b"])]).unwrap();
        let n = KripkeModel::build(&["p"], &["a", "b"], &[("a", "b")], &[]).unwrap();
        assert!(isomorphism(&m, &n).is_none());
    }

    #[test]
    fn least_among_automorphisms() {
        // Two incomparable worlds with the same valuation: both maps work.
        let m = KripkeModel::build(&[], &["a", "b"], &[], &[]).unwrap();
        let n = KripkeModel::build(&[], &["x", "y"], &[], &[]).unwrap();
        let g = isomorphism(&m, &n).unwrap();
        assert_eq!(g["a"], "x");
    }
}
