use super::term::{clause_weight, Literal};
use super::unify::{match_literal, Substitution};

/// True iff some θ makes `general`θ a sub-multiset of `specific`.
///
/// Each literal of `general` must be matched by a distinct literal of `specific`.
pub fn subsumes(general: &[Literal], specific: &[Literal]) -> bool {
    if general.len() > specific.len() || clause_weight(general) > clause_weight(specific) {
        return false;
    }
    // Every literal needs at least one candidate with the same sign and predicate.
    let candidates: Vec<Vec<usize>> = general
        .iter()
        .map(|g| {
            specific
                .iter()
                .enumerate()
                .filter(|(_, s)| s.positive == g.positive && s.pred == g.pred)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    if candidates.iter().any(Vec::is_empty) {
        return false;
    }
    // Most constrained literal first.
    let mut order: Vec<usize> = (0..general.len()).collect();
    order.sort_by_key(|&i| candidates[i].len());
    let mut used = vec![false; specific.len()];
    search(general, specific, &candidates, &order, 0, &mut used, &Substitution::new())
}

fn search(
    general: &[Literal],
    specific: &[Literal],
    candidates: &[Vec<usize>],
    order: &[usize],
    depth: usize,
    used: &mut [bool],
    subst: &Substitution,
) -> bool {
    let Some(&gi) = order.get(depth) else {
        return true;
    };
    for &si in &candidates[gi] {
        if used[si] {
            continue;
        }
        let mut extended = subst.clone();
        if match_literal(&general[gi], &specific[si], &mut extended) {
            used[si] = true;
            if search(general, specific, candidates, order, depth + 1, used, &extended) {
                return true;
            }
            used[si] = false;
        }
    }
    false
}

/// Mutual subsumption; for clauses without duplicate literals this is equality up to renaming.
pub fn is_variant(a: &[Literal], b: &[Literal]) -> bool {
    a.len() == b.len() && subsumes(a, b) && subsumes(b, a)
}
