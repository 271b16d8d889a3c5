//! Binary resolution and factoring on literal lists.

use crate::logic::{literals_max_var, mgu, normalize_vars, shift_vars, Literal, Substitution};

/// Applies `subst`, drops repeated literals and renames variables canonically.
fn conclude(subst: &Substitution, lits: impl IntoIterator<Item = Literal>) -> Vec<Literal> {
    let mut out: Vec<Literal> = Vec::new();
    for l in lits {
        let l = subst.apply_literal(&l);
        if !out.contains(&l) {
            out.push(l);
        }
    }
    normalize_vars(&out)
}

/// All binary resolvents of `c` (first premise) and `d`. `d` is renamed apart from
/// `c` internally, so both may share variable names or even be the same clause.
pub fn resolve(c: &[Literal], d: &[Literal]) -> Vec<Vec<Literal>> {
    let offset = literals_max_var(c).map_or(0, |m| m + 1);
    let d = shift_vars(d, offset);
    let mut out = Vec::new();
    for (i, l) in c.iter().enumerate() {
        for (j, k) in d.iter().enumerate() {
            if l.positive == k.positive || l.pred != k.pred {
                continue;
            }
            if let Some(s) = mgu(l, k) {
                let rest = c
                    .iter()
                    .enumerate()
                    .filter(|&(x, _)| x != i)
                    .chain(d.iter().enumerate().filter(|&(y, _)| y != j))
                    .map(|(_, lit)| lit.clone());
                out.push(conclude(&s, rest));
            }
        }
    }
    out
}

/// All factors of `c`: for each unifiable pair of same-sign literals, the instance
/// with the pair merged.
pub fn factor(c: &[Literal]) -> Vec<Vec<Literal>> {
    let mut out = Vec::new();
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if c[i].positive != c[j].positive || c[i].pred != c[j].pred {
                continue;
            }
            if let Some(s) = mgu(&c[i], &c[j]) {
                let rest = c.iter().enumerate().filter(|&(x, _)| x != j).map(|(_, l)| l.clone());
                out.push(conclude(&s, rest));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{is_variant, parse_problem, Signature};

    fn lits(sig: &Signature, text: &str) -> Vec<Literal> {
        parse_problem(&format!("cnf(c, axiom, {text})."), sig).unwrap().remove(0).literals
    }

    #[test]
    fn resolution_examples() {
        let sig = Signature::new();
        let r = resolve(&lits(&sig, "p(X) | q(X)"), &lits(&sig, "~p(a)"));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0], lits(&sig, "q(a)"));
        let r = resolve(&lits(&sig, "p(X)"), &lits(&sig, "~p(Y)"));
        assert_eq!(r, vec![Vec::<Literal>::new()]);
        let r = resolve(&lits(&sig, "p(X) | ~q(X)"), &lits(&sig, "q(a) | r(b)"));
        assert_eq!(r, vec![lits(&sig, "p(a) | r(b)")]);
    }

    #[test]
    fn resolution_renames_apart() {
        let sig = Signature::new();
        // Without renaming, X would have to be both a and b.
        let r = resolve(&lits(&sig, "p(X, a)"), &lits(&sig, "~p(b, X)"));
        assert_eq!(r, vec![Vec::<Literal>::new()]);
    }

    #[test]
    fn factoring_examples() {
        let sig = Signature::new();
        assert_eq!(factor(&lits(&sig, "p(X) | p(a)")), vec![lits(&sig, "p(a)")]);
        assert!(factor(&lits(&sig, "p(a) | q(a)")).is_empty());
        let f = factor(&lits(&sig, "p(X) | p(Y)"));
        assert_eq!(f.len(), 1);
        assert!(is_variant(&f[0], &lits(&sig, "p(Z)")));
    }

    #[test]
    fn duplicate_literals_are_merged() {
        let sig = Signature::new();
        let r = resolve(&lits(&sig, "q(a) | p(X)"), &lits(&sig, "~p(a) | q(a)"));
        assert_eq!(r, vec![lits(&sig, "q(a)")]);
    }
}
