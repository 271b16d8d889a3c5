//! Syntactic unification with occurs check.

use std::collections::BTreeMap;

use super::term::{Literal, Term};

/// Variable bindings. Substitutions returned by [`mgu`] are idempotent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<u32, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, var: u32) -> Option<&Term> {
        self.bindings.get(&var)
    }

    pub fn bind(&mut self, var: u32, term: Term) {
        self.bindings.insert(var, term);
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Term)> {
        self.bindings.iter().map(|(v, t)| (*v, t))
    }

    /// Applies bindings until no bound variable remains (works on triangular forms too).
    pub fn apply(&self, term: &Term) -> Term {
        match term {
            Term::Var(v) => match self.bindings.get(v) {
                Some(t) => self.apply(t),
                None => term.clone(),
            },
            Term::App(s, args) => Term::App(*s, args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    pub fn apply_literal(&self, lit: &Literal) -> Literal {
        Literal { positive: lit.positive, pred: lit.pred, args: lit.args.iter().map(|a| self.apply(a)).collect() }
    }

    pub fn apply_literals(&self, lits: &[Literal]) -> Vec<Literal> {
        lits.iter().map(|l| self.apply_literal(l)).collect()
    }

    fn walk<'a>(&'a self, mut term: &'a Term) -> &'a Term {
        while let Term::Var(v) = term {
            match self.bindings.get(v) {
                Some(t) => term = t,
                None => break,
            }
        }
        term
    }

    fn occurs(&self, var: u32, term: &Term) -> bool {
        match self.walk(term) {
            Term::Var(v) => *v == var,
            Term::App(_, args) => args.iter().any(|a| self.occurs(var, a)),
        }
    }

    fn resolved(self) -> Substitution {
        let bindings = self.bindings.keys().map(|&v| (v, self.apply(&Term::Var(v)))).collect();
        Substitution { bindings }
    }
}

/// Extends `subst` so that `a` and `b` become equal. On failure `subst` may be partially
/// extended; callers clone beforehand if they need to backtrack.
pub fn unify_terms(a: &Term, b: &Term, subst: &mut Substitution) -> bool {
    let mut stack = vec![(a.clone(), b.clone())];
    while let Some((x, y)) = stack.pop() {
        let x = subst.walk(&x).clone();
        let y = subst.walk(&y).clone();
        match (x, y) {
            (Term::Var(u), Term::Var(v)) if u == v => {}
            (Term::Var(u), t) | (t, Term::Var(u)) => {
                if subst.occurs(u, &t) {
                    return false;
                }
                subst.bind(u, t);
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return false;
                }
                stack.extend(xs.into_iter().zip(ys));
            }
        }
    }
    true
}

/// Most general unifier of the atoms of `a` and `b`; polarity is ignored.
pub fn mgu(a: &Literal, b: &Literal) -> Option<Substitution> {
    if a.pred != b.pred || a.args.len() != b.args.len() {
        return None;
    }
    let mut subst = Substitution::new();
    for (x, y) in a.args.iter().zip(&b.args) {
        if !unify_terms(x, y, &mut subst) {
            return None;
        }
    }
    Some(subst.resolved())
}

/// One-way matching: extends `subst` so that `pattern`σ = `target`. Variables of
/// `target` are treated as constants.
pub fn match_term(pattern: &Term, target: &Term, subst: &mut Substitution) -> bool {
    match pattern {
        Term::Var(v) => match subst.get(*v) {
            Some(bound) => bound == target,
            None => {
                subst.bind(*v, target.clone());
                true
            }
        },
        Term::App(f, xs) => match target {
            Term::App(g, ys) if f == g && xs.len() == ys.len() => {
                xs.iter().zip(ys).all(|(x, y)| match_term(x, y, subst))
            }
            _ => false,
        },
    }
}

pub fn match_literal(pattern: &Literal, target: &Literal, subst: &mut Substitution) -> bool {
    pattern.positive == target.positive
        && pattern.pred == target.pred
        && pattern.args.len() == target.args.len()
        && pattern.args.iter().zip(&target.args).all(|(x, y)| match_term(x, y, subst))
}
