use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use crate::derivation::NodeId;

/// Interned predicate or function symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub u32);

#[derive(Debug, Default)]
struct SigInner {
    names: Vec<String>,
    arities: Vec<usize>,
    index: HashMap<String, Sym>,
}

/// Symbol table shared by everything that handles one problem.
///
/// Lookups take a read lock; only first-time interning takes the write lock.
#[derive(Debug, Default)]
pub struct Signature {
    inner: RwLock<SigInner>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArityMismatch {
    pub symbol: String,
    pub expected: usize,
    pub found: usize,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `name` with the given arity, failing if it was seen with another arity.
    pub fn intern(&self, name: &str, arity: usize) -> Result<Sym, ArityMismatch> {
        {
            let inner = self.inner.read().expect("signature lock poisoned");
            if let Some(&sym) = inner.index.get(name) {
                return check_arity(&inner, sym, arity);
            }
        }
        let mut inner = self.inner.write().expect("signature lock poisoned");
        if let Some(&sym) = inner.index.get(name) {
            return check_arity(&inner, sym, arity);
        }
        let sym = Sym(inner.names.len() as u32);
        inner.names.push(name.to_string());
        inner.arities.push(arity);
        inner.index.insert(name.to_string(), sym);
        Ok(sym)
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.inner.read().expect("signature lock poisoned").index.get(name).copied()
    }

    pub fn name(&self, sym: Sym) -> String {
        self.inner.read().expect("signature lock poisoned").names[sym.0 as usize].clone()
    }

    pub fn arity(&self, sym: Sym) -> usize {
        self.inner.read().expect("signature lock poisoned").arities[sym.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("signature lock poisoned").names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_arity(inner: &SigInner, sym: Sym, arity: usize) -> Result<Sym, ArityMismatch> {
    let expected = inner.arities[sym.0 as usize];
    if expected == arity {
        Ok(sym)
    } else {
        Err(ArityMismatch { symbol: inner.names[sym.0 as usize].clone(), expected, found: arity })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(u32),
    /// Function application; constants have no arguments.
    App(Sym, Vec<Term>),
}

impl Term {
    pub fn constant(sym: Sym) -> Self {
        Term::App(sym, Vec::new())
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> u32 {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<u32>(),
        }
    }

    pub fn occurs(&self, var: u32) -> bool {
        match self {
            Term::Var(v) => *v == var,
            Term::App(_, args) => args.iter().any(|a| a.occurs(var)),
        }
    }

    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(v) => Some(*v),
            Term::App(_, args) => args.iter().filter_map(Term::max_var).max(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.max_var().is_none()
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(u32) -> u32) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(*v)),
            Term::App(s, args) => Term::App(*s, args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        TermDisplay { term: self, sig }
    }
}

struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => write!(f, "X{v}"),
            Term::App(s, args) => {
                write!(f, "{}", self.sig.name(*s))?;
                write_args(f, args, self.sig)
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term], sig: &Signature) -> fmt::Result {
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{}", a.display(sig))?;
    }
    f.write_str(")")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(positive: bool, pred: Sym, args: Vec<Term>) -> Self {
        Self { positive, pred, args }
    }

    pub fn weight(&self) -> u32 {
        1 + self.args.iter().map(Term::size).sum::<u32>()
    }

    pub fn negated(&self) -> Self {
        Self { positive: !self.positive, ..self.clone() }
    }

    pub fn max_var(&self) -> Option<u32> {
        self.args.iter().filter_map(Term::max_var).max()
    }

    /// True when `other` is the same atom with opposite sign.
    pub fn is_complement_of(&self, other: &Literal) -> bool {
        self.positive != other.positive && self.pred == other.pred && self.args == other.args
    }

    pub(crate) fn map_vars(&self, f: &mut impl FnMut(u32) -> u32) -> Literal {
        Literal { positive: self.positive, pred: self.pred, args: self.args.iter().map(|a| a.map_vars(f)).collect() }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        LiteralDisplay { lit: self, sig }
    }
}

struct LiteralDisplay<'a> {
    lit: &'a Literal,
    sig: &'a Signature,
}

impl fmt::Display for LiteralDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.lit.positive {
            f.write_str("~")?;
        }
        write!(f, "{}", self.sig.name(self.lit.pred))?;
        write_args(f, &self.lit.args, self.sig)
    }
}

/// A clause together with its bookkeeping inside one prover run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub literals: Vec<Literal>,
    pub age: u64,
    pub weight: u32,
    pub node: NodeId,
}

impl Clause {
    pub fn new(literals: Vec<Literal>, age: u64, node: NodeId) -> Self {
        let weight = clause_weight(&literals);
        Self { literals, age, weight, node }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn max_var(&self) -> Option<u32> {
        literals_max_var(&self.literals)
    }

    pub fn is_tautology(&self) -> bool {
        is_tautology(&self.literals)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        LiteralsDisplay { lits: &self.literals, sig }
    }
}

/// Count of all predicate, function and variable occurrences.
pub fn clause_weight(literals: &[Literal]) -> u32 {
    literals.iter().map(Literal::weight).sum()
}

pub fn literals_max_var(literals: &[Literal]) -> Option<u32> {
    literals.iter().filter_map(Literal::max_var).max()
}

pub fn is_tautology(literals: &[Literal]) -> bool {
    literals.iter().enumerate().any(|(i, l)| literals[i + 1..].iter().any(|m| l.is_complement_of(m)))
}

/// Renames variables to `0..k` in order of first occurrence.
pub fn normalize_vars(literals: &[Literal]) -> Vec<Literal> {
    let mut map: HashMap<u32, u32> = HashMap::new();
    let mut rename = |v: u32| {
        let next = map.len() as u32;
        *map.entry(v).or_insert(next)
    };
    literals.iter().map(|l| l.map_vars(&mut rename)).collect()
}

/// Shifts every variable by `offset`; used to rename clauses apart.
pub fn shift_vars(literals: &[Literal], offset: u32) -> Vec<Literal> {
    literals.iter().map(|l| l.map_vars(&mut |v| v + offset)).collect()
}

pub fn display_literals<'a>(lits: &'a [Literal], sig: &'a Signature) -> impl fmt::Display + 'a {
    LiteralsDisplay { lits, sig }
}

struct LiteralsDisplay<'a> {
    lits: &'a [Literal],
    sig: &'a Signature,
}

impl fmt::Display for LiteralsDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return f.write_str("$false");
        }
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{}", l.display(self.sig))?;
        }
        Ok(())
    }
}
