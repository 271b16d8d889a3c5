//! A generated problem family: each problem is a chain of implications from a start
//! fact to a goal, posed alongside a shared library of distracting theory axioms.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    pub problems: usize,
    pub min_chain: usize,
    pub max_chain: usize,
    /// Constants of the distracting order theory.
    pub junk_constants: usize,
    /// Arity of the chain predicates.
    pub arity: usize,
    /// Chain arguments are `f(...f(a)...)` with a per-problem nesting depth up to this;
    /// heavier chains are harder for weight-based selection.
    pub max_term_depth: usize,
    /// Probability that a chain step needs an extra side fact.
    pub p_side: f64,
    pub seed: u64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            problems: 60,
            min_chain: 2,
            max_chain: 14,
            junk_constants: 6,
            arity: 1,
            max_term_depth: 2,
            p_side: 0.3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedProblem {
    pub name: String,
    pub chain: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    pub theory: String,
    /// Problems used for training (even indices).
    pub train: Vec<GeneratedProblem>,
    /// Held-out problems (odd indices).
    pub heldout: Vec<GeneratedProblem>,
}

/// The distracting library: a symmetric transitive relation over a few constants, a
/// congruence that keeps producing heavier variants, and a strict order.
pub fn theory_library(junk_constants: usize) -> String {
    let mut out = String::new();
    out += "cnf(sym, theory_axiom(thax_sym), ~e(X,Y) | e(Y,X)).\n";
    out += "cnf(trans, theory_axiom(thax_trans), ~e(X,Y) | ~e(Y,Z) | e(X,Z)).\n";
    out += "cnf(cong, theory_axiom(thax_cong), ~e(X,Y) | e(g(X),g(Y))).\n";
    out += "cnf(lt_trans, theory_axiom(thax_order), ~lt(X,Y) | ~lt(Y,Z) | lt(X,Z)).\n";
    for i in 0..junk_constants.saturating_sub(1) {
        let _ = writeln!(out, "cnf(e{i}, theory_axiom(thax_base), e(c{i},c{})).", i + 1);
        let _ = writeln!(out, "cnf(lt{i}, theory_axiom(thax_base), lt(c{i},c{})).", i + 1);
    }
    out
}

fn args(terms: &[String]) -> String {
    terms.join(",")
}

fn problem(rng: &mut ChaCha8Rng, chain: usize, cfg: &FamilyConfig) -> String {
    let depth = rng.gen_range(0..=cfg.max_term_depth);
    let terms: Vec<String> = (0..cfg.arity)
        .map(|k| {
            let c = format!("a{}", rng.gen_range(0..3) + 3 * k);
            (0..depth).fold(c, |t, _| format!("f({t})"))
        })
        .collect();
    let vars: Vec<String> = (0..cfg.arity).map(|k| format!("X{k}")).collect();
    let mut out = String::new();
    let _ = writeln!(out, "cnf(start, axiom, q0({})).", args(&terms));
    for i in 0..chain {
        if rng.gen_bool(cfg.p_side) {
            let _ = writeln!(out, "cnf(side{i}, axiom, r{i}({})).", args(&terms));
            let _ = writeln!(out, "cnf(step{i}, axiom, ~q{i}({v}) | ~r{i}({v}) | q{}({v})).", i + 1, v = args(&vars));
        } else {
            let _ = writeln!(out, "cnf(step{i}, axiom, ~q{i}({v}) | q{}({v})).", i + 1, v = args(&vars));
        }
    }
    let _ = writeln!(out, "cnf(goal, negated_conjecture, ~q{chain}({})).", args(&terms));
    out
}

pub fn generate_family(cfg: &FamilyConfig) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut train = Vec::new();
    let mut heldout = Vec::new();
    for i in 0..cfg.problems {
        let chain = rng.gen_range(cfg.min_chain..=cfg.max_chain.max(cfg.min_chain));
        let name = format!("fam{i:03}");
        let text = problem(&mut rng, chain, cfg);
        let p = GeneratedProblem { name, chain, text };
        if i % 2 == 0 {
            train.push(p);
        } else {
            heldout.push(p);
        }
    }
    Family { theory: theory_library(cfg.junk_constants), train, heldout }
}

impl Family {
    /// Writes `theory.p`, `train/<name>.p` and `heldout/<name>.p` under `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> io::Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir.join("train"))?;
        fs::create_dir_all(dir.join("heldout"))?;
        fs::write(dir.join("theory.p"), &self.theory)?;
        for (sub, ps) in [("train", &self.train), ("heldout", &self.heldout)] {
            for p in ps {
                fs::write(dir.join(sub).join(format!("{}.p", p.name)), &p.text)?;
            }
        }
        Ok(())
    }
}
