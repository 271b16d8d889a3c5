use std::collections::HashMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Name of the init vector used for origin labels absent from the model vocabulary.
pub const UNKNOWN_ORIGIN: &str = "unknown_origin";
/// LayerNorm stabilizer.
pub const DEFAULT_LN_EPS: f64 = 1e-5;

/// A deriv block is keyed by rule name and arity (1 or 2; wider rules are bracketed).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleSig {
    pub name: String,
    pub arity: usize,
}

impl RuleSig {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self { name: name.into(), arity }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleRanges {
    pub arity: usize,
    pub w1: Range<usize>,
    pub b1: Range<usize>,
    pub w2: Range<usize>,
    pub b2: Range<usize>,
    pub gamma: Range<usize>,
    pub beta: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalRanges {
    pub w1: Range<usize>,
    pub b: Range<usize>,
    pub w2: Range<usize>,
    pub c: usize,
}

/// Offsets of every parameter block inside the flat parameter vector.
///
/// Order: init vectors (vocabulary order, then the unknown-origin vector), deriv
/// blocks in rule order, then the eval head.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub dim: usize,
    pub init_count: usize,
    pub rules: Vec<RuleRanges>,
    pub eval: EvalRanges,
    pub total: usize,
}

fn take(cursor: &mut usize, len: usize) -> Range<usize> {
    let r = *cursor..*cursor + len;
    *cursor += len;
    r
}

impl Layout {
    pub fn new(dim: usize, origin_count: usize, rule_arities: impl IntoIterator<Item = usize>) -> Self {
        let n = dim;
        let init_count = origin_count + 1;
        let mut cursor = init_count * n;
        let rules = rule_arities
            .into_iter()
            .map(|k| RuleRanges {
                arity: k,
                w1: take(&mut cursor, 2 * n * k * n),
                b1: take(&mut cursor, 2 * n),
                w2: take(&mut cursor, n * 2 * n),
                b2: take(&mut cursor, n),
                gamma: take(&mut cursor, n),
                beta: take(&mut cursor, n),
            })
            .collect();
        let eval = EvalRanges {
            w1: take(&mut cursor, n * n),
            b: take(&mut cursor, n),
            w2: take(&mut cursor, n),
            c: take(&mut cursor, 1).start,
        };
        Self { dim, init_count, rules, eval, total: cursor }
    }

    pub fn init(&self, idx: usize) -> Range<usize> {
        idx * self.dim..(idx + 1) * self.dim
    }

    /// Named blocks in storage order; the model file header lists these.
    pub fn blocks(&self, origins: &[String], rules: &[RuleSig]) -> Vec<(String, usize)> {
        let mut out = Vec::new();
        for o in origins.iter().map(String::as_str).chain([UNKNOWN_ORIGIN]) {
            out.push((format!("init/{o}"), self.dim));
        }
        for (sig, r) in rules.iter().zip(&self.rules) {
            let p = format!("deriv/{}/{}", sig.name, sig.arity);
            out.push((format!("{p}/w1"), r.w1.len()));
            out.push((format!("{p}/b1"), r.b1.len()));
            out.push((format!("{p}/w2"), r.w2.len()));
            out.push((format!("{p}/b2"), r.b2.len()));
            out.push((format!("{p}/gamma"), r.gamma.len()));
            out.push((format!("{p}/beta"), r.beta.len()));
        }
        out.push(("eval/w1".into(), self.eval.w1.len()));
        out.push(("eval/b".into(), self.eval.b.len()));
        out.push(("eval/w2".into(), self.eval.w2.len()));
        out.push(("eval/c".into(), 1));
        out
    }
}

/// Every trainable value of the network, stored flat in [`Layout`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub(crate) origins: Vec<String>,
    pub(crate) rules: Vec<RuleSig>,
    pub(crate) ln_eps: f64,
    pub(crate) threshold: f64,
    pub(crate) layout: Layout,
    pub(crate) data: Vec<f64>,
    origin_index: HashMap<String, usize>,
    rule_index: HashMap<(String, usize), usize>,
}

impl ModelParams {
    /// All-zero parameters except LayerNorm gains, which start at 1.
    pub fn zeros(dim: usize, origins: Vec<String>, mut rules: Vec<RuleSig>) -> Self {
        let mut origins_dedup: Vec<String> = Vec::new();
        for o in origins {
            if o != UNKNOWN_ORIGIN && !origins_dedup.contains(&o) {
                origins_dedup.push(o);
            }
        }
        rules.sort();
        rules.dedup();
        let layout = Layout::new(dim, origins_dedup.len(), rules.iter().map(|r| r.arity));
        let mut data = vec![0.0; layout.total];
        for r in &layout.rules {
            data[r.gamma.clone()].fill(1.0);
        }
        Self::from_parts(origins_dedup, rules, DEFAULT_LN_EPS, 0.0, layout, data)
    }

    /// Seeded initialization: init vectors uniform in ±1/√n, weight matrices and biases
    /// uniform in ±1/√fan_in, LayerNorm gain 1 and bias 0.
    pub fn init(dim: usize, origins: Vec<String>, rules: Vec<RuleSig>, seed: u64) -> Self {
        let mut p = Self::zeros(dim, origins, rules);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = dim as f64;
        let mut fill = |data: &mut [f64], bound: f64| {
            for x in data {
                *x = rng.gen_range(-bound..bound);
            }
        };
        let layout = p.layout.clone();
        fill(&mut p.data[..layout.init_count * dim], 1.0 / n.sqrt());
        for r in &layout.rules {
            let fan1 = (r.arity * dim) as f64;
            fill(&mut p.data[r.w1.clone()], 1.0 / fan1.sqrt());
            fill(&mut p.data[r.b1.clone()], 1.0 / fan1.sqrt());
            let fan2 = (2 * dim) as f64;
            fill(&mut p.data[r.w2.clone()], 1.0 / fan2.sqrt());
            fill(&mut p.data[r.b2.clone()], 1.0 / fan2.sqrt());
        }
        let e = &layout.eval;
        fill(&mut p.data[e.w1.clone()], 1.0 / n.sqrt());
        fill(&mut p.data[e.b.clone()], 1.0 / n.sqrt());
        fill(&mut p.data[e.w2.clone()], 1.0 / n.sqrt());
        fill(&mut p.data[e.c..e.c + 1], 1.0 / n.sqrt());
        p
    }

    pub(crate) fn from_parts(
        origins: Vec<String>,
        rules: Vec<RuleSig>,
        ln_eps: f64,
        threshold: f64,
        layout: Layout,
        data: Vec<f64>,
    ) -> Self {
        let origin_index = origins.iter().enumerate().map(|(i, o)| (o.clone(), i)).collect();
        let rule_index = rules.iter().enumerate().map(|(i, r)| ((r.name.clone(), r.arity), i)).collect();
        Self { origins, rules, ln_eps, threshold, layout, data, origin_index, rule_index }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn ln_eps(&self) -> f64 {
        self.ln_eps
    }

    pub fn set_ln_eps(&mut self, eps: f64) {
        self.ln_eps = eps;
    }

    /// Classification threshold stored with the model.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn set_threshold(&mut self, t: f64) {
        self.threshold = t;
    }

    pub fn origins(&self) -> &[String] {
        &self.origins
    }

    pub fn rules(&self) -> &[RuleSig] {
        &self.rules
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Index of the init vector for `origin`, falling back to the unknown-origin vector.
    pub fn origin_slot(&self, origin: &str) -> usize {
        self.origin_index.get(origin).copied().unwrap_or(self.origins.len())
    }

    pub fn unknown_slot(&self) -> usize {
        self.origins.len()
    }

    pub fn rule_slot(&self, name: &str, arity: usize) -> Option<usize> {
        self.rule_index.get(&(name.to_string(), arity)).copied()
    }

    pub fn init_vector(&self, slot: usize) -> &[f64] {
        &self.data[self.layout.init(slot)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}
