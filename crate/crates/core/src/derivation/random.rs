//! Random derivation DAGs for tests, benchmarks and examples.

use rand::Rng;

use super::{DerivationStore, Label, NodeId, FACTORING, RESOLUTION};

/// Shape of a random derivation.
#[derive(Clone, Debug)]
pub struct RandomDag {
    pub size: usize,
    /// Leaves have depth 0; no node is deeper than this.
    pub max_depth: usize,
    pub leaves: usize,
    pub origins: Vec<String>,
    /// Also emit a ternary `Superposition3` rule.
    pub wide_rules: bool,
    pub p_selected: f64,
    /// Probability that a selected node is also in the proof.
    pub p_proof: f64,
}

impl Default for RandomDag {
    fn default() -> Self {
        Self {
            size: 30,
            max_depth: 6,
            leaves: 4,
            origins: vec!["input".into(), "thax_a".into(), "thax_b".into()],
            wide_rules: false,
            p_selected: 0.5,
            p_proof: 0.4,
        }
    }
}

/// Premises are drawn uniformly from earlier nodes, so sub-DAGs are shared freely.
/// Every generated derivation has at least one positive and one negative node when
/// `size > leaves + 1`.
pub fn random_derivation<R: Rng>(rng: &mut R, problem: &str, cfg: &RandomDag) -> DerivationStore {
    let mut s = DerivationStore::new(problem);
    for _ in 0..cfg.leaves.max(1) {
        let o = &cfg.origins[rng.gen_range(0..cfg.origins.len())];
        s.record(Label::origin(o), &[]).unwrap();
    }
    let mut depth = vec![0usize; s.len()];
    let mut attempts = 0;
    while s.len() < cfg.size && attempts < cfg.size * 50 {
        attempts += 1;
        let arity = match rng.gen_range(0..10) {
            0..=2 => 1,
            9 if cfg.wide_rules => 3,
            _ => 2,
        };
        let n = s.len() as u32;
        let premises: Vec<NodeId> = (0..arity).map(|_| NodeId(rng.gen_range(0..n))).collect();
        let d = 1 + premises.iter().map(|p| depth[p.index()]).max().unwrap();
        if d > cfg.max_depth {
            continue;
        }
        let label = match arity {
            1 => FACTORING,
            2 => RESOLUTION,
            _ => "Superposition3",
        };
        let id = s.record(Label::rule(label), &premises).unwrap();
        depth.push(d);
        if rng.gen_bool(cfg.p_selected) {
            s.set_selected(id, true);
            s.set_in_proof(id, rng.gen_bool(cfg.p_proof));
        }
    }
    let internal: Vec<NodeId> = s.nodes().iter().filter(|n| !n.is_leaf()).map(|n| n.id).collect();
    if internal.len() >= 2 {
        if s.positive_count() == 0 {
            let id = internal[0];
            s.set_selected(id, true);
            s.set_in_proof(id, true);
        }
        if s.negative_count() == 0 {
            let id = *internal.iter().rev().find(|id| !s.node(**id).is_positive()).unwrap_or(&internal[1]);
            s.set_selected(id, true);
            s.set_in_proof(id, false);
        }
    }
    s
}
