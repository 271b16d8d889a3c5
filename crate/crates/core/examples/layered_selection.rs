//! Drives the passive set by hand with a fake classifier to show how the layered
//! scheme interleaves the base heuristic with the positive-only model side.

use guided_prover::derivation::{DerivationStore, Label, NodeId};
use guided_prover::guidance::{LogitSource, PassiveEntry, PassiveStore, SelectionScheme};
use guided_prover::rvnn::EvalStats;

/// Even clauses are positive.
struct Parity(usize);

impl LogitSource for Parity {
    fn logit(&mut self, _: &DerivationStore, node: NodeId) -> f64 {
        self.0 += 1;
        if node.0.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    fn stats(&self) -> EvalStats {
        EvalStats { logit_evals: self.0, ..EvalStats::default() }
    }
}

fn main() {
    for lazy in [true, false] {
        let scheme = SelectionScheme::layered(1, 2).with_lazy(lazy);
        let mut passive = PassiveStore::new(&scheme, Some(Box::new(Parity(0))), 0.0).unwrap();
        let mut store = DerivationStore::new("demo");
        for i in 0..30u64 {
            let node = store.record(Label::origin("input"), &[]).unwrap();
            passive.insert(&store, PassiveEntry { id: i, age: i, weight: (30 - i) as u32, node });
        }
        let picks: Vec<String> = (0..12)
            .map(|_| {
                let s = passive.select_next(&store).unwrap();
                format!("{}:{:?}", s.id, s.source)
            })
            .collect();
        println!("lazy={lazy}: {}", picks.join(" "));
        println!("  model evaluations after 12 selections: {}", passive.model_evals());
    }
}
