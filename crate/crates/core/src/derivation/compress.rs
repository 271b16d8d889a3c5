use std::collections::HashMap;
use std::ops::Deref;

use super::{DerivationStore, NodeId};

/// A derivation with one representative node per fingerprint class.
///
/// A representative is selected if any class member was, and in the proof if any
/// member was.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedDerivation(DerivationStore);

impl CompressedDerivation {
    pub fn store(&self) -> &DerivationStore {
        &self.0
    }

    pub fn into_store(self) -> DerivationStore {
        self.0
    }

    /// Wraps a store without checking that its classes are already merged.
    pub fn from_store_unchecked(store: DerivationStore) -> Self {
        Self(store)
    }
}

impl Deref for CompressedDerivation {
    type Target = DerivationStore;

    fn deref(&self) -> &DerivationStore {
        &self.0
    }
}

pub(super) fn compress(src: &DerivationStore) -> CompressedDerivation {
    let mut out = DerivationStore::new(src.problem());
    let mut class_of: HashMap<_, NodeId> = HashMap::new();
    // Maps each source node to the compressed id of its class.
    let mut remap: Vec<NodeId> = Vec::with_capacity(src.len());
    for node in src.nodes() {
        let fp = src.fingerprint(node.id);
        let target = match class_of.get(&fp) {
            Some(&t) => t,
            None => {
                let premises: Vec<NodeId> = node.premises.iter().map(|p| remap[p.index()]).collect();
                let t = out.record(node.label.clone(), &premises).expect("premises of a representative precede it");
                class_of.insert(fp, t);
                t
            }
        };
        if node.selected {
            out.set_selected(target, true);
        }
        if node.in_proof {
            out.set_in_proof(target, true);
        }
        remap.push(target);
    }
    CompressedDerivation(out)
}
