//! Examples, per-problem weighting, mini-batch packing and the train/validation split.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derivation::{CompressedDerivation, DerivationStore, Label, NodeId, FACTORING, RESOLUTION};
use crate::rvnn::RuleSig;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("no derivations with selected clauses to train on")]
    Empty,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad data file: {0}")]
    Format(String),
}

/// One selected node with its label and loss weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Example {
    pub node: NodeId,
    pub positive: bool,
    pub weight: f64,
}

/// A derivation inside a batch together with its examples.
#[derive(Clone, Debug)]
pub struct BatchItem {
    pub derivation: Arc<CompressedDerivation>,
    pub examples: Vec<Example>,
}

#[derive(Clone, Debug, Default)]
pub struct MiniBatch {
    pub items: Vec<BatchItem>,
}

impl MiniBatch {
    pub fn node_count(&self) -> usize {
        self.items.iter().map(|i| i.derivation.len()).sum()
    }

    pub fn examples(&self) -> impl Iterator<Item = &Example> {
        self.items.iter().flat_map(|i| i.examples.iter())
    }

    pub fn total_weight(&self) -> f64 {
        self.examples().map(|e| e.weight).sum()
    }
}

/// Per-example weights for one problem out of `problems`. Each problem carries mass
/// `1/problems`, split evenly between its positives and its negatives; a problem
/// with a single class puts the whole mass on it.
pub fn example_weights(derivation: &DerivationStore, problems: usize) -> Vec<Example> {
    let selected: Vec<_> = derivation.nodes().iter().filter(|n| n.selected).collect();
    let pos = selected.iter().filter(|n| n.in_proof).count();
    let neg = selected.len() - pos;
    let mass = 1.0 / problems as f64;
    let (wp, wn) = match (pos, neg) {
        (0, 0) => return Vec::new(),
        (0, n) => (0.0, mass / n as f64),
        (p, 0) => (mass / p as f64, 0.0),
        (p, n) => (mass / (2.0 * p as f64), mass / (2.0 * n as f64)),
    };
    selected
        .iter()
        .map(|n| Example { node: n.id, positive: n.in_proof, weight: if n.in_proof { wp } else { wn } })
        .collect()
}

/// Weighted examples for a whole dataset; derivations without selected nodes are
/// dropped with a warning. Weights sum to 1.
pub fn weighted_items(derivations: Vec<CompressedDerivation>) -> Vec<BatchItem> {
    let (kept, dropped): (Vec<_>, Vec<_>) = derivations.into_iter().partition(|d| d.selected_count() > 0);
    for d in &dropped {
        log::warn!("derivation of `{}` has no selected clauses; skipped", d.problem());
    }
    let problems = kept.len();
    kept.into_iter()
        .map(|d| {
            let examples = example_weights(&d, problems);
            BatchItem { derivation: Arc::new(d), examples }
        })
        .collect()
}

/// Greedy packing in input order: a derivation larger than `target_nodes` is a batch
/// of its own; smaller ones fill the current batch while they fit.
pub fn pack(items: Vec<BatchItem>, target_nodes: usize) -> Vec<MiniBatch> {
    let mut batches = Vec::new();
    let mut current = MiniBatch::default();
    let mut current_nodes = 0;
    for item in items {
        let size = item.derivation.len();
        if size > target_nodes {
            batches.push(MiniBatch { items: vec![item] });
            continue;
        }
        if current_nodes + size > target_nodes && !current.items.is_empty() {
            batches.push(std::mem::take(&mut current));
            current_nodes = 0;
        }
        current_nodes += size;
        current.items.push(item);
    }
    if !current.items.is_empty() {
        batches.push(current);
    }
    batches
}

/// Number of training batches out of `n` for split fraction `frac`; with two or more
/// batches both sides keep at least one.
pub fn train_count(n: usize, frac: f64) -> usize {
    let k = (frac * n as f64).round() as usize;
    if n >= 2 {
        k.clamp(1, n - 1)
    } else {
        k.min(n)
    }
}

/// Shuffles whole batches with `seed` and splits them.
pub fn split_batches(mut batches: Vec<MiniBatch>, split: f64, seed: u64) -> (Vec<MiniBatch>, Vec<MiniBatch>) {
    batches.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = train_count(batches.len(), split);
    let val = batches.split_off(k);
    (batches, val)
}

pub fn build_batches(
    derivations: Vec<CompressedDerivation>,
    target_nodes: usize,
    split: f64,
    seed: u64,
) -> Result<(Vec<MiniBatch>, Vec<MiniBatch>), DataError> {
    let items = weighted_items(derivations);
    if items.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(split_batches(pack(items, target_nodes), split, seed))
}

/// Origin labels and rule signatures occurring in `derivations`, plus the prover's own
/// rules. Rules of arity above two are recorded as binary.
pub fn vocabulary<'a>(derivations: impl IntoIterator<Item = &'a DerivationStore>) -> (Vec<String>, Vec<RuleSig>) {
    let mut origins: Vec<String> = Vec::new();
    let mut rules = vec![RuleSig::new(RESOLUTION, 2), RuleSig::new(FACTORING, 1)];
    for d in derivations {
        for n in d.nodes() {
            match &n.label {
                Label::Origin(o) => {
                    if !origins.iter().any(|x| **x == **o) {
                        origins.push(o.to_string());
                    }
                }
                Label::Rule(r) => {
                    let sig = RuleSig::new(r.to_string(), n.premises.len().min(2));
                    if !rules.contains(&sig) {
                        rules.push(sig);
                    }
                }
            }
        }
    }
    (origins, rules)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct NodeRecord {
    l: String,
    o: bool,
    p: Vec<u32>,
    s: bool,
    q: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DerivationRecord {
    problem: String,
    nodes: Vec<NodeRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BatchRecord {
    items: Vec<usize>,
    weights: Vec<Vec<(u32, bool, f64)>>,
}

/// Prepared training data as written by `prepare` and read by `train`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PreparedData {
    version: u32,
    derivations: Vec<DerivationRecord>,
    train: Vec<BatchRecord>,
    val: Vec<BatchRecord>,
}

impl PreparedData {
    pub fn new(train: &[MiniBatch], val: &[MiniBatch]) -> Self {
        let mut derivations = Vec::new();
        let mut index: HashMap<*const CompressedDerivation, usize> = HashMap::new();
        let mut record = |batches: &[MiniBatch]| -> Vec<BatchRecord> {
            batches
                .iter()
                .map(|b| {
                    let items = b
                        .items
                        .iter()
                        .map(|it| {
                            *index.entry(Arc::as_ptr(&it.derivation)).or_insert_with(|| {
                                derivations.push(DerivationRecord {
                                    problem: it.derivation.problem().to_string(),
                                    nodes: it
                                        .derivation
                                        .nodes()
                                        .iter()
                                        .map(|n| NodeRecord {
                                            l: n.label.name().to_string(),
                                            o: n.label.is_origin(),
                                            p: n.premises.iter().map(|p| p.0).collect(),
                                            s: n.selected,
                                            q: n.in_proof,
                                        })
                                        .collect(),
                                });
                                derivations.len() - 1
                            })
                        })
                        .collect();
                    let weights = b
                        .items
                        .iter()
                        .map(|it| it.examples.iter().map(|e| (e.node.0, e.positive, e.weight)).collect())
                        .collect();
                    BatchRecord { items, weights }
                })
                .collect()
        };
        let train = record(train);
        let val = record(val);
        Self { version: 1, derivations, train, val }
    }

    pub fn batches(&self) -> Result<(Vec<MiniBatch>, Vec<MiniBatch>), DataError> {
        let mut stores = Vec::with_capacity(self.derivations.len());
        for d in &self.derivations {
            let mut s = DerivationStore::new(d.problem.clone());
            for n in &d.nodes {
                let label = if n.o { Label::origin(&n.l) } else { Label::rule(&n.l) };
                let premises: Vec<NodeId> = n.p.iter().map(|&p| NodeId(p)).collect();
                let id = s.record(label, &premises).map_err(|e| DataError::Format(e.to_string()))?;
                s.set_selected(id, n.s);
                s.set_in_proof(id, n.q);
            }
            stores.push(Arc::new(CompressedDerivation::from_store_unchecked(s)));
        }
        let rebuild = |records: &[BatchRecord]| -> Result<Vec<MiniBatch>, DataError> {
            records
                .iter()
                .map(|r| {
                    let items = r
                        .items
                        .iter()
                        .zip(&r.weights)
                        .map(|(&i, w)| {
                            let derivation =
                                stores.get(i).ok_or_else(|| DataError::Format(format!("no derivation {i}")))?.clone();
                            let examples = w
                                .iter()
                                .map(|&(node, positive, weight)| Example { node: NodeId(node), positive, weight })
                                .collect();
                            Ok(BatchItem { derivation, examples })
                        })
                        .collect::<Result<_, DataError>>()?;
                    Ok(MiniBatch { items })
                })
                .collect()
        };
        Ok((rebuild(&self.train)?, rebuild(&self.val)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        serde_json::to_writer(BufWriter::new(File::create(path)?), self).map_err(|e| DataError::Format(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let data: Self =
            serde_json::from_reader(BufReader::new(File::open(path)?)).map_err(|e| DataError::Format(e.to_string()))?;
        if data.version != 1 {
            return Err(DataError::Format(format!("unsupported version {}", data.version)));
        }
        Ok(data)
    }
}
