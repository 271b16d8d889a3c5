//! Derivation DAG recording, fingerprinting by abstract derivation tree, compression,
//! and the `.dlog` on-disk format.

mod compress;
mod fingerprint;
mod log;
mod random;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use compress::CompressedDerivation;
pub use fingerprint::{Fingerprint, FingerprintTable};
pub use log::{read_log, read_log_file, write_log, write_log_file, LogError, LOG_VERSION};
pub use random::{random_derivation, RandomDag};

/// Rule label of binary resolution inferences.
pub const RESOLUTION: &str = "Resolution";
/// Rule label of factoring inferences.
pub const FACTORING: &str = "Factoring";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Leaves carry an axiom-origin label, internal nodes an inference-rule label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Origin(Arc<str>),
    Rule(Arc<str>),
}

impl Label {
    pub fn origin(name: &str) -> Self {
        Label::Origin(Arc::from(name))
    }

    pub fn rule(name: &str) -> Self {
        Label::Rule(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        match self {
            Label::Origin(s) | Label::Rule(s) => s,
        }
    }

    pub fn is_origin(&self) -> bool {
        matches!(self, Label::Origin(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationNode {
    pub id: NodeId,
    pub label: Label,
    pub premises: Vec<NodeId>,
    pub selected: bool,
    pub in_proof: bool,
}

impl DerivationNode {
    pub fn is_leaf(&self) -> bool {
        self.premises.is_empty()
    }

    /// Selected nodes are training examples; in-proof ones are the positives.
    pub fn is_positive(&self) -> bool {
        self.selected && self.in_proof
    }

    pub fn is_negative(&self) -> bool {
        self.selected && !self.in_proof
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivationError {
    #[error("premise {premise} of new node does not exist (store has {len} nodes)")]
    UnknownPremise { premise: NodeId, len: usize },
    #[error("origin label `{0}` cannot have premises")]
    LeafWithPremises(String),
    #[error("rule label `{0}` needs at least one premise")]
    RuleWithoutPremises(String),
}

/// The derivation DAG of one prover run. Node ids are dense and topological.
#[derive(Clone, Debug, Default)]
pub struct DerivationStore {
    problem: String,
    nodes: Vec<DerivationNode>,
    fingerprints: Vec<Fingerprint>,
    table: FingerprintTable,
}

impl PartialEq for DerivationStore {
    fn eq(&self, other: &Self) -> bool {
        self.problem == other.problem && self.nodes == other.nodes
    }
}

impl DerivationStore {
    pub fn new(problem: impl Into<String>) -> Self {
        Self { problem: problem.into(), ..Self::default() }
    }

    pub fn problem(&self) -> &str {
        &self.problem
    }

    pub fn set_problem(&mut self, problem: impl Into<String>) {
        self.problem = problem.into();
    }

    /// Appends a node; its fingerprint is computed from the premises' ones.
    pub fn record(&mut self, label: Label, premises: &[NodeId]) -> Result<NodeId, DerivationError> {
        let len = self.nodes.len();
        if let Some(&bad) = premises.iter().find(|p| p.index() >= len) {
            return Err(DerivationError::UnknownPremise { premise: bad, len });
        }
        match (&label, premises.is_empty()) {
            (Label::Origin(l), false) => return Err(DerivationError::LeafWithPremises(l.to_string())),
            (Label::Rule(r), true) => return Err(DerivationError::RuleWithoutPremises(r.to_string())),
            _ => {}
        }
        let child_fps: Vec<Fingerprint> = premises.iter().map(|p| self.fingerprints[p.index()]).collect();
        let fp = self.table.intern(&label, child_fps);
        let id = NodeId(len as u32);
        self.nodes.push(DerivationNode { id, label, premises: premises.to_vec(), selected: false, in_proof: false });
        self.fingerprints.push(fp);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &DerivationNode {
        &self.nodes[id.index()]
    }

    pub fn nodes(&self) -> &[DerivationNode] {
        &self.nodes
    }

    pub fn fingerprint(&self, id: NodeId) -> Fingerprint {
        self.fingerprints[id.index()]
    }

    pub fn table(&self) -> &FingerprintTable {
        &self.table
    }

    /// Canonical text of a node's abstract derivation tree, e.g.
    /// `Resolution(thax_assoc,Factoring(input))`. Size is that of the unfolded tree.
    pub fn render_fingerprint(&self, id: NodeId) -> String {
        self.table.render(self.fingerprint(id))
    }

    pub fn set_selected(&mut self, id: NodeId, selected: bool) {
        self.nodes[id.index()].selected = selected;
    }

    pub fn set_in_proof(&mut self, id: NodeId, in_proof: bool) {
        self.nodes[id.index()].in_proof = in_proof;
    }

    pub fn clear_proof(&mut self) {
        for n in &mut self.nodes {
            n.in_proof = false;
        }
    }

    pub fn selected_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.selected).count()
    }

    pub fn positive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_positive()).count()
    }

    pub fn negative_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_negative()).count()
    }

    /// Origin labels in order of first occurrence.
    pub fn origins(&self) -> Vec<String> {
        self.distinct_labels(true)
    }

    /// Rule labels in order of first occurrence.
    pub fn rules(&self) -> Vec<String> {
        self.distinct_labels(false)
    }

    fn distinct_labels(&self, origins: bool) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for n in &self.nodes {
            if n.label.is_origin() == origins && !out.iter().any(|l| l == n.label.name()) {
                out.push(n.label.name().to_string());
            }
        }
        out
    }

    /// The sub-DAG of selected nodes and their ancestors, renumbered in order. Nodes
    /// outside it never influence an embedding read for training.
    pub fn selected_closure(&self) -> DerivationStore {
        let mut keep = vec![false; self.nodes.len()];
        for n in self.nodes.iter().rev() {
            if n.selected || keep[n.id.index()] {
                keep[n.id.index()] = true;
                for p in &n.premises {
                    keep[p.index()] = true;
                }
            }
        }
        let mut out = DerivationStore::new(self.problem.clone());
        let mut remap = vec![NodeId(0); self.nodes.len()];
        for n in self.nodes.iter().filter(|n| keep[n.id.index()]) {
            let premises: Vec<NodeId> = n.premises.iter().map(|p| remap[p.index()]).collect();
            let id = out.record(n.label.clone(), &premises).expect("premises are kept before their conclusions");
            out.set_selected(id, n.selected);
            out.set_in_proof(id, n.in_proof);
            remap[n.id.index()] = id;
        }
        out
    }

    /// Factorises the DAG by derivation-tree equivalence.
    pub fn compress(&self) -> CompressedDerivation {
        compress::compress(self)
    }
}
