use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::infer::{factor, resolve};
use crate::derivation::{DerivationStore, Label, NodeId, FACTORING, RESOLUTION};
use crate::guidance::{LogitSource, PassiveEntry, PassiveStore, SchemeError, SelectionScheme};
use crate::logic::{display_literals, subsumes, Clause, InputClause, Literal, Signature, Sym};
use crate::rvnn::{Evaluator, ModelParams};

pub const DEFAULT_MAX_SELECTIONS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_selections: usize,
    pub wall_time: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Self { max_selections: DEFAULT_MAX_SELECTIONS, wall_time: None }
    }
}

impl Limits {
    pub fn selections(max_selections: usize) -> Self {
        Self { max_selections, wall_time: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Refutation,
    Saturated,
    LimitReached,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Refutation => "refutation",
            Status::Saturated => "saturated",
            Status::LimitReached => "limit",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SaturationStats {
    /// Clauses popped from the passive set, including ones then discarded.
    pub selections: usize,
    /// Clauses that passed simplification and became active.
    pub activated: usize,
    /// Inference conclusions produced.
    pub generated: usize,
    pub tautologies: usize,
    pub forward_subsumed: usize,
    pub backward_subsumed: usize,
    pub model_evals: usize,
    pub model_cache_hits: usize,
    pub model_eval_time: Duration,
    pub elapsed: Duration,
    pub model_eval_time_fraction: f64,
}

/// Result of one run. Clause ids coincide with derivation node ids.
#[derive(Clone, Debug)]
pub struct SaturationOutcome {
    pub status: Status,
    pub stats: SaturationStats,
    /// Nodes of all popped clauses, in order.
    pub selection_order: Vec<NodeId>,
    pub store: DerivationStore,
    pub clauses: Vec<Clause>,
    pub empty_clause: Option<NodeId>,
    /// Proof nodes in id order, empty unless refuted.
    pub proof: Vec<NodeId>,
}

impl SaturationOutcome {
    pub fn is_refutation(&self) -> bool {
        self.status == Status::Refutation
    }

    /// One line per proof node: `id. <clause> [<rule or origin> <premise ids>]`.
    pub fn format_proof(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for &id in &self.proof {
            let node = self.store.node(id);
            let clause = &self.clauses[id.index()];
            write!(out, "{id}. {} [{}", display_literals(&clause.literals, sig), node.label.name()).unwrap();
            for p in &node.premises {
                write!(out, " {p}").unwrap();
            }
            out.push_str("]\n");
        }
        out
    }
}

/// Marks the premise-closed ancestor set of `empty` as the proof and returns it in
/// id order.
pub fn extract_proof(store: &mut DerivationStore, empty: NodeId) -> Vec<NodeId> {
    let mut in_proof = vec![false; empty.index() + 1];
    in_proof[empty.index()] = true;
    for i in (0..=empty.index()).rev() {
        if in_proof[i] {
            for p in &store.node(NodeId(i as u32)).premises {
                in_proof[p.index()] = true;
            }
        }
    }
    let proof: Vec<NodeId> = (0..=empty.index()).filter(|&i| in_proof[i]).map(|i| NodeId(i as u32)).collect();
    for &id in &proof {
        store.set_in_proof(id, true);
    }
    proof
}

type LitKey = (bool, Sym);

fn keys(lits: &[Literal]) -> Vec<LitKey> {
    let mut k: Vec<LitKey> = lits.iter().map(|l| (l.positive, l.pred)).collect();
    k.sort();
    k.dedup();
    k
}

/// The given-clause loop over one problem.
pub struct Prover {
    clauses: Vec<Clause>,
    store: DerivationStore,
    passive: PassiveStore,
    active: Vec<bool>,
    active_count: usize,
    /// Active clauses containing a literal with the key.
    lit_index: HashMap<LitKey, Vec<usize>>,
    /// Active clauses by the key of their first literal.
    head_index: HashMap<LitKey, Vec<usize>>,
    limits: Limits,
    stats: SaturationStats,
    selection_order: Vec<NodeId>,
    empty_clause: Option<NodeId>,
    status: Option<Status>,
    started: Instant,
}

impl Prover {
    /// Sets up the initial passive set. `model` is required by model-based variants;
    /// the scheme's threshold takes precedence over the model's.
    pub fn new(
        problem: &str,
        input: &[InputClause],
        scheme: &SelectionScheme,
        model: Option<Arc<ModelParams>>,
        limits: Limits,
    ) -> Result<Self, SchemeError> {
        let threshold = scheme.threshold.or(model.as_ref().map(|m| m.threshold())).unwrap_or(0.0);
        let source = model.map(|m| Box::new(Evaluator::new(m, scheme.cache)) as Box<dyn LogitSource>);
        Self::with_source(problem, input, scheme, source, threshold, limits)
    }

    /// As [`Prover::new`] with an arbitrary logit source and explicit threshold.
    pub fn with_source(
        problem: &str,
        input: &[InputClause],
        scheme: &SelectionScheme,
        source: Option<Box<dyn LogitSource>>,
        threshold: f64,
        limits: Limits,
    ) -> Result<Self, SchemeError> {
        let passive = PassiveStore::new(scheme, source, threshold)?;
        let mut p = Self {
            clauses: Vec::with_capacity(input.len()),
            store: DerivationStore::new(problem),
            passive,
            active: Vec::new(),
            active_count: 0,
            lit_index: HashMap::new(),
            head_index: HashMap::new(),
            limits,
            stats: SaturationStats::default(),
            selection_order: Vec::new(),
            empty_clause: None,
            status: None,
            started: Instant::now(),
        };
        for c in input {
            let node = p.store.record(Label::origin(c.origin()), &[]).expect("leaf");
            p.add_clause(c.literals.clone(), node);
            if p.status.is_some() {
                break;
            }
        }
        Ok(p)
    }

    fn add_clause(&mut self, literals: Vec<Literal>, node: NodeId) {
        let id = self.clauses.len();
        debug_assert_eq!(id, node.index());
        let clause = Clause::new(literals, id as u64, node);
        let empty = clause.is_empty();
        let entry = PassiveEntry { id: id as u64, age: clause.age, weight: clause.weight, node };
        self.clauses.push(clause);
        self.active.push(false);
        if empty {
            self.empty_clause = Some(node);
            self.status = Some(Status::Refutation);
        } else {
            self.passive.insert(&self.store, entry);
        }
    }

    pub fn store(&self) -> &DerivationStore {
        &self.store
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, node: NodeId) -> &Clause {
        &self.clauses[node.index()]
    }

    pub fn is_active(&self, node: NodeId) -> bool {
        self.active[node.index()]
    }

    pub fn active_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| self.active[c.node.index()])
    }

    pub fn passive_len(&self) -> usize {
        self.passive.len()
    }

    pub fn passive(&self) -> &PassiveStore {
        &self.passive
    }

    pub fn stats(&self) -> SaturationStats {
        self.stats
    }

    pub fn status(&self) -> Option<Status> {
        self.status
    }

    /// Runs one iteration of the loop; returns the final status once the run is over.
    pub fn step(&mut self) -> Option<Status> {
        if self.status.is_some() {
            return self.status;
        }
        if self.passive.is_empty() {
            self.status = Some(Status::Saturated);
            return self.status;
        }
        let over_time = self.limits.wall_time.is_some_and(|w| self.started.elapsed() >= w);
        if self.stats.selections >= self.limits.max_selections || over_time {
            self.status = Some(Status::LimitReached);
            return self.status;
        }
        let sel = self.passive.select_next(&self.store).expect("passive is non-empty");
        let given = sel.id as usize;
        self.stats.selections += 1;
        self.selection_order.push(self.clauses[given].node);
        if self.clauses[given].is_tautology() {
            self.stats.tautologies += 1;
            return None;
        }
        if self.forward_subsumed(given) {
            self.stats.forward_subsumed += 1;
            return None;
        }
        self.backward_subsume(given);
        self.activate(given);
        self.generate(given);
        self.status
    }

    pub fn run(mut self) -> SaturationOutcome {
        while self.step().is_none() {}
        self.finish()
    }

    fn forward_subsumed(&self, given: usize) -> bool {
        let lits = &self.clauses[given].literals;
        keys(lits)
            .iter()
            .filter_map(|k| self.head_index.get(k))
            .flatten()
            .any(|&a| self.active[a] && subsumes(&self.clauses[a].literals, lits))
    }

    fn backward_subsume(&mut self, given: usize) {
        let lits = &self.clauses[given].literals;
        let head = (lits[0].positive, lits[0].pred);
        let victims: Vec<usize> = self
            .lit_index
            .get(&head)
            .into_iter()
            .flatten()
            .copied()
            .filter(|&a| self.active[a] && subsumes(lits, &self.clauses[a].literals))
            .collect();
        for a in victims {
            self.active[a] = false;
            self.active_count -= 1;
            self.stats.backward_subsumed += 1;
        }
    }

    fn activate(&mut self, given: usize) {
        self.active[given] = true;
        self.active_count += 1;
        self.stats.activated += 1;
        let node = self.clauses[given].node;
        self.store.set_selected(node, true);
        let lits = &self.clauses[given].literals;
        for k in keys(lits) {
            self.lit_index.entry(k).or_default().push(given);
        }
        self.head_index.entry((lits[0].positive, lits[0].pred)).or_default().push(given);
    }

    fn generate(&mut self, given: usize) {
        let given_node = self.clauses[given].node;
        let given_lits = self.clauses[given].literals.clone();
        let mut partners: Vec<usize> = keys(&given_lits)
            .iter()
            .filter_map(|&(pos, pred)| self.lit_index.get(&(!pos, pred)))
            .flatten()
            .copied()
            .filter(|&a| self.active[a])
            .collect();
        partners.sort_unstable();
        partners.dedup();
        for partner in partners {
            let partner_node = self.clauses[partner].node;
            for conclusion in resolve(&given_lits, &self.clauses[partner].literals) {
                if self.emit(conclusion, RESOLUTION, &[given_node, partner_node]) {
                    return;
                }
            }
        }
        for conclusion in factor(&given_lits) {
            if self.emit(conclusion, FACTORING, &[given_node]) {
                return;
            }
        }
    }

    /// Records a conclusion; true when it is the empty clause.
    fn emit(&mut self, literals: Vec<Literal>, rule: &str, premises: &[NodeId]) -> bool {
        self.stats.generated += 1;
        let node = self.store.record(Label::rule(rule), premises).expect("premises exist");
        self.add_clause(literals, node);
        self.status == Some(Status::Refutation)
    }

    pub fn finish(mut self) -> SaturationOutcome {
        let status = self.status.unwrap_or(Status::LimitReached);
        let proof = match self.empty_clause {
            Some(e) => extract_proof(&mut self.store, e),
            None => Vec::new(),
        };
        let model = self.passive.model_stats();
        let elapsed = self.started.elapsed();
        let mut stats = self.stats;
        stats.model_evals = model.logit_evals;
        stats.model_cache_hits = model.cache_hits;
        stats.model_eval_time = model.eval_time;
        stats.elapsed = elapsed;
        stats.model_eval_time_fraction = if model.eval_time.is_zero() || elapsed.is_zero() {
            0.0
        } else {
            (model.eval_time.as_secs_f64() / elapsed.as_secs_f64()).min(1.0)
        };
        SaturationOutcome {
            status,
            stats,
            selection_order: self.selection_order,
            store: self.store,
            clauses: self.clauses,
            empty_clause: self.empty_clause,
            proof,
        }
    }
}

/// Runs the given-clause loop to completion.
pub fn saturate(
    problem: &str,
    input: &[InputClause],
    scheme: &SelectionScheme,
    model: Option<Arc<ModelParams>>,
    limits: Limits,
) -> Result<SaturationOutcome, SchemeError> {
    Ok(Prover::new(problem, input, scheme, model, limits)?.run())
}
