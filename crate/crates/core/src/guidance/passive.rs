use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use super::scheme::{SchemeError, SelectionScheme, Variant};
use crate::derivation::{DerivationStore, NodeId};
use crate::rvnn::{EvalStats, Evaluator};

/// Anything that can score a derivation node. The prover uses an [`Evaluator`];
/// tests substitute fixed tables.
pub trait LogitSource {
    fn logit(&mut self, store: &DerivationStore, node: NodeId) -> f64;
    fn stats(&self) -> EvalStats;
}

impl LogitSource for Evaluator {
    fn logit(&mut self, store: &DerivationStore, node: NodeId) -> f64 {
        Evaluator::logit(self, store, node)
    }

    fn stats(&self) -> EvalStats {
        Evaluator::stats(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    Positive,
    Negative,
}

/// Positive iff `logit ≥ t`.
pub fn classify_logit(logit: f64, t: f64) -> Class {
    if logit >= t {
        Class::Positive
    } else {
        Class::Negative
    }
}

pub fn classify(model: &mut dyn LogitSource, store: &DerivationStore, node: NodeId, t: f64) -> (Class, f64) {
    let logit = model.logit(store, node);
    (classify_logit(logit, t), logit)
}

/// Priority-queue order: positives first, then older, then lower id.
pub fn order_key_m10(class: Class, age: u64, id: u64) -> (u8, u64, u64) {
    (u8::from(class == Class::Negative), age, id)
}

/// A float ordered by `total_cmp`, usable in heap keys.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Logit-queue order: higher logit first, then older, then lower id.
pub fn order_key_mr(logit: f64, age: u64, id: u64) -> (OrdF64, u64, u64) {
    (OrdF64(-logit), age, id)
}

/// Round-robin over a period of `first + second` turns, `first` turns leading.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatioCounter {
    first: u32,
    second: u32,
    pos: u32,
}

impl RatioCounter {
    pub fn new(first: u32, second: u32) -> Self {
        Self { first, second, pos: 0 }
    }

    pub fn first_turn(&self) -> bool {
        self.pos < self.first
    }

    pub fn advance(&mut self) {
        self.pos = (self.pos + 1) % (self.first + self.second);
    }
}

/// Where a selection came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Age,
    Weight,
    /// Layered model side, age turn.
    ModelAge,
    /// Layered model side, weight turn.
    ModelWeight,
    /// The single model queue of the priority and logit variants.
    ModelQueue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Selection {
    pub id: u64,
    pub source: Source,
    /// A layered model turn that found no positive clause and fell back to base.
    pub fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PassiveEntry {
    /// Creation id, unique per run.
    pub id: u64,
    pub age: u64,
    pub weight: u32,
    pub node: NodeId,
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    entry: PassiveEntry,
    logit: Option<f64>,
    /// Still a candidate for the model side (not forgotten as negative).
    model_side: bool,
}

type AgeKey = Reverse<(u64, u64)>;
type WeightKey = Reverse<(u32, u64, u64)>;

/// The passive set as a family of lazily-deleted priority queues.
pub struct PassiveStore {
    variant: Variant,
    lazy: bool,
    threshold: f64,
    model: Option<Box<dyn LogitSource>>,
    slots: HashMap<u64, Slot>,
    age_q: BinaryHeap<AgeKey>,
    weight_q: BinaryHeap<WeightKey>,
    // Layered model side (lazy: all clauses, eager: positives only).
    // The priority variants in lazy mode keep unevaluated clauses in `m_age_q`.
    m_age_q: BinaryHeap<AgeKey>,
    m_weight_q: BinaryHeap<WeightKey>,
    neg_q: BinaryHeap<AgeKey>,
    prio_q: BinaryHeap<Reverse<(u8, u64, u64)>>,
    logit_q: BinaryHeap<Reverse<(OrdF64, u64, u64)>>,
    base_ratio: RatioCounter,
    model_ratio: RatioCounter,
    /// Model turns first.
    second: RatioCounter,
    source_counts: HashMap<Source, usize>,
    fallbacks: usize,
}

impl PassiveStore {
    pub fn new(
        scheme: &SelectionScheme,
        model: Option<Box<dyn LogitSource>>,
        threshold: f64,
    ) -> Result<Self, SchemeError> {
        scheme.validate()?;
        if scheme.variant.uses_model() && model.is_none() {
            return Err(SchemeError::MissingModel(scheme.variant));
        }
        let [age, weight] = scheme.age_weight;
        let [base, model_turns] = scheme.second_level;
        Ok(Self {
            variant: scheme.variant,
            lazy: scheme.lazy,
            threshold,
            model: if scheme.variant.uses_model() { model } else { None },
            slots: HashMap::new(),
            age_q: BinaryHeap::new(),
            weight_q: BinaryHeap::new(),
            m_age_q: BinaryHeap::new(),
            m_weight_q: BinaryHeap::new(),
            neg_q: BinaryHeap::new(),
            prio_q: BinaryHeap::new(),
            logit_q: BinaryHeap::new(),
            base_ratio: RatioCounter::new(age, weight),
            model_ratio: RatioCounter::new(age, weight),
            second: RatioCounter::new(model_turns, base),
            source_counts: HashMap::new(),
            fallbacks: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.slots.contains_key(&id)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn model_stats(&self) -> EvalStats {
        self.model.as_ref().map(|m| m.stats()).unwrap_or_default()
    }

    pub fn model_evals(&self) -> usize {
        self.model_stats().logit_evals
    }

    pub fn source_count(&self, source: Source) -> usize {
        self.source_counts.get(&source).copied().unwrap_or(0)
    }

    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    /// Logit of a passive clause, if it has been evaluated.
    pub fn logit_of(&self, id: u64) -> Option<f64> {
        self.slots.get(&id).and_then(|s| s.logit)
    }

    fn evaluate(&mut self, store: &DerivationStore, id: u64) -> f64 {
        let slot = self.slots.get_mut(&id).expect("live passive clause");
        if let Some(l) = slot.logit {
            return l;
        }
        let model = self.model.as_mut().expect("model-dependent variant");
        let l = model.logit(store, slot.entry.node);
        slot.logit = Some(l);
        l
    }

    /// Enqueues a clause. Model evaluation happens here only in eager mode.
    ///
    /// # Panics
    /// If a clause with the same id is already passive.
    pub fn insert(&mut self, store: &DerivationStore, entry: PassiveEntry) {
        let PassiveEntry { id, age, weight, .. } = entry;
        let prev = self.slots.insert(id, Slot { entry, logit: None, model_side: true });
        assert!(prev.is_none(), "clause {id} inserted twice");
        if self.variant.has_base_side() {
            self.age_q.push(Reverse((age, id)));
            self.weight_q.push(Reverse((weight, age, id)));
        }
        match self.variant {
            Variant::Base => {}
            Variant::Layered => {
                let keep = self.lazy || classify_logit(self.evaluate(store, id), self.threshold) == Class::Positive;
                if keep {
                    self.m_age_q.push(Reverse((age, id)));
                    self.m_weight_q.push(Reverse((weight, age, id)));
                } else {
                    self.slots.get_mut(&id).expect("just inserted").model_side = false;
                }
            }
            Variant::PriorityQueueOnly | Variant::BasePlusPriority => {
                if self.lazy {
                    self.m_age_q.push(Reverse((age, id)));
                } else {
                    let class = classify_logit(self.evaluate(store, id), self.threshold);
                    self.prio_q.push(Reverse(order_key_m10(class, age, id)));
                }
            }
            Variant::LogitQueueOnly | Variant::BasePlusLogit => {
                let logit = self.evaluate(store, id);
                self.logit_q.push(Reverse(order_key_mr(logit, age, id)));
            }
        }
    }

    /// Removes and returns the next clause according to the scheme.
    pub fn select_next(&mut self, store: &DerivationStore) -> Option<Selection> {
        if self.slots.is_empty() {
            return None;
        }
        let model_turn = match self.variant {
            Variant::Base => false,
            Variant::PriorityQueueOnly | Variant::LogitQueueOnly => true,
            _ => {
                let turn = self.second.first_turn();
                self.second.advance();
                turn
            }
        };
        let sel = if !model_turn {
            self.base_pick(false)
        } else {
            match self.variant {
                Variant::Layered => match self.lazy_select_positive(store) {
                    Some(sel) => sel,
                    None => {
                        self.fallbacks += 1;
                        self.base_pick(true)
                    }
                },
                Variant::PriorityQueueOnly | Variant::BasePlusPriority => self.priority_pick(store),
                _ => self.logit_pick(),
            }
        };
        self.slots.remove(&sel.id);
        *self.source_counts.entry(sel.source).or_default() += 1;
        Some(sel)
    }

    fn base_pick(&mut self, fallback: bool) -> Selection {
        let age_turn = self.base_ratio.first_turn();
        self.base_ratio.advance();
        let slots = &self.slots;
        let (id, source) = if age_turn {
            (pop_live(&mut self.age_q, |&Reverse((_, id))| slots.contains_key(&id).then_some(id)), Source::Age)
        } else {
            (pop_live(&mut self.weight_q, |&Reverse((_, _, id))| slots.contains_key(&id).then_some(id)), Source::Weight)
        };
        Selection { id: id.expect("base queues hold every passive clause"), source, fallback }
    }

    /// The layered model side: pops in base order, evaluates each candidate once, and
    /// forgets negatives from the model side only. `None` when no positive remains.
    pub fn lazy_select_positive(&mut self, store: &DerivationStore) -> Option<Selection> {
        let age_turn = self.model_ratio.first_turn();
        loop {
            let slots = &self.slots;
            let live = |id: u64| slots.get(&id).is_some_and(|s| s.model_side).then_some(id);
            let id = if age_turn {
                pop_live(&mut self.m_age_q, |&Reverse((_, id))| live(id))
            } else {
                pop_live(&mut self.m_weight_q, |&Reverse((_, _, id))| live(id))
            }?;
            let logit = self.evaluate(store, id);
            if classify_logit(logit, self.threshold) == Class::Positive {
                self.model_ratio.advance();
                let source = if age_turn { Source::ModelAge } else { Source::ModelWeight };
                return Some(Selection { id, source, fallback: false });
            }
            self.slots.get_mut(&id).expect("live").model_side = false;
        }
    }

    fn priority_pick(&mut self, store: &DerivationStore) -> Selection {
        let source = Source::ModelQueue;
        if !self.lazy {
            let slots = &self.slots;
            let id = pop_live(&mut self.prio_q, |&Reverse((_, _, id))| slots.contains_key(&id).then_some(id));
            return Selection { id: id.expect("model queue holds every passive clause"), source, fallback: false };
        }
        loop {
            let slots = &self.slots;
            let Some(id) = pop_live(&mut self.m_age_q, |&Reverse((_, id))| slots.contains_key(&id).then_some(id))
            else {
                break;
            };
            let logit = self.evaluate(store, id);
            if classify_logit(logit, self.threshold) == Class::Positive {
                return Selection { id, source, fallback: false };
            }
            let age = self.slots[&id].entry.age;
            self.neg_q.push(Reverse((age, id)));
        }
        let slots = &self.slots;
        let id = pop_live(&mut self.neg_q, |&Reverse((_, id))| slots.contains_key(&id).then_some(id));
        Selection { id: id.expect("model queue holds every passive clause"), source, fallback: false }
    }

    fn logit_pick(&mut self) -> Selection {
        let slots = &self.slots;
        let id = pop_live(&mut self.logit_q, |&Reverse((_, _, id))| slots.contains_key(&id).then_some(id));
        Selection {
            id: id.expect("model queue holds every passive clause"),
            source: Source::ModelQueue,
            fallback: false,
        }
    }
}

/// Pops until an entry maps to a live id.
fn pop_live<K: Ord>(heap: &mut BinaryHeap<K>, live: impl Fn(&K) -> Option<u64>) -> Option<u64> {
    while let Some(k) = heap.pop() {
        if let Some(id) = live(&k) {
            return Some(id);
        }
    }
    None
}
