use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::ops::{apply_rule, eval_logit};
use super::params::ModelParams;
use crate::derivation::{DerivationStore, Fingerprint, Label, NodeId};

#[derive(Clone, Debug)]
pub struct CachedEmbedding {
    pub embedding: Arc<[f64]>,
    pub logit: Option<f64>,
}

/// Embeddings and logits keyed by fingerprint. Only valid together with the
/// derivation store whose fingerprint table produced the keys.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingCache {
    entries: HashMap<Fingerprint, CachedEmbedding>,
}

impl EmbeddingCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, fp: Fingerprint) -> Option<&CachedEmbedding> {
        self.entries.get(&fp)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Logits computed by the eval head (cache hits excluded).
    pub logit_evals: usize,
    /// Deriv blocks applied.
    pub deriv_evals: usize,
    pub cache_hits: usize,
    pub eval_time: Duration,
}

/// Incremental inference over a growing derivation, as used inside a prover run.
///
/// Node embeddings are memoized per node; with a cache, also per fingerprint, so
/// equivalent clauses share one computation.
#[derive(Clone, Debug)]
pub struct Evaluator {
    params: Arc<ModelParams>,
    cache: Option<EmbeddingCache>,
    node_emb: Vec<Option<Arc<[f64]>>>,
    stats: EvalStats,
}

impl Evaluator {
    pub fn new(params: Arc<ModelParams>, use_cache: bool) -> Self {
        Self::with_cache(params, use_cache.then(EmbeddingCache::new))
    }

    pub fn with_cache(params: Arc<ModelParams>, cache: Option<EmbeddingCache>) -> Self {
        Self { params, cache, node_emb: Vec::new(), stats: EvalStats::default() }
    }

    pub fn params(&self) -> &Arc<ModelParams> {
        &self.params
    }

    pub fn stats(&self) -> EvalStats {
        self.stats
    }

    pub fn into_cache(self) -> Option<EmbeddingCache> {
        self.cache
    }

    fn memo(&self, id: NodeId) -> Option<&Arc<[f64]>> {
        self.node_emb.get(id.index()).and_then(Option::as_ref)
    }

    fn lookup(&mut self, store: &DerivationStore, id: NodeId) -> Option<Arc<[f64]>> {
        if let Some(e) = self.memo(id) {
            return Some(e.clone());
        }
        let hit = self.cache.as_ref()?.get(store.fingerprint(id))?.embedding.clone();
        self.stats.cache_hits += 1;
        self.set_memo(id, hit.clone());
        Some(hit)
    }

    fn set_memo(&mut self, id: NodeId, e: Arc<[f64]>) {
        if self.node_emb.len() <= id.index() {
            self.node_emb.resize(id.index() + 1, None);
        }
        self.node_emb[id.index()] = Some(e);
    }

    /// Embedding of `id`, computing missing ancestors bottom-up.
    pub fn embedding(&mut self, store: &DerivationStore, id: NodeId) -> Arc<[f64]> {
        if let Some(e) = self.lookup(store, id) {
            return e;
        }
        let start = Instant::now();
        let mut stack = vec![id];
        while let Some(&top) = stack.last() {
            if self.memo(top).is_some() {
                stack.pop();
                continue;
            }
            let node = store.node(top);
            let mut pending = false;
            for &p in &node.premises {
                if self.lookup(store, p).is_none() {
                    stack.push(p);
                    pending = true;
                }
            }
            if pending {
                continue;
            }
            stack.pop();
            let emb: Arc<[f64]> = match &node.label {
                Label::Origin(o) => Arc::from(self.params.init_vector(self.params.origin_slot(o))),
                Label::Rule(r) => {
                    let children: Vec<Arc<[f64]>> =
                        node.premises.iter().map(|p| self.memo(*p).expect("premise embedded").clone()).collect();
                    let refs: Vec<&[f64]> = children.iter().map(|c| &c[..]).collect();
                    let (v, count) = apply_rule(&self.params, r, &refs);
                    self.stats.deriv_evals += count;
                    Arc::from(v)
                }
            };
            if let Some(cache) = self.cache.as_mut() {
                cache
                    .entries
                    .entry(store.fingerprint(top))
                    .or_insert_with(|| CachedEmbedding { embedding: emb.clone(), logit: None });
            }
            self.set_memo(top, emb);
        }
        self.stats.eval_time += start.elapsed();
        self.memo(id).expect("computed").clone()
    }

    /// Logit of `id`. With a cache, a node equivalent to an already evaluated one
    /// costs no model evaluation.
    pub fn logit(&mut self, store: &DerivationStore, id: NodeId) -> f64 {
        let fp = store.fingerprint(id);
        if let Some(l) = self.cache.as_ref().and_then(|c| c.get(fp)).and_then(|e| e.logit) {
            self.stats.cache_hits += 1;
            return l;
        }
        let v = self.embedding(store, id);
        let start = Instant::now();
        let logit = eval_logit(&self.params, &v);
        self.stats.logit_evals += 1;
        self.stats.eval_time += start.elapsed();
        if let Some(entry) = self.cache.as_mut().and_then(|c| c.entries.get_mut(&fp)) {
            entry.logit = Some(logit);
        }
        logit
    }
}

/// Per-node embeddings and selected-node logits computed through an [`Evaluator`].
#[derive(Clone, Debug)]
pub struct CachedForward {
    pub embeddings: Vec<Arc<[f64]>>,
    pub logits: Vec<(NodeId, f64)>,
    pub stats: EvalStats,
}

/// Inference pass over a whole store, reusing and filling `cache` when given.
pub fn forward_dag_cached(
    params: Arc<ModelParams>,
    store: &DerivationStore,
    mut cache: Option<&mut EmbeddingCache>,
) -> CachedForward {
    let taken = cache.as_deref_mut().map(std::mem::take);
    let mut ev = Evaluator::with_cache(params, taken);
    let embeddings = store.nodes().iter().map(|n| ev.embedding(store, n.id)).collect();
    let logits = store.nodes().iter().filter(|n| n.selected).map(|n| (n.id, ev.logit(store, n.id))).collect();
    let stats = ev.stats();
    if let (Some(slot), Some(filled)) = (cache, ev.into_cache()) {
        *slot = filled;
    }
    CachedForward { embeddings, logits, stats }
}
