//! Embeds a random derivation DAG with a freshly initialized network and scores its
//! selected nodes, with and without the embedding cache.

use std::sync::Arc;

use guided_prover::derivation::{random_derivation, RandomDag};
use guided_prover::rvnn::{forward_dag, forward_dag_cached, sigmoid, EmbeddingCache, Mode, ModelParams};
use guided_prover::training::vocabulary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let store = random_derivation(&mut rng, "demo", &RandomDag { size: 20, ..RandomDag::default() });
    let (origins, rules) = vocabulary([&store]);
    let params = Arc::new(ModelParams::init(8, origins, rules, 1));
    println!("{} parameters, dim {}", params.len(), params.dim());

    let dag = forward_dag(&params, &store, Mode::Infer);
    for (node, logit) in dag.logits() {
        println!("{:>3} {:<40} logit {:+.4} p {:.3}", node.0, store.render_fingerprint(node), logit, sigmoid(logit));
    }

    let mut cache = EmbeddingCache::new();
    let first = forward_dag_cached(params.clone(), &store, Some(&mut cache));
    let second = forward_dag_cached(params, &store, Some(&mut cache));
    assert_eq!(first.logits, dag.logits());
    println!("first pass: {:?}", first.stats);
    println!("second pass: {:?}", second.stats);
}
