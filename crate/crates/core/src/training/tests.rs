use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::derivation::{random_derivation, CompressedDerivation, DerivationStore, NodeId, RandomDag};
use crate::rvnn::{Mode, ModelParams};

fn batch_of(derivs: Vec<DerivationStore>) -> MiniBatch {
    MiniBatch { items: weighted_items(derivs.iter().map(|d| d.compress()).collect()) }
}

fn random_batch(rng: &mut ChaCha8Rng, count: usize, size: usize) -> MiniBatch {
    let cfg = RandomDag { size, max_depth: 6, wide_rules: true, ..RandomDag::default() };
    batch_of((0..count).map(|i| random_derivation(rng, &format!("p{i}"), &cfg)).collect())
}

fn params_for(batch: &MiniBatch, dim: usize, seed: u64) -> ModelParams {
    let config = TrainConfig { dim, seed, ..TrainConfig::default() };
    initial_params(&config, &[std::slice::from_ref(batch)])
}

fn max_rel_error(params: &ModelParams, batch: &MiniBatch, mode: Mode, h: f64) -> f64 {
    let (_, grad) = loss_and_grad(params, batch, mode);
    let mut p = params.clone();
    let mut worst: f64 = 0.0;
    for i in 0..params.len() {
        let x = params.data()[i];
        p.data_mut()[i] = x + h;
        let up = loss(&p, batch, mode);
        p.data_mut()[i] = x - h;
        let down = loss(&p, batch, mode);
        p.data_mut()[i] = x;
        let fd = (up - down) / (2.0 * h);
        let err = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-6);
        worst = worst.max(err);
    }
    worst
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..3 {
        let batch = random_batch(&mut rng, 2, 12);
        let p = params_for(&batch, 4, k);
        let err = max_rel_error(&p, &batch, Mode::Infer, 1e-6);
        assert!(err < 1e-4, "infer: {err}");
        let err = max_rel_error(&p, &batch, Mode::Train { dropout: 0.3, seed: 9 + k }, 1e-6);
        assert!(err < 1e-4, "train: {err}");
    }
}

fn single(store: DerivationStore) -> MiniBatch {
    let examples = example_weights(&store, 1);
    MiniBatch {
        items: vec![BatchItem { derivation: Arc::new(CompressedDerivation::from_store_unchecked(store)), examples }],
    }
}

/// Copies every premise reference, turning the DAG into the tree it denotes.
fn unfold(store: &DerivationStore) -> (DerivationStore, Vec<NodeId>) {
    fn copy(src: &DerivationStore, id: NodeId, dst: &mut DerivationStore) -> NodeId {
        let n = src.node(id);
        let premises: Vec<NodeId> = n.premises.iter().map(|p| copy(src, *p, dst)).collect();
        dst.record(n.label.clone(), &premises).unwrap()
    }
    let mut dst = DerivationStore::new(store.problem());
    let mut roots = Vec::new();
    for n in store.nodes().iter().filter(|n| n.selected) {
        let id = copy(store, n.id, &mut dst);
        dst.set_selected(id, true);
        dst.set_in_proof(id, n.in_proof);
        roots.push(id);
    }
    (dst, roots)
}

#[test]
fn shared_subdags_get_the_gradient_of_the_unfolded_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = RandomDag { size: 14, max_depth: 4, ..RandomDag::default() };
    for k in 0..4 {
        let dag = random_derivation(&mut rng, "p", &cfg);
        let (tree, _) = unfold(&dag);
        let a = single(dag);
        let b = single(tree);
        let p = params_for(&a, 5, k);
        let (la, ga) = loss_and_grad(&p, &a, Mode::Infer);
        let (lb, gb) = loss_and_grad(&p, &b, Mode::Infer);
        assert!((la - lb).abs() < 1e-12, "{la} vs {lb}");
        for (x, y) in ga.iter().zip(&gb) {
            assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
    }
}

#[test]
fn zero_weights_give_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut batch = random_batch(&mut rng, 2, 15);
    for item in &mut batch.items {
        item.examples.iter_mut().for_each(|e| e.weight = 0.0);
    }
    let p = params_for(&batch, 4, 1);
    let (l, g) = loss_and_grad(&p, &batch, Mode::Train { dropout: 0.3, seed: 2 });
    assert_eq!(l, 0.0);
    assert!(g.iter().all(|x| *x == 0.0));
}

#[test]
fn stable_bce_matches_naive_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let l: f64 = rng.gen_range(-10.0..10.0);
        let w: f64 = rng.gen_range(0.0..3.0);
        let s = 1.0 / (1.0 + (-l).exp());
        assert!((bce_with_logit(l, true, w) - -w * s.ln()).abs() < 1e-9);
        assert!((bce_with_logit(l, false, w) - -w * (1.0 - s).ln()).abs() < 1e-9);
    }
    for l in [-1000.0, 1000.0] {
        for y in [true, false] {
            assert!(bce_with_logit(l, y, 1.0).is_finite());
            assert!(bce_grad(l, y, 1.0).is_finite());
        }
    }
    assert!((bce_with_logit(-1000.0, true, 1.0) - 1000.0).abs() < 1e-9);
}

fn small_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 8,
        dropout: 0.0,
        lr_peak: 1e-2,
        warmup: 5,
        max_epochs: 30,
        patience: 100,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let train_set = vec![random_batch(&mut rng, 2, 20), random_batch(&mut rng, 2, 20)];
    let val = vec![random_batch(&mut rng, 1, 20)];
    let config = TrainConfig { dropout: 0.3, max_epochs: 8, ..small_config(3) };
    let a = train(&config, &train_set, &val).unwrap();
    let b = train(&config, &train_set, &val).unwrap();
    assert_eq!(a.last.data(), b.last.data());
    assert_eq!(a.reports, b.reports);
}

#[test]
fn validation_data_never_updates_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let train_set = vec![random_batch(&mut rng, 3, 20)];
    let val_a = vec![random_batch(&mut rng, 2, 20)];
    let mut poisoned = val_a.clone();
    for item in &mut poisoned[0].items {
        item.examples.iter_mut().for_each(|e| {
            e.positive = !e.positive;
            e.weight *= 1e6;
        });
    }
    let config = TrainConfig { patience: 1000, ..small_config(5) };
    let a = train(&config, &train_set, &val_a).unwrap();
    let b = train(&config, &train_set, &poisoned).unwrap();
    assert_eq!(a.last.data(), b.last.data());
    assert_ne!(a.reports[0].val_loss, b.reports[0].val_loss);
}

#[test]
fn loss_decreases_on_a_small_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let train_set = vec![random_batch(&mut rng, 3, 16)];
    let config = TrainConfig { max_epochs: 150, ..small_config(2) };
    let r = train(&config, &train_set, &train_set).unwrap();
    let first = r.reports[0].train_loss;
    let last = r.reports.last().unwrap().train_loss;
    assert!(last < 0.5 * first, "{first} -> {last}");
}

#[test]
fn early_stopping_keeps_the_best_snapshot() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let train_set = vec![random_batch(&mut rng, 2, 20)];
    let val = vec![random_batch(&mut rng, 2, 20)];
    let config = TrainConfig { lr_peak: 0.2, warmup: 1, max_epochs: 60, patience: 5, ..small_config(1) };
    let r = train(&config, &train_set, &val).unwrap();
    let best = r.reports.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(r.reports[r.best_epoch - 1].val_loss, best);
    assert!((evaluate_loss(&r.best, &val) - best).abs() < 1e-12);
    if r.stopped_early {
        assert_eq!(r.reports.len(), r.best_epoch + 5);
    }
}

#[test]
fn empty_sets_and_bad_configs_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let b = vec![random_batch(&mut rng, 1, 10)];
    assert!(matches!(train(&small_config(0), &b, &[]), Err(TrainError::EmptyData)));
    let bad = TrainConfig { dropout: 1.0, ..small_config(0) };
    assert!(matches!(train(&bad, &b, &b), Err(TrainError::Config(_))));
}

#[test]
fn csv_report_has_one_row_per_epoch() {
    let reports = vec![
        EpochReport { epoch: 1, lr: 0.1, train_loss: 1.0, val_loss: 2.0, tpr: 0.5, tnr: 1.0 },
        EpochReport { epoch: 2, lr: 0.2, train_loss: 0.5, val_loss: 1.5, tpr: 1.0, tnr: 1.0 },
    ];
    assert_eq!(reports_csv(&reports), "epoch,lr,train_loss,val_loss,tpr,tnr\n1,0.1,1,2,0.5,1\n2,0.2,0.5,1.5,1,1\n");
}
