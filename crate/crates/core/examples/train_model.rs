//! Trains a model on proofs the baseline prover finds on a generated family, then
//! prints the per-epoch report and the confusion rates.

use guided_prover::guidance::SelectionScheme;
use guided_prover::harness::{bench, generate_family, prepare, Corpus, FamilyConfig, KeepLogs, LoopState};
use guided_prover::saturation::Limits;
use guided_prover::training::{collect_logits, confusion_rates, reports_csv, train, TrainConfig};

fn main() {
    let fam = generate_family(&FamilyConfig::default());
    let corpus =
        Corpus::from_texts(Some(fam.theory.clone()), fam.train.iter().map(|p| (p.name.clone(), p.text.clone())));
    let run = bench(&corpus, &SelectionScheme::base(), None, Limits::selections(200), KeepLogs::Solved);
    let state = LoopState::from_baseline(&run);
    println!("baseline solved {} of {}", state.proofs.len(), corpus.len());

    let config = TrainConfig {
        dim: 16,
        dropout: 0.1,
        lr_peak: 3e-3,
        warmup: 5,
        max_epochs: 40,
        patience: 1000,
        target_nodes: 50,
        ..TrainConfig::default()
    };
    let (train_set, val) = prepare(state.proofs.values(), config.target_nodes, config.split, config.seed).unwrap();
    println!("{} training batches, {} validation batches", train_set.len(), val.len());
    let result = train(&config, &train_set, &val).unwrap();
    print!("{}", reports_csv(&result.reports));

    let logits = collect_logits(&result.best, &val);
    let (tpr, tnr) = confusion_rates(&logits, 0.0);
    println!("best epoch {}: validation TPR {tpr:.3} TNR {tnr:.3}", result.best_epoch);
}
