//! Two rounds of the reinforcing loop on a generated family. The first trains on
//! baseline proofs; the second collects with that model and adds mined failing runs.

use guided_prover::guidance::SelectionScheme;
use guided_prover::harness::{
    bench, diff, generate_family, loop_iteration, Corpus, FamilyConfig, KeepLogs, LoopConfig, LoopState,
};
use guided_prover::saturation::Limits;
use guided_prover::training::TrainConfig;

fn main() {
    let fam = generate_family(&FamilyConfig { seed: 1, ..FamilyConfig::default() });
    let corpus = |ps: &[guided_prover::harness::GeneratedProblem]| {
        Corpus::from_texts(Some(fam.theory.clone()), ps.iter().map(|p| (p.name.clone(), p.text.clone())))
    };
    let (train, heldout) = (corpus(&fam.train), corpus(&fam.heldout));
    let limits = Limits::selections(200);

    let baseline = bench(&train, &SelectionScheme::base(), None, limits, KeepLogs::Solved);
    let mut state = LoopState::from_baseline(&baseline);
    let mut config = LoopConfig {
        schemes: vec![SelectionScheme::base()],
        train: TrainConfig {
            dim: 16,
            dropout: 0.1,
            lr_peak: 3e-3,
            warmup: 5,
            max_epochs: 80,
            patience: 1000,
            target_nodes: 50,
            ..TrainConfig::default()
        },
        limits,
        mine: None,
        evaluate: SelectionScheme::layered(1, 2),
    };
    let first = loop_iteration(&mut state, &train, Some(&heldout), None, &config).unwrap();
    println!("round 1: {} proofs", state.proofs.len());

    config.schemes.insert(0, SelectionScheme::layered(1, 2));
    config.mine = Some(SelectionScheme::base());
    let out = loop_iteration(&mut state, &train, Some(&heldout), Some(first.model), &config).unwrap();
    println!("round 2: {} new proofs, {} proofs plus {} mined runs", out.new_proofs, state.proofs.len(), out.mined);

    let guided = out.evaluation.unwrap().report;
    let base = bench(&heldout, &SelectionScheme::base(), None, limits, KeepLogs::None).report;
    let d = diff(&guided, &base).unwrap();
    println!("held-out: base {} guided {} ({:.0}%)", d.baseline_solved, d.solved, d.percent);
    println!("gained {:?}", d.gained);
    println!("lost {:?}", d.lost);
    println!("model evals {}, eval time fraction {:.3}", guided.model_evals(), guided.eval_time_fraction());
}
