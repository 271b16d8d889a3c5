use std::collections::BTreeSet;
use std::sync::Arc;

use super::*;
use crate::guidance::SelectionScheme;
use crate::rvnn::ModelParams;
use crate::saturation::Limits;
use crate::training::{vocabulary, TrainConfig};

fn small_family(seed: u64) -> Family {
    generate_family(&FamilyConfig { problems: 12, max_chain: 6, seed, ..FamilyConfig::default() })
}

fn corpora(f: &Family) -> (Corpus, Corpus) {
    let c = |ps: &[GeneratedProblem]| {
        Corpus::from_texts(Some(f.theory.clone()), ps.iter().map(|p| (p.name.clone(), p.text.clone())))
    };
    (c(&f.train), c(&f.heldout))
}

fn limits() -> Limits {
    Limits::selections(200)
}

fn result(problem: &str, solved: bool) -> ProblemResult {
    ProblemResult {
        problem: problem.into(),
        status: if solved { "refutation" } else { "limit" }.into(),
        selections: 3,
        generated: 7,
        model_evals: 2,
        cache_hits: 1,
        eval_time_fraction: 0.25,
        elapsed_ms: 4.0,
        model_time_ms: 1.0,
        error: String::new(),
    }
}

fn report(all: &[&str], solved: &[&str]) -> BenchmarkReport {
    BenchmarkReport { results: all.iter().map(|p| result(p, solved.contains(p))).collect() }
}

fn untrained_model(state: &LoopState) -> Arc<ModelParams> {
    let (origins, rules) = vocabulary(state.proofs.values());
    Arc::new(ModelParams::init(8, origins, rules, 1))
}

#[test]
fn bench_is_deterministic_and_baseline_has_no_model_time() {
    let (train, _) = corpora(&small_family(3));
    let a = bench(&train, &SelectionScheme::base(), None, limits(), KeepLogs::None).report;
    let b = bench(&train, &SelectionScheme::base(), None, limits(), KeepLogs::None).report;
    assert_eq!(a.results.len(), train.len());
    for (x, y) in a.results.iter().zip(&b.results) {
        assert_eq!(
            (&x.problem, &x.status, x.selections, x.generated),
            (&y.problem, &y.status, y.selections, y.generated)
        );
        assert_eq!(x.model_evals, 0);
        assert_eq!(x.model_time_ms, 0.0);
    }
    assert_eq!(a.eval_time_fraction(), 0.0);
    let d = diff(&a, &a).unwrap();
    assert!(d.gained.is_empty() && d.lost.is_empty());
}

#[test]
fn diff_counts_gained_and_lost() {
    let all = ["a", "b", "c", "d", "e"];
    let base = report(&all, &["a", "b", "c"]);
    let new = report(&all, &["b", "c", "d", "e"]);
    let d = diff(&new, &base).unwrap();
    assert_eq!(d.gained, BTreeSet::from(["d".to_string(), "e".to_string()]));
    assert_eq!(d.lost, BTreeSet::from(["a".to_string()]));
    assert!((d.percent - 400.0 / 3.0).abs() < 1e-9);
    assert_eq!(d.solved, d.baseline_solved + d.gained.len() - d.lost.len());
}

#[test]
fn diff_edge_cases() {
    let all = ["a", "b"];
    assert_eq!(diff(&report(&all, &[]), &report(&all, &[])).unwrap().percent, 100.0);
    assert_eq!(diff(&report(&all, &["a"]), &report(&all, &[])).unwrap().percent, f64::INFINITY);
    assert!(matches!(diff(&report(&all, &[]), &report(&["a"], &[])), Err(HarnessError::CorpusMismatch)));
}

#[test]
fn report_csv_round_trip() {
    let r = report(&["p1", "p2", "p3"], &["p2"]);
    let back = BenchmarkReport::from_csv(&r.to_csv().unwrap()).unwrap();
    assert_eq!(back, r);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    r.save(&path).unwrap();
    assert_eq!(BenchmarkReport::load(&path).unwrap(), r);
    assert!(BenchmarkReport::from_csv("problem,status\nx,refutation\n").is_err());
}

#[test]
fn unreadable_or_broken_problems_are_error_outcomes() {
    let mut corpus = Corpus::from_texts(None, [("bad".to_string(), "cnf(x, axiom, p(".to_string())]);
    corpus.problems.push(CorpusProblem { name: "gone".into(), text: None });
    let run = bench(&corpus, &SelectionScheme::base(), None, limits(), KeepLogs::All);
    assert_eq!(run.report.results.len(), 2);
    assert!(run.report.results.iter().all(|r| r.status == "error" && !r.error.is_empty()));
    assert!(run.logs.is_empty());
    assert_eq!(run.report.summary(None).unwrap().errors, 2);
}

#[test]
fn corpus_load_reads_written_family() {
    let f = small_family(5);
    let dir = tempfile::tempdir().unwrap();
    f.write(dir.path()).unwrap();
    let c = Corpus::load(dir.path().join("heldout"), Some(&dir.path().join("theory.p"))).unwrap();
    assert_eq!(c.len(), f.heldout.len());
    assert_eq!(c.theory.as_deref(), Some(f.theory.as_str()));
    assert_eq!(c.names(), f.heldout.iter().map(|p| p.name.clone()).collect());
}

#[test]
fn family_is_deterministic_and_split_by_parity() {
    let a = small_family(9);
    assert_eq!(a, small_family(9));
    assert_ne!(a, small_family(10));
    assert_eq!(a.train.len(), 6);
    assert_eq!(a.heldout.len(), 6);
    for p in &a.train {
        let i: usize = p.name[3..].parse().unwrap();
        assert_eq!(i % 2, 0);
        assert!((2..=6).contains(&p.chain));
    }
    let (train, _) = corpora(&a);
    for p in &train.problems {
        train.parse(p).unwrap();
    }
}

#[test]
fn loop_state_round_trip_and_monotone() {
    let (train, _) = corpora(&small_family(2));
    let run = bench(&train, &SelectionScheme::base(), None, limits(), KeepLogs::Solved);
    let mut state = LoopState::from_baseline(&run);
    assert_eq!(state.solved(), run.report.solved_set());
    assert_eq!(state.baseline_solved, run.report.solved_set());
    let before = state.proofs.clone();
    assert_eq!(state.add_proofs(std::slice::from_ref(&run)), 0);
    assert_eq!(state.proofs, before);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    state.iteration = 4;
    state.save(&path).unwrap();
    let back = LoopState::load(&path).unwrap();
    assert_eq!(back.iteration, 4);
    assert_eq!(back.baseline_solved, state.baseline_solved);
    assert_eq!(back.solved(), state.solved());
    for (name, store) in &state.proofs {
        let other = &back.proofs[name];
        assert_eq!(other.len(), store.len());
        assert_eq!(other.positive_count(), store.positive_count());
    }
}

#[test]
fn first_proof_wins() {
    let (train, _) = corpora(&small_family(2));
    let age = bench(&train, &SelectionScheme::pure_age(), None, limits(), KeepLogs::Solved);
    let base = bench(&train, &SelectionScheme::base(), None, limits(), KeepLogs::Solved);
    let mut state = LoopState::default();
    state.add_proofs(&[age.clone(), base.clone()]);
    for (name, store, _) in &age.logs {
        assert_eq!(state.proofs[name].len(), store.len());
    }
    let union: BTreeSet<String> = age.report.solved_set().union(&base.report.solved_set()).cloned().collect();
    assert_eq!(state.solved(), union);
}

#[test]
fn mined_logs_are_all_negative() {
    let (train, _) = corpora(&small_family(2));
    let run = bench(&train, &SelectionScheme::base(), None, limits(), KeepLogs::Solved);
    let mut state = LoopState::from_baseline(&run);
    assert!(!state.proofs.is_empty());
    let tight = Limits::selections(3);
    state.baseline_solved.clear();
    let mined = negative_mine(&state, &train, &SelectionScheme::base(), tight);
    assert_eq!(mined.len(), state.proofs.len());
    for m in &mined {
        assert_eq!(m.positive_count(), 0);
        assert!(m.negative_count() > 0);
    }
    let plain = prepare(state.proofs.values(), 50, 0.8, 0).unwrap();
    let with: Vec<_> = state.proofs.values().cloned().chain(mined).collect();
    let mined_sets = prepare(&with, 50, 0.8, 0).unwrap();
    let negatives = |(t, v): &(Vec<crate::training::MiniBatch>, Vec<crate::training::MiniBatch>)| -> usize {
        t.iter().chain(v).flat_map(|b| &b.items).map(|i| i.derivation.store().negative_count()).sum()
    };
    assert!(negatives(&mined_sets) > negatives(&plain));
}

#[test]
fn loop_iteration_without_new_proofs_keeps_the_state() {
    let (train, heldout) = corpora(&small_family(6));
    let run = bench(&train, &SelectionScheme::base(), None, limits(), KeepLogs::Solved);
    let mut state = LoopState::from_baseline(&run);
    let config = LoopConfig {
        schemes: vec![SelectionScheme::base()],
        train: TrainConfig { dim: 8, max_epochs: 3, target_nodes: 30, ..TrainConfig::default() },
        limits: limits(),
        mine: None,
        evaluate: SelectionScheme::layered(1, 2),
    };
    let solved = state.solved();
    let out = loop_iteration(&mut state, &train, Some(&heldout), None, &config).unwrap();
    assert_eq!(out.new_proofs, 0);
    assert_eq!(out.mined, 0);
    assert_eq!(state.solved(), solved);
    assert_eq!(state.iteration, 1);
    let eval = out.evaluation.unwrap().report;
    assert_eq!(eval.problems(), heldout.names());
    assert!(eval.model_evals() > 0);
}

#[test]
fn sweep_gives_one_row_per_threshold() {
    let (train, heldout) = corpora(&small_family(7));
    let state = LoopState::from_baseline(&bench(&train, &SelectionScheme::base(), None, limits(), KeepLogs::Solved));
    let model = untrained_model(&state);
    let baseline = bench(&heldout, &SelectionScheme::base(), None, limits(), KeepLogs::None).report;
    let ts = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let rows =
        sweep_threshold(&heldout, &SelectionScheme::layered(1, 2), model, &ts, limits(), Some(&baseline)).unwrap();
    assert_eq!(rows.len(), 5);
    for (r, t) in rows.iter().zip(ts) {
        assert_eq!(r.threshold, t);
        assert!(r.percent.is_some());
        assert_eq!(r.solved, baseline.solved() + r.gained.unwrap() - r.lost.unwrap());
    }
    let csv = sweep_csv(&rows);
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("threshold,solved,percent,gained,lost,model_evals\n"));
}
