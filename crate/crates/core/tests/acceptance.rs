//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use guided_prover::derivation::{random_derivation, CompressedDerivation, DerivationStore, Label, NodeId, RandomDag};
use guided_prover::guidance::{LogitSource, PassiveEntry, PassiveStore, SelectionScheme, Source};
use guided_prover::harness::{
    bench, generate_family, loop_iteration, Corpus, Family, FamilyConfig, KeepLogs, LoopConfig, LoopState,
};
use guided_prover::rvnn::{
    deriv_embed, eval_logit, forward_dag, forward_dag_cached, EmbeddingCache, EvalStats, Mode, ModelParams, RuleSig,
};
use guided_prover::saturation::{saturate, Limits};
use guided_prover::training::{
    build_batches, collect_logits, confusion_rates, evaluate_loss, initial_params, loss, loss_and_grad, pack, roc,
    roc_thresholds, train_from, vocabulary, weighted_items, MiniBatch, TrainConfig,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    check(start.elapsed() < limit, format!("took {:?}, limit {limit:?}", start.elapsed()))
}

// ---- gradient oracle ----

fn has_shared_subdag(s: &DerivationStore) -> bool {
    let mut uses = vec![0usize; s.len()];
    for n in s.nodes() {
        for p in &n.premises {
            uses[p.index()] += 1;
        }
    }
    s.nodes().iter().any(|n| !n.is_leaf() && uses[n.id.index()] >= 2)
}

fn depth_of(s: &DerivationStore) -> usize {
    let mut d = vec![0usize; s.len()];
    for n in s.nodes() {
        d[n.id.index()] = n.premises.iter().map(|p| d[p.index()] + 1).max().unwrap_or(0);
    }
    d.into_iter().max().unwrap_or(0)
}

fn fd_max_rel_error(params: &ModelParams, batch: &MiniBatch, mode: Mode, h: f64) -> f64 {
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
        worst = worst.max((grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(1e-6));
    }
    worst
}

fn gradient_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = RandomDag { size: 16, max_depth: 6, wide_rules: true, ..RandomDag::default() };
    let mut worst: f64 = 0.0;
    let mut dags = 0;
    while dags < 20 {
        let d = random_derivation(&mut rng, &format!("g{dags}"), &cfg);
        if !has_shared_subdag(&d) {
            continue;
        }
        check(depth_of(&d) <= 6, "depth above 6")?;
        let batch = MiniBatch { items: weighted_items(vec![d.compress()]) };
        let config = TrainConfig { dim: 8, seed: dags, ..TrainConfig::default() };
        let p = initial_params(&config, &[std::slice::from_ref(&batch)]);
        worst = worst.max(fd_max_rel_error(&p, &batch, Mode::Infer, 1e-6));
        worst = worst.max(fd_max_rel_error(&p, &batch, Mode::Train { dropout: 0.3, seed: dags }, 1e-6));
        dags += 1;
    }
    check(worst < 1e-4, format!("max relative error {worst:.3e}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{dags} DAGs, max relative error {worst:.2e}, {:?}", start.elapsed()))
}

// ---- straight-line forward oracle ----

fn naive_deriv(p: &ModelParams, rule: usize, x: &[f64]) -> Vec<f64> {
    let r = &p.layout().rules[rule];
    let d = p.data();
    let n = p.dim();
    let k = x.len();
    let mut h = vec![0.0; 2 * n];
    for (i, hi) in h.iter_mut().enumerate() {
        let mut s = d[r.b1.start + i];
        for j in 0..k {
            s += d[r.w1.start + i * k + j] * x[j];
        }
        *hi = s.max(0.0);
    }
    let mut y = vec![0.0; n];
    for (i, yi) in y.iter_mut().enumerate() {
        let mut s = d[r.b2.start + i];
        for j in 0..2 * n {
            s += d[r.w2.start + i * 2 * n + j] * h[j];
        }
        *yi = s;
    }
    let mu = y.iter().sum::<f64>() / n as f64;
    let var = y.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64;
    (0..n).map(|i| d[r.gamma.start + i] * (y[i] - mu) / (var + p.ln_eps()).sqrt() + d[r.beta.start + i]).collect()
}

fn naive_eval(p: &ModelParams, v: &[f64]) -> f64 {
    let e = &p.layout().eval;
    let d = p.data();
    let n = p.dim();
    let mut out = d[e.c];
    for i in 0..n {
        let mut s = d[e.b.start + i];
        for j in 0..n {
            s += d[e.w1.start + i * n + j] * v[j];
        }
        out += d[e.w2.start + i] * s.max(0.0);
    }
    out
}

fn forward_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let dim = rng.gen_range(2..=12);
        let rules = vec![RuleSig::new("Factoring", 1), RuleSig::new("Resolution", 2)];
        let mut p = ModelParams::init(dim, vec!["input".into()], rules, k);
        for x in p.data_mut() {
            *x = rng.gen_range(-1.5..1.5);
        }
        let rule = rng.gen_range(0..2);
        let arity = p.layout().rules[rule].arity;
        let kids: Vec<Vec<f64>> = (0..arity).map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let refs: Vec<&[f64]> = kids.iter().map(|v| &v[..]).collect();
        let fast = deriv_embed(&p, rule, &refs);
        let slow = naive_deriv(&p, rule, &kids.concat());
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
        worst = worst.max((eval_logit(&p, &fast) - naive_eval(&p, &fast)).abs());
    }
    check(worst <= 1e-12, format!("max abs difference {worst:.3e}"))?;
    Ok(format!("100 instances, max abs difference {worst:.2e}"))
}

// ---- lazy/eager equivalence ----

fn corpus(f: &Family, heldout: bool) -> Corpus {
    let ps = if heldout { &f.heldout } else { &f.train };
    Corpus::from_texts(Some(f.theory.clone()), ps.iter().map(|p| (p.name.clone(), p.text.clone())))
}

fn lazy_eager() -> Outcome {
    let fam = generate_family(&FamilyConfig { problems: 60, seed: 11, ..FamilyConfig::default() });
    let limits = Limits::selections(200);
    let all: Vec<_> = fam.train.iter().chain(&fam.heldout).map(|p| (p.name.clone(), p.text.clone())).collect();
    let corpus = Corpus::from_texts(Some(fam.theory.clone()), all);
    let base = bench(&corpus, &SelectionScheme::base(), None, limits, KeepLogs::All);
    let (origins, rules) = vocabulary(base.logs.iter().map(|(_, s, _)| s));
    let model = Arc::new(ModelParams::init(8, origins, rules, 3));
    let mut fewer = 0;
    for p in &corpus.problems {
        let (_, input) = corpus.parse(p)?;
        let scheme = SelectionScheme::layered(1, 2);
        let lazy = saturate(&p.name, &input, &scheme.clone().with_lazy(true), Some(model.clone()), limits)
            .map_err(|e| e.to_string())?;
        let eager = saturate(&p.name, &input, &scheme.with_lazy(false), Some(model.clone()), limits)
            .map_err(|e| e.to_string())?;
        check(lazy.selection_order == eager.selection_order, format!("{}: selection sequences differ", p.name))?;
        check(lazy.status == eager.status, format!("{}: statuses differ", p.name))?;
        check(
            lazy.stats.model_evals <= eager.stats.model_evals,
            format!("{}: lazy {} > eager {} evals", p.name, lazy.stats.model_evals, eager.stats.model_evals),
        )?;
        if lazy.stats.model_evals < eager.stats.model_evals {
            fewer += 1;
        }
    }
    check(fewer >= 1, "lazy never saved an evaluation")?;
    Ok(format!("{} problems identical, lazy strictly cheaper on {fewer}", corpus.len()))
}

// ---- cache and compression transparency ----

fn unfolded(s: &DerivationStore, id: NodeId) -> String {
    let n = s.node(id);
    match &n.label {
        Label::Origin(o) => o.to_string(),
        Label::Rule(r) => {
            let kids: Vec<String> = n.premises.iter().map(|&c| unfolded(s, c)).collect();
            format!("{r}[{}]", kids.join(";"))
        }
    }
}

fn cache_compression() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cfg = RandomDag { size: 40, max_depth: 8, leaves: 5, wide_rules: true, ..RandomDag::default() };
    let mut pairs = 0usize;
    for k in 0..15 {
        let s = random_derivation(&mut rng, "c", &cfg);
        let (origins, rules) = vocabulary([&s]);
        let p = Arc::new(ModelParams::init(6, origins, rules, k));

        let comp = s.compress();
        check(comp.compress() == comp, "compress is not idempotent")?;
        let raw = forward_dag(&p, &s, Mode::Infer);
        let cf = forward_dag(&p, &comp, Mode::Infer);
        let mut reps: HashMap<_, NodeId> = HashMap::new();
        for n in s.nodes() {
            let next = NodeId(reps.len() as u32);
            let rep = *reps.entry(s.fingerprint(n.id)).or_insert(next);
            check(cf.embedding(rep) == raw.embedding(n.id), "compression changed an embedding")?;
        }
        let comp_logits: HashMap<NodeId, f64> = cf.logits().into_iter().collect();
        for (id, l) in raw.logits() {
            check(comp_logits[&reps[&s.fingerprint(id)]] == l, "compression changed a logit")?;
        }

        let uncached = forward_dag_cached(p.clone(), &s, None);
        let mut cache = EmbeddingCache::new();
        let first = forward_dag_cached(p.clone(), &s, Some(&mut cache));
        let second = forward_dag_cached(p.clone(), &s, Some(&mut cache));
        check(uncached.logits == raw.logits(), "evaluator differs from the DAG pass")?;
        check(first.logits == uncached.logits && second.logits == uncached.logits, "cache changed a logit")?;

        let trees: Vec<String> = s.nodes().iter().map(|n| unfolded(&s, n.id)).collect();
        for a in s.nodes() {
            for b in s.nodes() {
                let same_fp = s.fingerprint(a.id) == s.fingerprint(b.id);
                check(
                    same_fp == (trees[a.id.index()] == trees[b.id.index()]),
                    "fingerprint disagrees with tree oracle",
                )?;
                pairs += 1;
            }
        }
    }
    Ok(format!("15 DAGs, {pairs} fingerprint pairs checked"))
}

// ---- ratio exactness ----

struct AlwaysPositive(usize);

impl LogitSource for AlwaysPositive {
    fn logit(&mut self, _: &DerivationStore, _: NodeId) -> f64 {
        self.0 += 1;
        1.0
    }

    fn stats(&self) -> EvalStats {
        EvalStats { logit_evals: self.0, ..EvalStats::default() }
    }
}

fn ratio_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let scheme = SelectionScheme::layered(1, 2);
    let mut p = PassiveStore::new(&scheme, Some(Box::new(AlwaysPositive(0))), 0.0).map_err(|e| e.to_string())?;
    let mut store = DerivationStore::new("ratio");
    for i in 0..4000u64 {
        let node = store.record(Label::origin("input"), &[]).map_err(|e| e.to_string())?;
        p.insert(&store, PassiveEntry { id: i, age: i, weight: rng.gen_range(1..50), node });
    }
    let mut counts: HashMap<Source, usize> = HashMap::new();
    for period in 0..100 {
        let mut local: HashMap<Source, usize> = HashMap::new();
        for _ in 0..33 {
            let s = p.select_next(&store).ok_or("passive set ran dry")?;
            check(!s.fallback, "unexpected fallback")?;
            *local.entry(s.source).or_default() += 1;
        }
        let got = |s| local.get(&s).copied().unwrap_or(0);
        check(
            (got(Source::Age), got(Source::Weight), got(Source::ModelAge), got(Source::ModelWeight)) == (1, 10, 2, 20),
            format!("period {period}: {local:?}"),
        )?;
        for (k, v) in local {
            *counts.entry(k).or_default() += v;
        }
    }
    let c = |s| counts.get(&s).copied().unwrap_or(0);
    let base = c(Source::Age) + c(Source::Weight);
    let model = c(Source::ModelAge) + c(Source::ModelWeight);
    check(
        (base, c(Source::Age), c(Source::Weight), model, c(Source::ModelAge), c(Source::ModelWeight))
            == (1100, 100, 1000, 2200, 200, 2000),
        format!("{counts:?}"),
    )?;
    Ok("3300 selections: base 1100 (100 age, 1000 weight), model 2200 (200 age, 2000 weight)".into())
}

// ---- overfit capability ----

/// Positive exactly when no theory axiom is among the node's ancestors.
fn toy_derivation(rng: &mut ChaCha8Rng, k: usize) -> DerivationStore {
    let cfg = RandomDag { size: 24, max_depth: 5, ..RandomDag::default() };
    let mut s = random_derivation(rng, &format!("toy{k}"), &cfg);
    let mut thax = vec![false; s.len()];
    for n in s.nodes() {
        thax[n.id.index()] = match &n.label {
            Label::Origin(o) => o.starts_with("thax"),
            Label::Rule(_) => n.premises.iter().any(|p| thax[p.index()]),
        };
    }
    let ids: Vec<NodeId> = s.nodes().iter().filter(|n| n.selected).map(|n| n.id).collect();
    for id in ids {
        s.set_in_proof(id, !thax[id.index()]);
    }
    s
}

fn overfit() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut derivs = Vec::new();
    while derivs.len() < 5 {
        let d = toy_derivation(&mut rng, derivs.len());
        if d.positive_count() > 0 && d.negative_count() > 0 {
            derivs.push(d);
        }
    }
    let batches: Vec<MiniBatch> = weighted_items(derivs.iter().map(|d| d.compress()).collect())
        .into_iter()
        .map(|i| MiniBatch { items: vec![i] })
        .collect();
    let config = TrainConfig {
        dim: 16,
        dropout: 0.0,
        lr_peak: 1e-2,
        warmup: 250,
        max_epochs: 500,
        patience: 1000,
        ..TrainConfig::default()
    };
    let p = initial_params(&config, &[&batches]);
    let result = train_from(&config, p, &batches, &batches).map_err(|e| e.to_string())?;
    let model = &result.last;
    let logits = collect_logits(model, &batches);
    let (tpr, tnr) = confusion_rates(&logits, 0.0);
    let l = evaluate_loss(model, &batches);
    check(result.reports.len() == 500, format!("ran {} epochs", result.reports.len()))?;
    check(tpr == 1.0 && tnr == 1.0, format!("TPR {tpr} TNR {tnr}"))?;
    check(l < 0.05, format!("loss {l}"))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("TPR {tpr} TNR {tnr} loss {l:.4}, {:?}", start.elapsed()))
}

// ---- data-prep counts ----

fn data_prep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let small = RandomDag { size: 10, ..RandomDag::default() };
    let derivs: Vec<_> = (0..412).map(|i| random_derivation(&mut rng, &format!("d{i}"), &small).compress()).collect();
    let (train, val) = build_batches(derivs, 1, 0.8, 0).map_err(|e| e.to_string())?;
    check((train.len(), val.len()) == (330, 82), format!("split {}/{}", train.len(), val.len()))?;

    let big_cfg = RandomDag { size: 6426, max_depth: 400, leaves: 40, ..RandomDag::default() };
    let big = random_derivation(&mut rng, "big", &big_cfg);
    check(big.len() == 6426, format!("big derivation has {} nodes", big.len()))?;
    let mut derivs = vec![random_derivation(&mut rng, "a", &small)];
    derivs.push(big);
    derivs.push(random_derivation(&mut rng, "b", &small));
    let items = weighted_items(derivs.into_iter().map(CompressedDerivation::from_store_unchecked).collect());
    let batches = pack(items, 1000);
    let holder: Vec<&MiniBatch> =
        batches.iter().filter(|b| b.items.iter().any(|i| i.derivation.problem() == "big")).collect();
    check(holder.len() == 1 && holder[0].items.len() == 1, "6426-node derivation is not alone in its batch")?;
    Ok(format!("412 batches split 330/82; 6426-node derivation packed alone among {} batches", batches.len()))
}

// ---- end-to-end and mining ----

struct SeedRun {
    base: usize,
    layered: usize,
    layered_neg: usize,
    plain: usize,
    mined: usize,
    mined_runs: usize,
}

fn train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 16,
        dropout: 0.1,
        lr_peak: 3e-3,
        warmup: 5,
        max_epochs: 80,
        patience: 1000,
        target_nodes: 50,
        seed,
        ..TrainConfig::default()
    }
}

fn seed_run(seed: u64) -> Result<SeedRun, String> {
    let fam = generate_family(&FamilyConfig { seed, ..FamilyConfig::default() });
    let (train, heldout) = (corpus(&fam, false), corpus(&fam, true));
    let limits = Limits::selections(200);
    let baseline = bench(&train, &SelectionScheme::base(), None, limits, KeepLogs::Solved);
    let layered = SelectionScheme::layered(1, 2).with_threshold(0.0);
    let config =
        |schemes, mine| LoopConfig { schemes, train: train_config(seed), limits, mine, evaluate: layered.clone() };
    let e = |e: guided_prover::harness::HarnessError| e.to_string();
    let solved = |out: &guided_prover::harness::IterationOutcome| {
        out.evaluation.as_ref().map(|r| r.report.solved()).unwrap_or(0)
    };

    let mut state = LoopState::from_baseline(&baseline);
    let first = loop_iteration(&mut state, &train, Some(&heldout), None, &config(vec![SelectionScheme::base()], None))
        .map_err(e)?;
    let neg = layered.clone().with_threshold(-0.25);
    let layered_neg = bench(&heldout, &neg, Some(first.model.clone()), limits, KeepLogs::None).report.solved();

    // Second round: collect with the first model, then retrain with and without mining.
    let collect = vec![layered.clone(), SelectionScheme::base()];
    let mut plain_state = state.clone();
    let plain = loop_iteration(
        &mut plain_state,
        &train,
        Some(&heldout),
        Some(first.model.clone()),
        &config(collect.clone(), None),
    )
    .map_err(e)?;
    let mut mining_state = state;
    let mined = loop_iteration(
        &mut mining_state,
        &train,
        Some(&heldout),
        Some(first.model.clone()),
        &config(collect, Some(SelectionScheme::base())),
    )
    .map_err(e)?;

    let base = bench(&heldout, &SelectionScheme::base(), None, limits, KeepLogs::None).report.solved();
    Ok(SeedRun {
        base,
        layered: solved(&first),
        layered_neg,
        plain: solved(&plain),
        mined: solved(&mined),
        mined_runs: mined.mined,
    })
}

fn end_to_end(runs: &[SeedRun], elapsed: Duration) -> Outcome {
    let good = runs.iter().filter(|r| 10 * r.layered >= 11 * r.base && r.layered_neg >= r.layered).count();
    let detail: Vec<String> =
        runs.iter().map(|r| format!("base {} lay {} lay-0.25 {}", r.base, r.layered, r.layered_neg)).collect();
    check(good >= 4, format!("{good}/5 seeds: {}", detail.join("; ")))?;
    check(elapsed < Duration::from_secs(600), format!("took {elapsed:?}"))?;
    Ok(format!("{good}/5 seeds [{}], {elapsed:?}", detail.join("; ")))
}

fn mining(runs: &[SeedRun]) -> Outcome {
    let good = runs.iter().filter(|r| r.mined_runs > 0 && r.mined >= r.plain).count();
    let detail: Vec<String> =
        runs.iter().map(|r| format!("plain {} mined {} ({} runs mined)", r.plain, r.mined, r.mined_runs)).collect();
    check(good >= 3, format!("{good}/5 seeds: {}", detail.join("; ")))?;
    Ok(format!("{good}/5 seeds [{}]", detail.join("; ")))
}

// ---- ROC ----

fn roc_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..20 {
        let n = rng.gen_range(5..60);
        let logits: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let pos = rng.gen_bool(0.4);
                let x: f64 = rng.gen_range(-3.0..3.0);
                ((x * 4.0).round() / 4.0 + if pos { 0.5 } else { 0.0 }, pos)
            })
            .collect();
        let points = roc(&logits, &roc_thresholds(&logits));
        for w in points.windows(2) {
            check(w[0].threshold < w[1].threshold, "thresholds not increasing")?;
            check(w[1].tpr <= w[0].tpr, format!("trial {trial}: TPR increased"))?;
            check(w[1].tnr >= w[0].tnr, format!("trial {trial}: TNR decreased"))?;
        }
        let has_pos = logits.iter().any(|l| l.1);
        let has_neg = logits.iter().any(|l| !l.1);
        let (first, last) = (points[0], points[points.len() - 1]);
        check(first.threshold == f64::NEG_INFINITY && last.threshold == f64::INFINITY, "missing infinite endpoints")?;
        if has_pos && has_neg {
            check((first.tpr, first.tnr) == (1.0, 0.0), format!("at -inf: {first:?}"))?;
            check((last.tpr, last.tnr) == (0.0, 1.0), format!("at +inf: {last:?}"))?;
        }
    }
    Ok("20 random score sets".into())
}

fn main() {
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(msg) => println!("PASS  {name}: {msg}"),
        Err(msg) => {
            failed += 1;
            println!("FAIL  {name}: {msg}");
        }
    };
    report("gradient oracle", gradient_oracle());
    report("forward oracle", forward_oracle());
    report("lazy/eager equivalence", lazy_eager());
    report("cache and compression transparency", cache_compression());
    report("ratio exactness", ratio_exactness());
    report("overfit capability", overfit());
    report("data-prep counts", data_prep());
    let start = Instant::now();
    let runs: Result<Vec<SeedRun>, String> = (0..5).map(seed_run).collect();
    let elapsed = start.elapsed();
    match runs {
        Ok(runs) => {
            report("end-to-end direction", end_to_end(&runs, elapsed));
            report("negative-mining direction", mining(&runs));
        }
        Err(e) => {
            report("end-to-end direction", Err(e.clone()));
            report("negative-mining direction", Err(e));
        }
    }
    report("ROC properties", roc_properties());
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
