//! The reinforcing loop: collect proofs, optionally mine failing baseline runs, train,
//! and evaluate the new model.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bench::{bench, BenchRun, Corpus, KeepLogs};
use super::HarnessError;
use crate::derivation::{read_log_file, write_log_file, DerivationStore};
use crate::guidance::SelectionScheme;
use crate::rvnn::ModelParams;
use crate::saturation::Limits;
use crate::training::{build_batches, train, MiniBatch, TrainConfig, TrainResult};

/// Solved problems with one stored proof derivation each.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LoopState {
    pub iteration: usize,
    pub baseline_solved: BTreeSet<String>,
    pub proofs: BTreeMap<String, DerivationStore>,
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    iteration: usize,
    baseline_solved: BTreeSet<String>,
    /// Problem name to log file, relative to the state file.
    proofs: BTreeMap<String, PathBuf>,
}

impl LoopState {
    /// Initial state from a baseline pass run with [`KeepLogs::Solved`] or
    /// [`KeepLogs::All`].
    pub fn from_baseline(run: &BenchRun) -> Self {
        let mut state = Self { baseline_solved: run.report.solved_set(), ..Self::default() };
        state.add_proofs(std::slice::from_ref(run));
        state
    }

    pub fn solved(&self) -> BTreeSet<String> {
        self.proofs.keys().cloned().collect()
    }

    /// Adds the first proof found for each unsolved problem, scanning runs in order;
    /// returns how many problems were added.
    pub fn add_proofs(&mut self, runs: &[BenchRun]) -> usize {
        let mut added = 0;
        for run in runs {
            for (name, store, solved) in &run.logs {
                if *solved && !self.proofs.contains_key(name) {
                    self.proofs.insert(name.clone(), store.clone());
                    added += 1;
                }
            }
        }
        added
    }

    /// Writes the state as JSON plus one `.dlog` per proof in `<stem>_logs/`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let path = path.as_ref();
        let dir = path.parent().unwrap_or(Path::new("."));
        let stem = path.file_stem().unwrap_or_default().to_string_lossy();
        let logs = PathBuf::from(format!("{stem}_logs"));
        fs::create_dir_all(dir.join(&logs)).map_err(|e| HarnessError::io(&dir.join(&logs), e))?;
        let mut proofs = BTreeMap::new();
        for (name, store) in &self.proofs {
            let rel = logs.join(format!("{name}.dlog"));
            write_log_file(store, dir.join(&rel)).map_err(|e| HarnessError::io(&dir.join(&rel), e))?;
            proofs.insert(name.clone(), rel);
        }
        let file = StateFile { iteration: self.iteration, baseline_solved: self.baseline_solved.clone(), proofs };
        let json = serde_json::to_string_pretty(&file).map_err(|e| HarnessError::Format(e.to_string()))?;
        fs::write(path, json).map_err(|e| HarnessError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let dir = path.parent().unwrap_or(Path::new("."));
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let file: StateFile = serde_json::from_str(&text).map_err(|e| HarnessError::Format(e.to_string()))?;
        let mut proofs = BTreeMap::new();
        for (name, rel) in file.proofs {
            let store = read_log_file(dir.join(&rel)).map_err(|e| HarnessError::Format(e.to_string()))?;
            proofs.insert(name, store);
        }
        Ok(Self { iteration: file.iteration, baseline_solved: file.baseline_solved, proofs })
    }
}

/// Training and validation batches from raw derivations: each is cut down to its
/// selected nodes and their ancestors, then compressed.
pub fn prepare<'a>(
    derivations: impl IntoIterator<Item = &'a DerivationStore>,
    target_nodes: usize,
    split: f64,
    seed: u64,
) -> Result<(Vec<MiniBatch>, Vec<MiniBatch>), HarnessError> {
    let compressed = derivations.into_iter().map(|d| d.selected_closure().compress()).collect();
    Ok(build_batches(compressed, target_nodes, split, seed)?)
}

/// Failing baseline derivations for the problems solved only with guidance. A baseline
/// run that succeeds contributes its proof derivation instead.
pub fn negative_mine(
    state: &LoopState,
    corpus: &Corpus,
    baseline: &SelectionScheme,
    limits: Limits,
) -> Vec<DerivationStore> {
    let targets: BTreeSet<String> = state.solved().difference(&state.baseline_solved).cloned().collect();
    let run = bench(&corpus.subset(&targets), baseline, None, limits, KeepLogs::All);
    run.logs
        .into_iter()
        .map(|(name, store, solved)| {
            if solved {
                log::info!("baseline unexpectedly solved `{name}`; using its proof derivation");
            }
            store
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct LoopConfig {
    /// Schemes run on the training corpus to collect proofs, in priority order.
    pub schemes: Vec<SelectionScheme>,
    pub train: TrainConfig,
    pub limits: Limits,
    /// Baseline scheme for negative mining; `None` runs the plain loop.
    pub mine: Option<SelectionScheme>,
    /// Scheme used to evaluate the new model.
    pub evaluate: SelectionScheme,
}

#[derive(Clone, Debug)]
pub struct IterationOutcome {
    pub model: Arc<ModelParams>,
    pub training: TrainResult,
    pub new_proofs: usize,
    pub mined: usize,
    /// The new model on the evaluation corpus, when one was given.
    pub evaluation: Option<BenchRun>,
}

/// One loop iteration: collect proofs with `model`, mine if configured, train a fresh
/// model on all stored proofs, and bench it.
pub fn loop_iteration(
    state: &mut LoopState,
    corpus: &Corpus,
    eval_corpus: Option<&Corpus>,
    model: Option<Arc<ModelParams>>,
    config: &LoopConfig,
) -> Result<IterationOutcome, HarnessError> {
    let runs: Vec<BenchRun> = config
        .schemes
        .iter()
        .filter(|s| model.is_some() || !s.variant.uses_model())
        .map(|s| bench(corpus, s, model.clone(), config.limits, KeepLogs::Solved))
        .collect();
    let new_proofs = state.add_proofs(&runs);
    let mut data: Vec<DerivationStore> = state.proofs.values().cloned().collect();
    let mined = match &config.mine {
        Some(base) => {
            let logs = negative_mine(state, corpus, base, config.limits);
            let n = logs.len();
            data.extend(logs);
            n
        }
        None => 0,
    };
    let (train_set, val) = prepare(&data, config.train.target_nodes, config.train.split, config.train.seed)?;
    let training = train(&config.train, &train_set, &val)?;
    let new_model = Arc::new(training.best.clone());
    let evaluation =
        eval_corpus.map(|c| bench(c, &config.evaluate, Some(new_model.clone()), config.limits, KeepLogs::None));
    state.iteration += 1;
    Ok(IterationOutcome { model: new_model, training, new_proofs, mined, evaluation })
}
