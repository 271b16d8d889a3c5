use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::backprop::{batch_logits, loss, loss_and_grad};
use super::data::{vocabulary, MiniBatch};
use super::metrics::confusion_rates;
use super::optim::{adam_step, lr_schedule, AdamConfig, AdamState, EarlyStopping};
use crate::rvnn::{Mode, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    pub dropout: f64,
    pub lr_peak: f64,
    pub warmup: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub adam: AdamConfig,
    pub split: f64,
    pub target_nodes: usize,
    pub seed: u64,
    /// Threshold stored in the trained model and used for the reported rates.
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            dim: 64,
            dropout: 0.3,
            lr_peak: 2.5e-4,
            warmup: 50,
            max_epochs: 100,
            patience: 15,
            adam: AdamConfig::default(),
            split: 0.8,
            target_nodes: 1000,
            seed: 0,
            threshold: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return bad("split must be in (0, 1)");
        }
        if !(self.lr_peak > 0.0 && self.lr_peak.is_finite()) {
            return bad("lr_peak must be positive");
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TrainError> {
        let text = fs::read_to_string(path).map_err(|e| TrainError::Config(e.to_string()))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| TrainError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("training needs non-empty training and validation sets; a smaller target_nodes gives more batches")]
    EmptyData,
    #[error("non-finite {what} in epoch {epoch}; last good epoch {last_good}")]
    Diverged { epoch: usize, last_good: usize, what: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Rates on the validation set at the configured threshold.
    pub tpr: f64,
    pub tnr: f64,
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    /// Snapshot with the lowest validation loss.
    pub best: ModelParams,
    pub best_epoch: usize,
    pub last: ModelParams,
    pub reports: Vec<EpochReport>,
    pub stopped_early: bool,
}

/// Validation loss (dropout off) summed over batches.
pub fn evaluate_loss(params: &ModelParams, batches: &[MiniBatch]) -> f64 {
    batches.iter().map(|b| loss(params, b, Mode::Infer)).sum()
}

pub fn initial_params(config: &TrainConfig, batches: &[&[MiniBatch]]) -> ModelParams {
    let stores: Vec<_> =
        batches.iter().flat_map(|bs| bs.iter()).flat_map(|b| b.items.iter()).map(|i| i.derivation.store()).collect();
    let (origins, rules) = vocabulary(stores);
    let mut p = ModelParams::init(config.dim, origins, rules, config.seed);
    p.set_threshold(config.threshold);
    p
}

/// Trains from a fresh initialization.
pub fn train(config: &TrainConfig, train: &[MiniBatch], val: &[MiniBatch]) -> Result<TrainResult, TrainError> {
    let params = initial_params(config, &[train, val]);
    train_from(config, params, train, val)
}

/// The epoch loop starting from `params`. Only training batches produce updates.
pub fn train_from(
    config: &TrainConfig,
    mut params: ModelParams,
    train: &[MiniBatch],
    val: &[MiniBatch],
) -> Result<TrainResult, TrainError> {
    config.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(TrainError::EmptyData);
    }
    params.set_threshold(config.threshold);
    let mut adam = AdamState::new(params.len());
    let mut stopper = EarlyStopping::new(config.patience);
    let mut best = params.clone();
    let mut reports = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stopped_early = false;
    for epoch in 1..=config.max_epochs {
        let lr = lr_schedule(epoch, config.lr_peak, config.warmup);
        order.shuffle(&mut rng);
        let mut train_loss = 0.0;
        for (step, &b) in order.iter().enumerate() {
            let seed = config.seed.wrapping_mul(1_000_003).wrapping_add((epoch * 100_003 + step) as u64);
            let (l, grad) = loss_and_grad(&params, &train[b], Mode::Train { dropout: config.dropout, seed });
            if !l.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(TrainError::Diverged { epoch, last_good: epoch - 1, what: "gradient" });
            }
            train_loss += l;
            adam_step(&mut adam, &config.adam, params.data_mut(), &grad, lr);
        }
        let val_loss = evaluate_loss(&params, val);
        if !val_loss.is_finite() || !params.is_finite() {
            return Err(TrainError::Diverged { epoch, last_good: epoch - 1, what: "validation loss" });
        }
        let logits: Vec<(f64, bool)> = val.iter().flat_map(|b| batch_logits(&params, b)).collect();
        let (tpr, tnr) = confusion_rates(&logits, config.threshold);
        reports.push(EpochReport { epoch, lr, train_loss, val_loss, tpr, tnr });
        log::info!("epoch {epoch}: lr {lr:.3e} train {train_loss:.6} val {val_loss:.6} tpr {tpr:.3} tnr {tnr:.3}");
        if stopper.observe(epoch, val_loss) {
            best = params.clone();
        }
        if stopper.should_stop() {
            stopped_early = true;
            break;
        }
    }
    Ok(TrainResult { best, best_epoch: stopper.best_epoch(), last: params, reports, stopped_early })
}

/// `epoch,lr,train_loss,val_loss,tpr,tnr` rows.
pub fn reports_csv(reports: &[EpochReport]) -> String {
    let mut out = String::from("epoch,lr,train_loss,val_loss,tpr,tnr\n");
    for r in reports {
        out += &format!("{},{},{},{},{},{}\n", r.epoch, r.lr, r.train_loss, r.val_loss, r.tpr, r.tnr);
    }
    out
}
