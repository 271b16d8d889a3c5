//! Supervised training of the derivation classifier: example weighting, batching,
//! exact gradients, Adam, early stopping and evaluation metrics.

mod backprop;
mod data;
mod metrics;
mod optim;
mod train;

pub use backprop::{batch_logits, bce_grad, bce_with_logit, loss, loss_and_grad};
pub use data::{
    build_batches, example_weights, pack, split_batches, train_count, vocabulary, weighted_items, BatchItem, DataError,
    Example, MiniBatch, PreparedData,
};
pub use metrics::{collect_logits, confusion_rates, min_positive_logits, roc, roc_csv, roc_thresholds, RocPoint};
pub use optim::{adam_step, lr_schedule, AdamConfig, AdamState, EarlyStopping};
pub use train::{
    evaluate_loss, initial_params, reports_csv, train, train_from, EpochReport, TrainConfig, TrainError, TrainResult,
};

#[cfg(test)]
mod tests;
