//! Clause selection: the base age/weight strategy, model-ordered queues, layered
//! selection with fallback, and lazy model evaluation.

mod passive;
mod scheme;

pub use passive::{
    classify, classify_logit, order_key_m10, order_key_mr, Class, LogitSource, OrdF64, PassiveEntry, PassiveStore,
    RatioCounter, Selection, Source,
};
pub use scheme::{SchemeError, SelectionScheme, Variant};
