//! Recursive neural network over derivation DAGs.

mod dag;
mod evaluator;
mod io;
mod ops;
mod params;

pub use dag::{forward_dag, forward_dag_with, DagForward, EvalRead, Mode, Op, Program};
pub use evaluator::{forward_dag_cached, CachedEmbedding, CachedForward, EmbeddingCache, EvalStats, Evaluator};
pub use io::{
    load_model, read_model, read_model_header, save_model, write_model, BlockDecl, ModelHeader, ModelIoError,
    MODEL_MAGIC, MODEL_VERSION,
};
pub use ops::{apply_rule, deriv_embed, deriv_forward, eval_forward, eval_logit, sigmoid, DerivTrace, EvalTrace};
pub use params::{EvalRanges, Layout, ModelParams, RuleRanges, RuleSig, DEFAULT_LN_EPS, UNKNOWN_ORIGIN};
