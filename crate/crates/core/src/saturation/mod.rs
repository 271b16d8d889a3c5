//! The given-clause saturation loop with binary resolution and factoring.

mod infer;
mod prover;

pub use infer::{factor, resolve};
pub use prover::{
    extract_proof, saturate, Limits, Prover, SaturationOutcome, SaturationStats, Status, DEFAULT_MAX_SELECTIONS,
};
