//! A given-clause resolution prover whose clause selection can be guided by a
//! recursive neural network over clause derivation histories, with the tooling to
//! log derivations, train the network, and benchmark guided strategies.

pub mod derivation;
pub mod guidance;
pub mod harness;
pub mod logic;
pub mod rvnn;
pub mod saturation;
pub mod training;
