//! Exact verification tools for Fibonacci identities.

pub mod catalog;
pub mod classifier;
pub mod discovery;
pub mod dsl;
pub mod evaluator;
pub mod prover;
pub mod sequences;
pub mod tiling;
