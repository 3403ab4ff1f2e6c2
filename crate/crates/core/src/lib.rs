//! Differential testing toolkit for WebAssembly runtimes.

pub mod corpus;
pub mod fixtures;
pub mod generator;
pub mod harness;
pub mod locator;
pub mod mutator;
pub mod par;
pub mod wasm;
