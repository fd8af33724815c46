//! Proper conflict-free graph colouring.
//!
//! A colouring is proper conflict-free when adjacent vertices get different colours and every
//! non-isolated vertex has a neighbour whose colour appears exactly once in its neighbourhood.
//! The crate provides a verifier, greedy and exact reference solvers, a constructive
//! (resampling-based) pipeline using roughly Δ + O(Δ^{2/3} log Δ) colours for large Δ, and a
//! high-precision evaluator for the probability bounds behind that pipeline.

pub mod baselines;
pub mod bounds;
pub mod colouring;
pub mod config;
pub mod dimacs;
pub mod enumerate;
pub mod error;
pub mod generate;
pub mod graph;
pub mod lll;
pub mod stage_low;
pub mod stage_mid;
pub mod stage_final;
pub mod stage_partition;
pub mod stage_reduce;
pub mod verify;
