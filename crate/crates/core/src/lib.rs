//! A laboratory for studying greedy best-first search under parallel expansion.
//!
//! The crate is organized around explicit state-space topologies with a
//! heuristic value attached to every state. On top of those it provides:
//!
//! * [`topology`]: the `topology v1` text format, validation, and instance
//!   generators (pathological families and seeded random spaces).
//! * [`analyzer`]: high-water marks, progress states, benches, and the bench
//!   transition system, plus brute-force oracles for small instances.
//! * [`engine`]: sequential GBFS and four shared-open-list parallel variants
//!   (KPGBFS, constraint-gated PUHF-style search, OBAT, and OBAT with
//!   separated generation and evaluation), runnable on native threads or on a
//!   deterministic virtual scheduler.
//! * [`verify`]: pure checks over recorded runs: sequential replayability,
//!   bench-membership of expanded states, deferred-queue occupancy bounds,
//!   and the worst-case expansion bound.

pub mod analyzer;
pub mod engine;
pub mod topology;
pub mod verify;

pub use topology::{StateId, StateSpace};
