//! An exact solver for complete EFX allocations of indivisible items among
//! agents with two additive valuation types.
//!
//! An allocation is *EFX* (envy-free up to any item) when no agent prefers
//! another agent's bundle after removing any single item from it. For
//! instances in which every agent holds one of two additive valuation
//! functions, a complete EFX allocation always exists; this crate finds one
//! constructively by repeatedly applying Pareto-improvement steps until every
//! item is allocated, then certifies the result against the EFX definition.
//!
//! All arithmetic is exact: item values are arbitrary-precision rationals,
//! and ties are broken by a symbolic perturbation (see [`valuation`]) so that
//! every bundle comparison is strict. Symbolic EFX implies EFX under the raw
//! values, so the certified output is EFX in the ordinary sense as well.
//!
//! Module map:
//!
//! * [`model`] — instances, item sets, allocations, and their JSON formats
//! * [`valuation`] — raw and symbolically perturbed bundle values
//! * [`envy`] — envy graphs, sources, and envy-cycle elimination
//! * [`champion`] — minimum preferred sets and most-envious agents
//! * [`checker`] — EFX/Pareto verification and brute-force oracles
//! * [`engine`] — the improvement-step engine and outer solve loop
//! * [`generator`] — seeded random instance generation

pub mod champion;
pub mod checker;
pub mod engine;
pub mod envy;
pub mod generator;
pub mod model;
pub mod valuation;

pub use model::{Allocation, AgentType, Instance, ItemSet, Rational};
