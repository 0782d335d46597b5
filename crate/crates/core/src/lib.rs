//! Budgeted, compile-gated evolutionary search over formal theorem statements.

pub mod backends;
pub mod evolast;
pub mod metrics;
pub mod problem;
pub mod search;
pub mod statement;
pub mod synth;

pub use problem::{derive_seed, Problem};
