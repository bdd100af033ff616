//! Counterfactual second opinions of human experts under a Gumbel-Max
//! set-invariant structural causal model.
//!
//! The crate covers the model itself ([`scm`]), per-expert conditional
//! models ([`models`]), learning which experts share noise
//! ([`partitioning`]), held-out scoring ([`evaluation`]) and prediction panels
//! ([`data`]). All randomness flows through explicitly seeded streams from
//! [`rng`].

pub mod data;
pub mod error;
pub mod evaluation;
pub mod models;
pub mod partitioning;
pub mod rng;
pub mod scm;
pub mod types;

pub use error::{Error, Result};
pub use types::{ExpertId, Label, Partition, SimplexDistribution};
