//! Multiagent reinforcement learning for codebook-based energy beamforming.
//!
//! Energy transmitters with uniform linear arrays pick beams from a discrete
//! codebook to power receivers scattered over a field. The crate provides the
//! channel and array model, the stepping environment (joint and sequential
//! per-agent rollout), brute-force oracles, tabular and actor-critic learners,
//! and an experiment harness that writes CSV metrics.

pub mod array;
pub mod codebook;
pub mod env;
pub mod error;
pub mod harness;
pub mod learners;
pub mod oracle;

pub use error::{Error, Result};
