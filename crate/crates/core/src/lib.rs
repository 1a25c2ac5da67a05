//! Neighbor-aware review helpfulness prediction.
//!
//! Reviews are encoded with a small convolutional network over frozen word
//! embeddings. The reviews displayed next to a target review are merged
//! into a context embedding by one of four weighting schemes, and the
//! target and context embeddings are mixed by a fixed factor `gamma`
//! before a logistic output layer.
//!
//! The crate also contains the contextual scalar baselines, a synthetic
//! corpus generator and an experiment harness for sweeps.

pub mod baselines;
pub mod context;
pub mod corpus;
pub mod embeddings;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod model;

pub use error::{NapError, Result};
