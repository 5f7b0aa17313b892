//! Learning generative models over databases of labeled graphs.
//!
//! Every graph is canonized into its minimum DFS code, the codes are
//! one-hot encoded component by component, and a stacked-LSTM sequence
//! model with five independent softmax heads is trained over them.
//! Sampling from the model and decoding the sampled codes yields new
//! graphs, which the [`metrics`] module scores against held-out data.
//!
//! The numerical engine is generic over the scalar type (see [`Scalar`]);
//! the aliases at the crate root pin the double-precision instantiation
//! that the rest of the tooling uses.

pub mod canonize;
pub mod codec;
pub mod datagen;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod neural;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use canonize::{min_dfs_code, DfsCode, EdgeTuple};
pub use graph::{InvariantSpec, LabeledGraph};

/// Double-precision generative model.
pub type Model = model::GenerativeModel<f64>;
/// Single-precision generative model.
pub type ModelF32 = model::GenerativeModel<f32>;
/// Double-precision network (embedding, stacked LSTM and output heads).
pub type Network = neural::Network<f64>;
/// Double-precision Adam optimizer state.
pub type Adam = neural::AdamState<f64>;
