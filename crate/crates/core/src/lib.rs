//! Graph k-anonymization toolkit: clustering- and modification-based
//! perturbation with community/hub/bridge constraints, a trained
//! subgraph-similarity metric, and an evaluation harness for information
//! loss and structural re-identification risk.

pub mod anonymize;
pub mod community;
pub mod error;
pub mod evaluate;
pub mod graph;
pub mod metrics;
pub mod similarity;
pub mod vf2;

pub use error::{GraphError, Result};
pub use graph::{Graph, NodeId};
