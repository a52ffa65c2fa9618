//! Label-only model extraction attacks against two-layer GCN node classifiers.
//!
//! The crate trains a victim GCN, exposes it through a hard-label [`gcn::Oracle`],
//! and reconstructs surrogate models under seven attacker-knowledge settings
//! (node attributes, graph structure, shadow graph). Surrogates are scored by
//! fidelity to the victim and by accuracy against ground truth.

pub mod adjacency;
pub mod attacks;
pub mod checkpoint;
pub mod community;
pub mod datasets;
pub mod eval;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod par;
pub mod rng;
pub mod sparse;

pub use adjacency::{normalize_adjacency, NormalizedAdjacency};
pub use error::{Error, Result};
pub use graph::{Graph, KHopClosure, NodeRole, NodeSetView};
pub use sparse::CsrMatrix;
