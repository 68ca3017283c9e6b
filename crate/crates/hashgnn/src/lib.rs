//! MinHash message-passing node embeddings for attributed networks.
//!
//! This crate embeds every node of an undirected, attributed graph into a
//! `K`-dimensional vector of discrete element ids by running `T` iterations
//! of randomized MinHash message passing: each iteration every node
//! broadcasts a one-element sketch of its current representation and then
//! pools its own representation with its neighbors' messages under fresh
//! universal hash functions, keeping the overall argmin per dimension. The
//! Hamming similarity of two rows estimates how alike the nodes'
//! attribute-and-structure neighborhoods are, which drives a fast
//! link-prediction pipeline: split edges, embed the train graph, rank
//! held-out edges against sampled non-edges by similarity, and report AUC.
//!
//! Everything is deterministic in the seed, bitwise reproducible across
//! runs and thread counts. Time scales linearly in the iteration count and
//! the node count (at constant average degree); memory holds only the
//! current and previous iteration states.
//!
//! Modules:
//! - [`hashing`]: universal hash functions, MinHash signatures, exact
//!   Jaccard.
//! - [`graph`]: the attributed-graph model, file formats, edge splits, and
//!   the planted-partition generator.
//! - [`sketch`]: the embedding engine and the embedding file format.
//! - [`eval`]: Hamming scoring, Mann-Whitney AUC, and the experiment
//!   pipeline.
//!
//! ```
//! use hashgnn::eval::hamming_score;
//! use hashgnn::graph::AttributedGraph;
//! use hashgnn::hashing::ElementSet;
//! use hashgnn::sketch::{embed, EmbedConfig};
//!
//! // Two linked nodes with overlapping attributes, plus an unrelated one.
//! let attrs = vec![
//!     ElementSet::from_ids([0, 1, 2]),
//!     ElementSet::from_ids([1, 2, 3]),
//!     ElementSet::from_ids([7, 8]),
//! ];
//! let g = AttributedGraph::from_parts(3, [(0, 1)], attrs, 9)?;
//!
//! let m = embed(&g, &EmbedConfig { iterations: 2, dimensions: 256, seed: 42 })?;
//! let close = hamming_score(m.row(0), m.row(1))?;
//! let far = hamming_score(m.row(0), m.row(2))?;
//! assert!(close > far, "attribute overlap should show up in the similarity");
//! # Ok::<(), hashgnn::Error>(())
//! ```

pub mod error;
pub mod eval;
pub mod graph;
pub mod hashing;
pub mod sketch;

pub use error::{Error, Result};
