//! Approximate-weight perfect matching on weighted bipartite graphs.
//!
//! The pipeline loads a sparse matrix, equilibrates it, turns entries into
//! edge weights, builds a perfect matching (greedy maximal, then maximum
//! cardinality), and improves its weight with augmenting 4-cycles. The
//! improvement step exists as a sequential loop ([`awac_seq`]) and as a
//! simulation of the bulk-synchronous 2D-grid protocol ([`awac_dist`]).
//! [`oracle_exact`] gives the true optimum for comparison.

pub mod awac_dist;
pub mod awac_seq;
pub mod graph;
pub mod harness;
pub mod matching_init;
pub mod matrix_io;
pub mod oracle_exact;

pub use graph::{BipartiteGraph, Cycle4, Matching};
pub use matrix_io::{SparseMatrix, WeightMetric};
