//! Time-evolving legislative corpora as document networks.
//!
//! This crate models annual snapshots of statutory collections as document
//! trees, extracts cross-references against configurable citation grammars,
//! builds the hierarchy/reference/sequence/quotient graph views, clusters
//! snapshots with a two-level map-equation optimizer under consensus, aligns
//! content across snapshots, and derives growth and topic statistics.
//!
//! Start with the runnable examples (`cargo run --example full_pipeline`)
//! or the [`pipeline`] module for end-to-end orchestration. The thin
//! `legisgraph` binary exposes the same stages as subcommands.

pub mod cluster;
pub mod corpus;
pub mod dynamics;
pub mod graphs;
pub mod pipeline;
pub mod refextract;
pub mod stats;
