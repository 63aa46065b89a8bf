//! Auditing classification axes in a subclass hierarchy.
//!
//! The pipeline reads statements ([`ingest`]) into an immutable
//! [`model::KnowledgeBase`], builds the subclass graph ([`graph`]), extracts
//! axes from qualified union statements ([`axes`]) and measures them
//! ([`metrics`], [`ortho`], [`lattice`]). [`infer`] applies
//! property-to-class rules.

pub mod axes;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod infer;
pub mod lattice;
pub mod ortho;
pub mod fixtures;
pub mod cli;
