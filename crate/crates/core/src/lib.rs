//! Social network segregation analysis for multi-layer village networks: graph
//! statistics, dyadic tie models, sex-permutation tests, community detection,
//! segregation decomposition, synthetic corpora and a batch pipeline.

pub mod attributes;
pub mod community;
pub mod dyadic;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod segregation;
pub mod synth;
