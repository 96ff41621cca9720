//! Library for studying linguistic homophily in part-of-speech tagging.
//!
//! The crate bundles three groups of functionality:
//!
//! * taggers for short social-media messages (a dictionary baseline, a
//!   linear-chain CRF, and a hierarchical BiLSTM tagger), plus a
//!   mixture-of-experts wrapper whose expert weights are computed per
//!   author from social-network node embeddings;
//! * social-graph machinery: edge-list ingestion, degree-preserving
//!   rewiring null models, LINE node embeddings, and network-aligned
//!   train/test splits;
//! * diagnostics relating tagger behaviour to network structure
//!   (accuracy assortativity, attention-distribution similarity) and a
//!   synthetic homophilous benchmark generator to exercise them at desk
//!   scale.
//!
//! Everything stochastic is driven by [`numerics::SeedStream`], so runs
//! are reproducible from a single `u64` seed.

pub mod analysis;
pub mod clustering;
pub mod corpus;
pub mod error;
pub mod node_embed;
pub mod numerics;
pub mod social_attention;
pub mod socialgraph;
pub mod taggers;

pub use error::{Error, Result};
