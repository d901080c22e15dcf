//! Graphon message passing and out-of-distribution link prediction.
//!
//! The crate samples graphs from stochastic block models, runs discrete
//! message-passing networks on them, computes the matching continuous
//! (graphon-level) embeddings exactly on the block structure, and measures
//! how the two relate as graphs grow. Node embeddings from blocks with
//! identical structure collapse together at large sizes; pairwise
//! embeddings converge to the edge probabilities themselves and keep their
//! link-prediction power.
//!
//! * [`sbm`]: models, validation, sampling, degree and common-neighbor stats
//! * [`nn`]: feed-forward nets, backprop, Adam
//! * [`mpnn`]: layer definitions shared by node and pairwise networks
//! * [`node_mpnn`], [`pair_mpnn`]: discrete and block-exact continuous passes
//! * [`analysis`]: convergence gaps, slopes, bounds, iso-block gaps
//! * [`linkpred`]: scenarios, training, metrics, result tables
//! * [`experiment`]: config-driven runs with reproducible manifests

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod linkpred;
pub mod mpnn;
pub mod nn;
pub mod node_mpnn;
pub mod pair_mpnn;
pub mod rng;
pub mod sbm;

pub use error::{Error, Result};
