//! Weighted Jaccard sketching.
//!
//! This crate fingerprints sparse weighted sets so that the fraction of
//! positions at which two fingerprints collide estimates the generalized
//! Jaccard similarity `Σ min(S_k, T_k) / Σ max(S_k, T_k)`. It bundles:
//!
//! - deterministic keyed variates ([`variates`]) shared across documents,
//! - eight sketching algorithms ([`sketch`]) behind one interface,
//! - exact similarity oracles and the collision estimator ([`similarity`]),
//! - synthetic corpus generators ([`synth`]),
//! - top-K retrieval scoring ([`retrieval`]),
//! - sparse-file and fingerprint-file IO ([`io`]),
//! - a statistical property suite ([`props`]) exercising the sampling
//!   laws the estimators rely on.

pub mod io;
pub mod props;
pub mod retrieval;
pub mod similarity;
pub mod sketch;
pub mod stats;
pub mod synth;
pub mod variates;
