//! Generate many high-quality partitions of a dataset by Gibbs sampling
//! proportional to partition quality, then pick k diverse representatives by
//! metric clustering over partition space.
//!
//! The pipeline: seed with k-means, run the quality-proportional sampler to
//! collect a large sample set, compute pairwise partition distances
//! (membership-based, LiftEMD, or density ranks), select representatives
//! with the Gonzalez farthest-point sweep, and render distance/quality
//! distributions plus an MDS landscape of the representatives.
//!
//! Data-parallel inner loops (pairwise distances, multi-chain sampling) run
//! on rayon when the default `parallel` feature is enabled; the sequential
//! fallback produces bit-identical results.

pub mod dataset;
pub mod error;
pub mod grouping;
pub mod partition;
pub mod pdist;
pub mod quality;
pub mod report;
pub mod sampler;

pub use error::{Error, ErrorCategory, Result};
