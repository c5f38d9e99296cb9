//! Distributed density-based clustering via cluster boundaries.
//!
//! Instead of moving raw points to a coordinator, each node clusters its own
//! partition (DBSCAN), extracts a compact boundary for every cluster, and
//! ships only those boundaries plus per-cluster representatives. The
//! coordinator merges the boundary union into global clusters and can
//! regenerate representative point sets inside them by rejection sampling.
//!
//! Modules follow that pipeline: [`spatial_index`] and [`dbscan`] do the
//! local clustering, [`boundary`] extracts cluster rims via balance vectors,
//! [`local_model`] packages and serializes per-node results, [`global_merge`]
//! combines them, [`regenerate`] rebuilds point sets, [`harness`] simulates a
//! multi-node run, and [`datasets`] / [`metrics`] provide inputs and quality
//! measures.

pub mod boundary;
pub mod datasets;
pub mod dbscan;
pub mod error;
pub mod geometry;
pub mod global_merge;
pub mod harness;
pub mod local_model;
pub mod metrics;
pub mod regenerate;
pub mod spatial_index;

pub use error::{Error, Result};
