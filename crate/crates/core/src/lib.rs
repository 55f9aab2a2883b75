//! Dense multiplex networks and their limits.
//!
//! A multiplex is a vertex set carrying `r` simple graphs. This crate samples
//! multiplexes from limit objects (multiplexons), counts motif densities,
//! computes layered cut norms and cut-distance estimates, and compares degree
//! and clustering statistics against their limits.

pub mod codec;
pub mod cutmetric;
pub mod error;
pub mod experiment;
pub mod homdensity;
pub mod models;
pub mod multiplex;
pub mod multiplexon;
pub mod netstats;
pub mod rng;
pub mod subset;

pub use error::{Error, Result};
pub use multiplex::{Mode, Multiplex};
pub use multiplexon::{AnalyticMultiplexon, Multiplexon, StepMultiplexon};
pub use subset::Subset;
