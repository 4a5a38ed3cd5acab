//! Graph convolution with DPP-selected diverse negative samples.
//!
//! The crate covers the whole pipeline: graph bundles and connected
//! components ([`graph`], [`dataset`]), dense symmetric linear algebra
//! ([`linalg`]), exact k-DPP sampling ([`dpp`]), negative samplers
//! ([`negative`]), GCN/D2GCN training ([`model`]), evaluation metrics
//! ([`metrics`]) and the depth-sweep harness ([`sweep`], [`sbm`]).

pub mod dataset;
pub mod dpp;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod negative;
pub mod rng;
pub mod sbm;
pub mod sweep;

pub use error::{Error, Result};
