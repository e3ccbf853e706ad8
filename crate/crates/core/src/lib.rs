//! Exact and Monte Carlo analysis of thresholds of monotone set families.
//!
//! A monotone family is stored as the antichain of its minimal sets over a
//! ground set of at most 64 elements. On top of that the crate computes
//! product measures and their critical probabilities, influences and the
//! isoperimetric gap, exact cover ("expectation") thresholds, expectation
//! thresholds of subgraph-containment properties, and Monte Carlo estimates
//! for random graph and hypergraph properties.

pub mod audit;
pub mod config;
pub mod cover;
pub mod error;
pub mod family;
pub mod generators;
pub mod graphs;
pub mod io;
pub mod measure;
pub mod simulate;
pub mod subset;

pub use config::{AuditConfig, Caps};
pub use error::{Error, Result};
pub use family::{LevelProfile, MonotoneFamily, SetFamily};
pub use graphs::GraphSpec;
pub use simulate::HypergraphSpec;
pub use subset::Subset;
