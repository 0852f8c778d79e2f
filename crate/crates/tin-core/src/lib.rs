//! Causal discovery under measurement error in linear non-Gaussian models.
//!
//! The crate is organized around the TIN function: the number of linearly
//! independent directions of a variable set Y that cannot be made independent
//! of a set Z. Exact oracles compute it from a known model (matrix ranks and
//! vertex cuts), four estimators recover it from samples, and the discovery
//! layer turns one-against-rest TIN values into an ordered group
//! decomposition of the latent graph.

pub mod error;
pub mod graph;
pub mod scm;
pub mod stats;
pub mod oracle;
pub mod estimators;
pub mod discovery;
pub mod bench;
pub mod io;

pub use error::{Result, TinError};
pub use graph::{Dag, GroupOrdering, Pdag, VertexSet};
