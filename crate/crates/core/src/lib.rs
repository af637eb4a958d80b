//! Centroid persistence in random growing trees.
//!
//! Trees grow by uniform attachment, preferential attachment or d-regular
//! diffusion. Subtree sizes are kept current under every insertion, so the
//! centroids and the top-K central set are exact at each step. The rest of
//! the crate is built around that core: an exact solver for the weighted
//! lattice walk behind late-vertex catch-up, Pólya urns with their limit
//! laws, and a seeded Monte Carlo harness.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod growth;
pub mod tree;
pub mod urn;
pub mod walk;

pub use error::{Error, Result};
pub use growth::{ModelKind, ModelSpec, RngStream, SeedGraph};
pub use tree::{CentroidSet, GrowingTree, TopKSet};
