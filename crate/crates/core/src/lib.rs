//! Artificial outlier generation and evaluation.
//!
//! The crate generates artificial outliers from genuine (mostly normal) data,
//! filters them, trains kernel reference classifiers with them, and runs a
//! repeated benchmark workflow with non-parametric post-hoc statistics.

pub mod ball;
pub mod bench;
pub mod classifiers;
pub mod cli;
pub mod data;
pub mod dist;
pub mod error;
pub mod filters;
pub mod generators;
pub mod neighbors;
pub mod preprocess;
pub mod rng;
pub mod stats;

pub use ball::{minimal_enclosing_ball, Ball};
pub use data::{Dataset, Label, Provenance};
pub use error::{Error, Result};
pub use neighbors::{k_nearest_neighbors, knn_of_row, Neighbor};
pub use rng::RngStream;
