//! Force Path Cut: make a chosen path the shortest source–target path by
//! removing a cheap set of edges, optionally accelerated by solving on a
//! percentile-thresholded subgraph first.

pub mod attack;
pub mod bench;
pub mod cover;
pub mod error;
pub mod features;
pub mod gat;
pub mod graph;
pub mod grasp;
pub mod lp;
pub mod paths;
pub mod scoring;
pub mod synthgen;

pub use error::{Error, Result};
