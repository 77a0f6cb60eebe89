//! Spatial growth model for power-grid topologies.
//!
//! Nodes are born one at a time at uniform positions in a disk and link to
//! their `K` nearest predecessors, with `K` drawn per birth. The crate grows
//! such networks, predicts their degree law in closed form, fits that law to
//! observed grids, measures diameter and betweenness, and runs SIS/SIR
//! contagion on any graph.

pub mod epidemics;
pub mod error;
pub mod fitting;
pub mod graph;
pub mod ingestion;
pub mod growth;
pub mod meanfield;
pub mod metrics;
pub mod stats;

pub use error::{Error, Result};
pub use graph::Graph;
pub use growth::{grow, GrowthConfig, KDistribution, NodeCount, Point};
pub use meanfield::{DegreeHistogram, ExponentialMixture};
