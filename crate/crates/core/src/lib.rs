//! Solver suite for the all-pairs shortest path colouring (APSPC) problem.
//!
//! Nodes of a weighted graph may be coloured (each colour stands for one
//! weak-learner function deployed on a switch). Every node pair must be
//! joined by a route that visits at least one node of every colour, and the
//! objective adds up route costs and colouring costs.

pub mod brkga;
pub mod color_path;
pub mod error;
pub mod graph;
pub mod instance;
pub mod metrics;
pub mod oracle;
pub mod rng;

pub use color_path::{
    all_pairs_covering_cost, covering_costs_from, covering_shortest_path, AllPairsCost, ColorSet,
    Coloring, CoveringPathResult,
};
pub use error::{Error, Result};
pub use graph::{cd, compute_num_colors, Edge, GraphStats, NodeId, PathResult, Weight, WeightedGraph};
pub use instance::{generate_instance, CostRange, GenParams, Instance};
