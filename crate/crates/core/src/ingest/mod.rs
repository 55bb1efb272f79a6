//! Constructors turning raw data into merge trees and filtered complexes.

pub mod complex;
pub mod embedding;
pub mod graph;
pub mod linkage;
pub mod scalar;
pub(crate) mod sweep;

pub use complex::{cech_complex, graph_sublevel_complex, minimal_enclosing_radius, vietoris_rips, FilteredComplex, Simplex};
pub use embedding::{density_subsample, sliding_window};
pub use graph::{degree_weights, graph_merge_tree, graph_sweep, image_to_grid_graph, Connectivity, WeightedGraph};
pub use linkage::{single_linkage_sweep, single_linkage_tree, DistanceMatrix};
pub use scalar::{scalar_sweep, scalar_to_merge_tree, ScalarSeries};
pub use sweep::SweepTree;
