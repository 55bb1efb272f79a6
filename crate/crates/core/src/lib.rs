//! Decorated merge trees: construction from data, persistence decoration,
//! and distance estimation via labelled interleavings and Gromov-Wasserstein
//! transport.

pub mod barcode;
pub mod decoration;
pub mod error;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod persistence;
pub mod pipeline;
pub mod render;
pub mod transport;
pub mod tree;

pub use barcode::{truncate_barcode, Barcode, Interval};
pub use decoration::{
    check_disjointness, cycle_component, leaf_barcode, lift_decorate, node_barcode, simplify, DecoratedMergeTree,
    LiftedBar,
};
pub use error::{Error, Result};
pub use tree::{
    lca_matrix, upsample, upsample_on_grid, Labeling, LcaMatrix, MergeTree, NodeId, SamplingGrid, TreeNode,
    TreePoint, ValidationReport, Violation,
};
pub use persistence::{barcode, reduce, PersistencePair};
pub use metrics::{bottleneck, exhaustive_labeled_distance, labeled_cost, Decorations, ExhaustiveOptions, Norm};
