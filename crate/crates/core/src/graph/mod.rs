//! Snapshots, windowing, normalization, cross-snapshot alignment, the dynamic
//! SBM generator and edge splits.

mod align;
mod normalize;
mod sbm;
mod snapshot;
mod split;

pub use align::{align_snapshots, common_nodes, AlignmentMap};
pub use normalize::normalize_adjacency;
pub use sbm::{gen_dynamic_sbm, SbmConfig};
pub use snapshot::{Event, NodeLabels, NodeRegistry, Snapshot, TemporalGraphDataset};
pub use split::{sample_non_edges, split_edges, EdgeSplit};
