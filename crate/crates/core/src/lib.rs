//! Joint variational graph autoencoders for dynamic graphs.
//!
//! Each snapshot of a dynamic graph gets its own two-layer GCN variational
//! autoencoder. Autoencoders are trained jointly: every snapshot's loss adds a
//! KL term pulling its posterior toward a Gaussian centred on the latent means
//! of its `l` predecessors, which keeps the latent spaces aligned over time.
//!
//! The crate is `no_std` (with `alloc`). File formats, the CLI, timing and
//! the threaded epoch runner live in the `dynvgae` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod eval;
pub mod graph;
pub mod loss;
pub mod model;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
pub use eval::MetricReport;
pub use graph::{AlignmentMap, EdgeSplit, NodeLabels, NodeRegistry, Snapshot, TemporalGraphDataset};
pub use loss::{LossBreakdown, PriorAnchor};
pub use model::{EncoderParams, Features, LatentState};
pub use tensor::{AdamConfig, AdamState, DenseMatrix, SparseMatrix};
pub use trainer::{AnchorMode, JointTrainer, KlNormalization, TrainOutput, TrainingConfig, UpdateStrategy};
