//! Dense and sparse kernels, Adam, seeded Gaussian sampling and a
//! finite-difference gradient checker.

mod adam;
mod dense;
mod gradcheck;
mod random;
mod sparse;

pub use adam::{AdamConfig, AdamState};
pub use dense::{dot, DenseMatrix};
pub use gradcheck::{finite_difference_check, CoordinateSample, GradCheckReport};
pub use random::{derive_seed, glorot_uniform, rng_from_seed, sample_standard_normal, standard_normal_fill, SeededRng};
pub use sparse::{spmm, SparseMatrix};
