//! Repetitiveness measures for two-dimensional data.
//!
//! * [`delta`]: distinct square submatrix counts and the `delta` measure.
//! * [`attractor`]: attractor verification, exact and greedy minimum search.
//! * [`blocktree`]: block trees with random access and a binary format.
//! * [`generators`]: deterministic matrix families used in experiments.

pub mod attractor;
pub mod blocktree;
#[cfg(feature = "cli")]
pub mod cli;
pub mod delta;
pub mod error;
pub mod generators;
pub mod hash;
pub mod hitting_set;
pub mod istring;
pub mod matrix;

pub use attractor::{gamma_exact, gamma_greedy, verify_attractor, Attractor, Verification};
pub use blocktree::{build_bt, build_gamma_bt, BlockTree, BuildOptions};
pub use delta::{delta2d, delta_profile, DeltaMethod, DeltaProfile, Ratio};
pub use error::{Error, Result};
pub use hash::HashIndex;
pub use matrix::{Matrix, MatrixFormat, Symbol};
