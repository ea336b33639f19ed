//! Simulation toolkit for colocated MIMO radar with matrix completion.
//!
//! The pipeline mirrors a networked receive array: [`signal_model`] builds the
//! fusion-center data matrices, [`sampling`] draws the per-antenna random
//! sub-sampling patterns, [`matcomp`] recovers the full matrices by singular
//! value thresholding, [`estimation`] turns them into DOA / speed estimates
//! via MUSIC, and [`experiments`] runs seeded Monte-Carlo sweeps.

pub mod error;
pub mod estimation;
pub mod experiments;
pub mod linalg;
pub mod matcomp;
pub mod rng;
pub mod sampling;
pub mod signal_model;

pub use error::{Error, Result};
